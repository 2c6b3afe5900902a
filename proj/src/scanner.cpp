#include "twisted/scanner.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>

#include <boost/math/special_functions/log1p.hpp>

#include "json.hpp"
#include "twisted/compensated.hpp"
#include "twisted/errors.hpp"

namespace twisted {
namespace {

double round_up(double x) { return std::nextafter(x * (1.0 + 1e-12), HUGE_VAL); }

// Upper bound on sum_{n=a}^{a+len-1} (ln n)/n. (ln x)/x decreases for x >= 3,
// so the sum is at most f(a) + integral_a^b (ln x)/x dx = f(a) + (ln^2 b - ln^2 a)/2.
double log_weight_bound(BigInt a, BigInt len) {
  double total = 0.0;
  if (a == 2) {
    total += std::log(2.0) / 2.0;
    if (len == 1) return total;
    a = 3;
    len -= 1;
  }
  const double ln_a = ext_log(a).convert_to<double>();
  const double fa = ln_a / to_double(a);
  if (len == 1) return total + fa;
  const double u = boost::math::log1p(ExtFloat(len) / ExtFloat(a)).convert_to<double>();
  return total + fa + u * (2.0 * ln_a + u) / 2.0;
}

double abs_g(const CertifiedSum& v) { return std::abs(v.value); }

struct Extremum {
  double value = std::numeric_limits<double>::infinity();
  double t = 0.0;
  void offer(double v, double at) {
    if (v < value) {
      value = v;
      t = at;
    }
  }
};

struct Partial {
  std::vector<Cell> bad;
  std::size_t evaluations = 0;
  std::size_t bisections = 0;
  double max_err = 0.0;
  Extremum min;
};

struct Pending {
  double lo, hi;
  CertifiedSum glo, ghi;
};

void certify_cell(const Evaluator& eval, double lipschitz, const ScanOptions& opt, Pending first, Partial& out) {
  std::vector<Pending> stack{std::move(first)};
  while (!stack.empty()) {
    Pending c = std::move(stack.back());
    stack.pop_back();
    const double width = c.hi - c.lo;
    const double margin = lipschitz * width / 2.0 + opt.eval_safety * std::max(c.glo.err, c.ghi.err);
    if (std::min(abs_g(c.glo), abs_g(c.ghi)) > margin) continue;
    if (width <= opt.h_min) {
      out.bad.push_back({c.lo, c.hi});
      continue;
    }
    const double mid = (c.lo + c.hi) / 2.0;
    const CertifiedSum gm = eval(mid);
    ++out.evaluations;
    ++out.bisections;
    out.max_err = std::max(out.max_err, gm.err);
    out.min.offer(abs_g(gm), mid);
    // push the right half first so the left half is finished first
    stack.push_back({mid, c.hi, gm, c.ghi});
    stack.push_back({c.lo, mid, c.glo, gm});
  }
}

template <class Fn>
void run_chunks(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::size_t>(count, 1u << 16))));
  if (threads == 1) {
    fn(0, 0, count);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k) {
      const std::size_t lo = count * k / threads;
      const std::size_t hi = count * (k + 1) / threads;
      pool.emplace_back([&, k, lo, hi] {
        try {
          fn(k, lo, hi);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

FiniteSet::FiniteSet(std::vector<std::uint64_t> elements) : elements_(std::move(elements)) {
  std::sort(elements_.begin(), elements_.end());
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (elements_[i] < 2) throw InvalidArgument("set", "elements must be >= 2");
    if (i > 0 && elements_[i] == elements_[i - 1]) {
      throw InvalidArgument("set", "duplicate element " + std::to_string(elements_[i]));
    }
    if (elements_[i] > (std::uint64_t{1} << 53)) throw InvalidArgument("set", "elements must be below 2^53");
  }
  logs_.reserve(elements_.size());
  for (auto n : elements_) logs_.push_back(std::log(static_cast<double>(n)));
}

FiniteSet FiniteSet::parse(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return FiniteSet{};
  std::vector<std::uint64_t> out;
  if (text[first] == '[') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw InvalidArgument("set", std::string("malformed JSON list: ") + e.what());
    }
    if (!doc.is_array()) throw InvalidArgument("set", "expected a JSON list of integers");
    for (const auto& v : doc) {
      if (!v.is_number_unsigned()) throw InvalidArgument("set", "expected nonnegative integers in the list");
      out.push_back(v.get<std::uint64_t>());
    }
    return FiniteSet(std::move(out));
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = std::min(text.find(',', pos), text.size());
    std::string item = text.substr(pos, comma - pos);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t\r\n") + 1);
    BigInt n;
    try {
      n = parse_decimal(item);
    } catch (const FormatError& e) {
      throw InvalidArgument("set", e.what());
    }
    if (n > std::numeric_limits<std::uint64_t>::max()) throw InvalidArgument("set", "element too large");
    out.push_back(n.convert_to<std::uint64_t>());
    pos = comma + 1;
  }
  return FiniteSet(std::move(out));
}

CertifiedSum FiniteSet::evaluate(double t) const {
  CompensatedSum re(1.0), im;
  double bound = 0.0;
  double abs_total = 1.0;
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    const double inv = 1.0 / static_cast<double>(elements_[i]);
    const double theta = t * logs_[i];
    re.add(inv * std::cos(theta));
    im.add(-inv * std::sin(theta));
    bound += inv * (3.0 * kEps * std::abs(theta) + 5.0 * kEps);
    abs_total += inv;
  }
  const Complex v(re.value(), im.value());
  const double err = bound + 2.0 * kEps * (std::abs(v.real()) + std::abs(v.imag())) +
                     8.0 * static_cast<double>(elements_.size() + 1) * kEps * kEps * abs_total;
  return {v, round_up(err)};
}

double FiniteSet::lipschitz() const {
  double total = 0.0;
  for (std::size_t i = 0; i < elements_.size(); ++i) total += logs_[i] / static_cast<double>(elements_[i]);
  return elements_.empty() ? 0.0 : round_up(total * (1.0 + 4.0 * kEps * static_cast<double>(elements_.size())));
}

CertifiedSum g(const FiniteSet& s, double t) { return s.evaluate(t); }

double lipschitz_bound(const FiniteSet& s) { return s.lipschitz(); }

BlockSeries::BlockSeries(BlockSet set, SumOptions sums) : set_(std::move(set)), sums_(sums) {
  double total = 0.0;
  for (const Block& b : set_.blocks()) total += log_weight_bound(b.start(), b.len());
  lipschitz_ = set_.empty() ? 0.0 : round_up(total * (1.0 + 1e-9));
}

CertifiedSum BlockSeries::evaluate(double t) const {
  CertifiedSum total{{1.0, 0.0}, 0.0};
  for (const Block& b : set_.blocks()) total = total + interval_sum(b.start(), b.len(), t, sums_);
  return total;
}

RefineResult refine_min(const Evaluator& eval, double t_lo, double t_hi, double tol) {
  if (!(t_lo <= t_hi)) throw InvalidArgument("bracket", "t_lo must not exceed t_hi");
  RefineResult out;
  double best_f = std::numeric_limits<double>::infinity();
  auto f = [&](double t) {
    ++out.evaluations;
    const double v = std::norm(eval(t).value);
    if (v < best_f) {
      best_f = v;
      out.t = t;
    }
    return v;
  };

  const double f_lo = f(t_lo);
  const double f_hi = f(t_hi);
  const double f_mid = f((t_lo + t_hi) / 2.0);
  out.bracketed = f_mid <= f_lo && f_mid <= f_hi;
  if (out.bracketed) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = t_lo, b = t_hi;
    double c = b - (b - a) * inv_phi;
    double d = a + (b - a) * inv_phi;
    double fc = f(c), fd = f(d);
    for (int iter = 0; iter < 200 && (b - a) > tol; ++iter) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - (b - a) * inv_phi;
        fc = f(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + (b - a) * inv_phi;
        fd = f(d);
      }
    }
  }
  out.abs_g = std::sqrt(best_f);
  return out;
}

RefineResult refine_min(const FiniteSet& s, double t_lo, double t_hi, double tol) {
  return refine_min([&s](double t) { return s.evaluate(t); }, t_lo, t_hi, tol);
}

ScanReport scan(const Evaluator& eval, double lipschitz, double t0, double t1, double h, const ScanOptions& opt) {
  if (!std::isfinite(t0) || !std::isfinite(t1) || !(t0 < t1)) throw InvalidArgument("interval", "need finite t0 < t1");
  if (!(h > 0) || !std::isfinite(h)) throw InvalidArgument("h", "grid step must be > 0");
  if (!(opt.h_min > 0)) throw InvalidArgument("h_min", "must be > 0");
  const double cells_d = std::ceil((t1 - t0) / h);
  if (cells_d > 2e9) throw InvalidArgument("h", "grid has too many cells");
  const auto cells = std::max<std::size_t>(1, static_cast<std::size_t>(cells_d));

  // t0 (J-j)/J + t1 j/J: mirrors exactly under (t0, t1) -> (-t1, -t0).
  auto grid_t = [&](std::size_t j) {
    if (j == 0) return t0;
    if (j == cells) return t1;
    return t0 * (static_cast<double>(cells - j) / static_cast<double>(cells)) +
           t1 * (static_cast<double>(j) / static_cast<double>(cells));
  };

  ScanReport rep;
  rep.t0 = t0;
  rep.t1 = t1;
  rep.grid_step = h;
  rep.effective_step = (t1 - t0) / static_cast<double>(cells);
  rep.h_min = opt.h_min;
  rep.lipschitz_L = lipschitz;

  const unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  std::vector<CertifiedSum> values(cells + 1);
  run_chunks(cells + 1, threads, [&](unsigned, std::size_t lo, std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) values[j] = eval(grid_t(j));
  });
  rep.evaluations = cells + 1;

  Extremum min;
  for (std::size_t j = 0; j <= cells; ++j) {
    min.offer(abs_g(values[j]), grid_t(j));
    rep.max_eval_err = std::max(rep.max_eval_err, values[j].err);
  }
  if (opt.keep_samples) {
    rep.samples.reserve(cells + 1);
    for (std::size_t j = 0; j <= cells; ++j) rep.samples.push_back({grid_t(j), values[j].value});
  }

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::size_t>(cells, 1u << 16))));
  std::vector<Partial> partials(workers);
  run_chunks(cells, workers, [&](unsigned k, std::size_t lo, std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) {
      certify_cell(eval, lipschitz, opt, {grid_t(j), grid_t(j + 1), values[j], values[j + 1]}, partials[k]);
    }
  });
  for (const Partial& p : partials) {
    rep.uncertified_cells.insert(rep.uncertified_cells.end(), p.bad.begin(), p.bad.end());
    rep.evaluations += p.evaluations;
    rep.bisections += p.bisections;
    rep.max_eval_err = std::max(rep.max_eval_err, p.max_err);
    min.offer(p.min.value, p.min.t);
  }
  rep.certified_zero_free = rep.uncertified_cells.empty();

  const double lo = std::max(t0, min.t - rep.effective_step);
  const double hi = std::min(t1, min.t + rep.effective_step);
  const RefineResult refined = refine_min(eval, lo, hi, opt.refine_tol);
  rep.evaluations += refined.evaluations;
  min.offer(refined.abs_g, refined.t);
  rep.min_abs_g = min.value;
  rep.argmin_t = min.t;
  return rep;
}

ScanReport scan(const FiniteSet& s, double t0, double t1, double h, const ScanOptions& options) {
  return scan([&s](double t) { return s.evaluate(t); }, s.lipschitz(), t0, t1, h, options);
}

ScanReport scan(const BlockSeries& s, double t0, double t1, double h, const ScanOptions& options) {
  return scan([&s](double t) { return s.evaluate(t); }, s.lipschitz(), t0, t1, h, options);
}

std::string scan_report_json(const ScanReport& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (const Cell& c : r.uncertified_cells) cells.push_back({c.lo, c.hi});
  const nlohmann::json doc = {
      {"interval", {r.t0, r.t1}},
      {"grid_step", r.grid_step},
      {"effective_step", r.effective_step},
      {"h_min", r.h_min},
      {"lipschitz_L", r.lipschitz_L},
      {"min_abs_g", r.min_abs_g},
      {"argmin_t", r.argmin_t},
      {"certified_zero_free", r.certified_zero_free},
      {"uncertified_cells", std::move(cells)},
      {"evaluations", r.evaluations},
      {"bisections", r.bisections},
      {"max_eval_err", r.max_eval_err},
  };
  return doc.dump(2) + "\n";
}

void write_scan_csv(std::ostream& out, const ScanReport& report) {
  out << "t,re_g,im_g,abs_g\n";
  for (const Sample& s : report.samples) {
    out << format_double(s.t) << ',' << format_double(s.g.real()) << ',' << format_double(s.g.imag()) << ','
        << format_double(std::abs(s.g)) << '\n';
  }
}

}  // namespace twisted
