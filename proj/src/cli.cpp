#include "twisted/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "twisted/construct.hpp"
#include "twisted/errors.hpp"
#include "twisted/numeric.hpp"
#include "twisted/scanner.hpp"
#include "twisted/setrep.hpp"

namespace twisted::cli {
namespace {

constexpr double kMaxStartDigits = 1e4;

Complex parse_complex(const std::string& field, const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos || text.find(',', comma + 1) != std::string::npos) {
    throw InvalidArgument(field, "expected \"re,im\", got \"" + text + "\"");
  }
  try {
    return {parse_double(text.substr(0, comma)), parse_double(text.substr(comma + 1))};
  } catch (const FormatError& e) {
    throw InvalidArgument(field, e.what());
  }
}

double parse_real(const std::string& field, const std::string& text) {
  try {
    return parse_double(text);
  } catch (const FormatError& e) {
    throw InvalidArgument(field, e.what());
  }
}

SumOptions sum_options_from_env() {
  SumOptions sums;
  if (const char* cap = std::getenv(kDirectCapEnv); cap && *cap) {
    const double v = parse_real(kDirectCapEnv, cap);
    if (!(v >= 1) || v > 1e15 || v != std::floor(v)) throw InvalidArgument(kDirectCapEnv, "must be an integer in [1, 1e15]");
    sums.direct_cap = static_cast<std::uint64_t>(v);
  }
  return sums;
}

// Flags shared by construct, verify and demo967. Values stay strings until
// validated so every rejection can name its flag.
struct SpecFlags {
  std::string t = "1";
  std::string lambda = "0,0";
  std::string epsilon = "1e-9";
  std::string n0 = "2";
  std::string rho;
  std::string delta;
  std::size_t max_blocks = 10'000;
  bool detour = false;

  void add(CLI::App& app, bool with_lambda = true) {
    app.add_option("--t", t, "twist t (nonzero)")->capture_default_str();
    if (with_lambda) app.add_option("--lambda", lambda, "target as re,im")->capture_default_str();
    app.add_option("--epsilon", epsilon, "stop once |residual| <= epsilon")->capture_default_str();
    app.add_option("--n0", n0, "every element is >= n0")->capture_default_str();
    auto* rho_opt = app.add_option("--rho", rho, "correction cap (default: the clamp radius)");
    auto* delta_opt = app.add_option("--delta", delta, "choose rho so the harmonic mass stays below |lambda| + delta");
    rho_opt->excludes(delta_opt);
    app.add_option("--max-blocks", max_blocks, "give up after this many blocks")->capture_default_str();
    app.add_flag("--detour", detour, "for lambda = 0, emit one block first");
  }

  TargetSpec build() const {
    const double tv = parse_real("--t", t);
    if (tv == 0.0) {
      throw InvalidArgument("--t", "must be nonzero; at t = 0 every term is a positive real and only positive real targets are reachable");
    }
    TargetSpec spec;
    spec.t = tv;
    spec.lambda = parse_complex("--lambda", lambda);
    spec.epsilon = parse_real("--epsilon", epsilon);
    try {
      spec.floor = parse_decimal(n0);
    } catch (const FormatError& e) {
      throw InvalidArgument("--n0", e.what());
    }
    if (!std::isfinite(tv)) throw InvalidArgument("--t", "must be finite");
    if (!rho.empty()) {
      spec.rho = parse_real("--rho", rho);
    } else if (!delta.empty()) {
      const double d = parse_real("--delta", delta);
      if (!(d > 0) || !std::isfinite(d)) throw InvalidArgument("--delta", "must be finite and > 0");
      spec.rho = budget_rho(tv, spec.lambda, d);
    } else {
      spec.rho = clamp_radius(tv);
    }
    spec.max_blocks = max_blocks;
    spec.detour = detour;
    spec.sums = sum_options_from_env();
    try {
      spec.validate();
    } catch (const InvalidArgument& e) {
      static const std::pair<const char*, const char*> names[] = {
          {"floor", "--n0"}, {"max_blocks", "--max-blocks"}, {"lambda", "--lambda"},
          {"epsilon", "--epsilon"}, {"rho", "--rho"}, {"t", "--t"}};
      std::string flag = e.field();
      for (const auto& [field, name] : names) {
        if (flag == field) flag = name;
      }
      throw InvalidArgument(flag, std::string(e.what()).substr(e.field().size() + 2));
    }
    return spec;
  }
};

void check_growth(const TargetSpec& spec, bool allow_huge) {
  const double digits = predicted_start_digits(spec);
  if (digits > kMaxStartDigits && !allow_huge) {
    throw InvalidArgument("--t", "block starts may need about " + format_double(std::round(digits)) +
                                     " decimal digits; pass --allow-huge to run anyway");
  }
}

std::string sci(double x) {
  std::ostringstream s;
  s.precision(6);
  s << std::scientific << x;
  return s.str();
}

int parse_args(CLI::App& app, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << app.get_name() << ": " << e.what() << "\n";
    return kUsage;
  }
  return -1;
}

template <class Body>
int guarded(std::ostream& err, const std::string& name, Body&& body) {
  try {
    return body();
  } catch (const InvalidArgument& e) {
    err << name << ": " << e.what() << "\n";
    return kUsage;
  } catch (const FormatError& e) {
    err << name << ": " << e.what() << "\n";
    return kFailure;
  } catch (const AuditFailure& e) {
    err << name << ": audit failed: " << e.what() << "\n";
    return kFailure;
  } catch (const Error& e) {
    err << name << ": " << e.what() << "\n";
    return kFailure;
  }
}

void print_checks(const VerifyReport& rep, std::ostream& out) {
  for (const Check& c : rep.checks) out << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
}

}  // namespace

int cmd_construct(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Build a set whose twisted harmonic sum hits a complex target", "construct");
  SpecFlags flags;
  flags.add(app);
  std::string out_path, report_path;
  bool allow_huge = false;
  app.add_option("--out", out_path, "write the block set JSON here");
  app.add_option("--report", report_path, "write the per-block report JSON here");
  app.add_flag("--allow-huge", allow_huge, "run even when block starts may exceed 10^4 digits");
  if (int rc = parse_args(app, args, out, err); rc >= 0) return rc;

  return guarded(err, "construct", [&] {
    const TargetSpec spec = flags.build();
    check_growth(spec, allow_huge);
    const Construction result = construct(spec);
    if (!out_path.empty()) write_file(out_path, save(result.set));
    if (!report_path.empty()) write_file(report_path, report_json(result, spec));

    const CertifiedSum total = result.set.total_sum();
    out << "blocks: " << result.set.blocks().size() << "\n";
    out << "harmonic mass: " << format_double(result.set.total_mass().value.real()) << " +- "
        << sci(result.set.total_mass().err) << "\n";
    out << "|lambda - sum| <= residual + err: " << sci(std::abs(spec.lambda - total.value)) << " <= "
        << sci(std::abs(result.residual)) << " + " << sci(total.err) << "\n";
    if (!result.report.converged) {
      err << "construct: did not reach epsilon " << format_double(spec.epsilon) << " within " << spec.max_blocks
          << " blocks\n";
      return static_cast<int>(kNotConverged);
    }
    return static_cast<int>(kOk);
  });
}

int cmd_verify(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Audit a persisted block set against its target", "verify");
  SpecFlags flags;
  flags.add(app);
  std::string in_path;
  bool no_replay = false;
  app.add_option("--in", in_path, "block set JSON")->required();
  app.add_flag("--no-replay", no_replay, "skip the check that construct would emit exactly these blocks");
  app.get_option("--t")->description("twist t (default: the set's own t)");
  if (int rc = parse_args(app, args, out, err); rc >= 0) return rc;

  return guarded(err, "verify", [&] {
    const BlockSet set = load(read_file(in_path));
    if (app.count("--t") == 0) flags.t = format_double(set.t());
    const TargetSpec spec = flags.build();
    const VerifyReport rep = verify(set, spec, !no_replay);
    print_checks(rep, out);
    out << "|lambda - sum| = " << sci(rep.distance) << " +- " << sci(rep.distance_err) << "\n";
    out << (rep.ok() ? "verified\n" : "NOT verified\n");
    return static_cast<int>(rep.ok() ? kOk : kFailure);
  });
}

int cmd_scan(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Scan |1 + sum n^(-1-it)| over a t-interval for zeros", "scan");
  app.set_help_flag("--help", "print this help");
  std::string set_text, blocks_path, t0, t1, h = "1e-3", csv_path, report_path;
  ScanOptions opt;
  std::string h_min = "1e-12";
  bool require_certified = false;
  auto* set_opt = app.add_option("--set", set_text, "finite set, \"2,3,5\" or \"[2,3,5]\"");
  auto* blocks_opt = app.add_option("--blocks", blocks_path, "block set JSON from construct");
  set_opt->excludes(blocks_opt);
  app.add_option("--t0", t0, "interval start")->required();
  app.add_option("--t1", t1, "interval end")->required();
  app.add_option("--h", h, "grid step")->capture_default_str();
  app.add_option("--h-min", h_min, "bisection floor")->capture_default_str();
  app.add_option("--threads", opt.threads, "worker threads (0: all cores)");
  app.add_option("--csv", csv_path, "write t,re_g,im_g,abs_g for every grid point");
  app.add_option("--report", report_path, "write the scan report JSON here");
  app.add_flag("--require-certified", require_certified, "exit 2 unless the interval is certified zero-free");
  if (int rc = parse_args(app, args, out, err); rc >= 0) return rc;

  return guarded(err, "scan", [&] {
    if (set_text.empty() && blocks_path.empty() && app.count("--set") == 0) {
      throw InvalidArgument("--set", "one of --set or --blocks is required");
    }
    const double a = parse_real("--t0", t0), b = parse_real("--t1", t1);
    if (!(a < b)) throw InvalidArgument("--t1", "must exceed --t0");
    const double step = parse_real("--h", h);
    if (!(step > 0)) throw InvalidArgument("--h", "must be > 0");
    opt.h_min = parse_real("--h-min", h_min);
    if (!(opt.h_min > 0)) throw InvalidArgument("--h-min", "must be > 0");
    opt.keep_samples = !csv_path.empty();

    ScanReport rep;
    if (!blocks_path.empty()) {
      rep = scan(BlockSeries(load(read_file(blocks_path)), sum_options_from_env()), a, b, step, opt);
    } else {
      rep = scan(FiniteSet::parse(set_text), a, b, step, opt);
    }
    if (!csv_path.empty()) {
      std::ostringstream csv;
      write_scan_csv(csv, rep);
      write_file(csv_path, csv.str());
    }
    if (!report_path.empty()) write_file(report_path, scan_report_json(rep));

    out << "interval: [" << format_double(rep.t0) << ", " << format_double(rep.t1) << "], step "
        << format_double(rep.effective_step) << ", L = " << format_double(rep.lipschitz_L) << "\n";
    out << "min |g| = " << format_double(rep.min_abs_g) << " at t = " << format_double(rep.argmin_t) << "\n";
    out << "evaluations: " << rep.evaluations << ", bisections: " << rep.bisections << "\n";
    out << "certified zero-free: " << (rep.certified_zero_free ? "yes" : "no") << "\n";
    for (const Cell& c : rep.uncertified_cells) {
      out << "uncertified: [" << format_double(c.lo) << ", " << format_double(c.hi) << "]\n";
    }
    return static_cast<int>(require_certified && !rep.certified_zero_free ? kFailure : kOk);
  });
}

int cmd_demo967(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Build S with 1 + sum_{n in S} n^(-1-it) = 0 up to epsilon, verify it, and evaluate", "demo967");
  SpecFlags flags;
  flags.add(app, false);
  flags.lambda = "-1,0";
  std::string out_path, report_path;
  bool allow_huge = false;
  app.add_option("--out", out_path, "write the block set JSON here");
  app.add_option("--report", report_path, "write the per-block report JSON here");
  app.add_flag("--allow-huge", allow_huge, "run even when block starts may exceed 10^4 digits");
  if (int rc = parse_args(app, args, out, err); rc >= 0) return rc;

  return guarded(err, "demo967", [&] {
    const TargetSpec spec = flags.build();
    check_growth(spec, allow_huge);
    const Construction result = construct(spec);
    if (!out_path.empty()) write_file(out_path, save(result.set));
    if (!report_path.empty()) write_file(report_path, report_json(result, spec));

    const VerifyReport rep = verify(result.set, spec);
    const CertifiedSum g = BlockSeries(result.set, spec.sums).evaluate(spec.t);
    const double bound = spec.epsilon + g.err;
    const bool holds = std::abs(g.value) <= bound;

    out << "t = " << format_double(spec.t) << ", rho = " << format_double(spec.rho) << ", r = "
        << format_double(clamp_radius(spec.t)) << ", epsilon = " << format_double(spec.epsilon) << "\n";
    for (const Block& b : result.set.blocks()) out << "block " << b.str() << "\n";
    out << "blocks: " << result.set.blocks().size() << ", harmonic mass: "
        << format_double(result.set.total_mass().value.real()) << "\n";
    print_checks(rep, out);
    out << "1 + sum = " << format_double(g.value.real()) << " + " << format_double(g.value.imag()) << "i\n";
    out << "|1 + sum| <= epsilon + err: " << sci(std::abs(g.value)) << " <= " << sci(spec.epsilon) << " + "
        << sci(g.err) << (holds ? "  holds" : "  FAILS") << "\n";
    if (!result.report.converged) return static_cast<int>(kNotConverged);
    return static_cast<int>(holds && rep.ok() ? kOk : kFailure);
  });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  static const char* usage =
      "usage: twisted <construct|verify|scan|demo967> [options]\n"
      "       twisted <subcommand> --help\n";
  if (args.empty()) {
    err << usage;
    return kUsage;
  }
  const std::vector<std::string> rest(args.begin() + 1, args.end());
  const std::string& sub = args.front();
  if (sub == "construct") return cmd_construct(rest, out, err);
  if (sub == "verify") return cmd_verify(rest, out, err);
  if (sub == "scan") return cmd_scan(rest, out, err);
  if (sub == "demo967") return cmd_demo967(rest, out, err);
  if (sub == "--help" || sub == "-h") {
    out << usage;
    return kOk;
  }
  err << "unknown subcommand \"" << sub << "\"\n" << usage;
  return kUsage;
}

}  // namespace twisted::cli
