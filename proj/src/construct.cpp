#include "twisted/construct.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "twisted/errors.hpp"

namespace twisted {
namespace {

constexpr std::size_t kMaxPhaseCandidates = 1'000'000;
// Multiplier applied to certified error bounds when auditing inequalities.
constexpr double kSlackFactor = 10.0;

// floor(x * v) computed exactly for finite v > 0.
BigInt floor_times(const BigInt& x, double v) {
  int e = 0;
  const double f = std::frexp(v, &e);
  const BigInt mantissa(static_cast<std::int64_t>(std::ldexp(f, 53)));
  const int shift = e - 53;
  const BigInt p = x * mantissa;
  return shift >= 0 ? BigInt(p << shift) : BigInt(p >> -shift);
}

// Representative of x mod 2pi in (-pi, pi].
ExtFloat wrap_signed(ExtFloat x) {
  const ExtFloat two_pi = ext_two_pi();
  const ExtFloat pi = two_pi / 2;
  x -= boost::multiprecision::floor(x / two_pi) * two_pi;
  if (x > pi) x -= two_pi;
  return x;
}

ExtFloat wrap_unsigned(ExtFloat x) {
  const ExtFloat two_pi = ext_two_pi();
  x -= boost::multiprecision::floor(x / two_pi) * two_pi;
  if (x < 0) x += two_pi;
  if (x >= two_pi) x -= two_pi;
  return x;
}

double lemma_constant(double t) { return 1.0 + std::hypot(1.0, t); }

StepResult advance(const ConstructionState& state, const TargetSpec& spec, Complex c, bool detour) {
  StepResult out{state, {}};
  StepRecord& rec = out.record;
  rec.k = state.k;
  rec.c = c;
  rec.detour = detour;
  rec.lambda_before = state.lambda_k;
  rec.lambda_after = state.lambda_k;
  out.state.k = state.k + 1;
  if (c == Complex{}) return out;

  rec.lemma = lemma_block(state.next_floor, c, spec.t, spec.sums);
  const LemmaBlock& lem = rec.lemma;
  const Complex next = state.lambda_k - lem.sum.value;
  const double rounding = 2.0 * kEps * (std::abs(state.lambda_k) + std::abs(lem.sum.value));
  rec.lambda_after = next;
  rec.slack = kSlackFactor * lem.sum.err + lem.angular_slack + rounding;

  out.state.lambda_k = next;
  out.state.next_floor = lem.block->end();
  out.state.c_history.push_back(std::abs(c));
  out.state.err_budget = state.err_budget + lem.sum.err + rounding;

  if (!detour) {
    const double before = std::abs(state.lambda_k);
    rec.decrease_margin = before - std::abs(c) / 2 + rec.slack - std::abs(next);
    if (rec.decrease_margin < 0) {
      throw AuditFailure("step " + std::to_string(state.k) + ": residual fell from " + format_double(before) +
                         " to " + format_double(std::abs(next)) + ", less than |c|/2 = " +
                         format_double(std::abs(c) / 2));
    }
  }
  return out;
}

}  // namespace

double clamp_radius(double t) { return 1.0 / (2.0 + 2.0 * std::hypot(1.0, t)); }

Complex clamp(Complex lambda_k, double rho) {
  const double m = std::abs(lambda_k);
  if (m <= rho) return lambda_k;
  return lambda_k * (rho / m);
}

double budget_rho(double t, Complex lambda, double delta) {
  if (!(delta > 0)) throw InvalidArgument("delta", "must be > 0");
  const double r = clamp_radius(t);
  return std::min(r, 2.0 * r * delta / (std::abs(lambda) + delta));
}

TargetSpec TargetSpec::standard(double t, Complex lambda) {
  TargetSpec spec;
  spec.t = t;
  spec.lambda = lambda;
  spec.rho = clamp_radius(t);
  return spec;
}

void TargetSpec::validate() const {
  if (!std::isfinite(t)) throw InvalidArgument("t", "must be finite");
  if (t == 0.0) throw InvalidArgument("t", "must be nonzero; the construction requires t != 0");
  if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag())) {
    throw InvalidArgument("lambda", "must be finite");
  }
  if (!(epsilon > 0) || !std::isfinite(epsilon)) throw InvalidArgument("epsilon", "must be finite and > 0");
  if (floor < 2) throw InvalidArgument("floor", "must be >= 2");
  const double r = clamp_radius(t);
  if (!(rho > 0) || rho > r) {
    throw InvalidArgument("rho", "must satisfy 0 < rho <= " + format_double(r) + ", got " + format_double(rho));
  }
  if (max_blocks == 0) throw InvalidArgument("max_blocks", "must be >= 1");
}

LemmaBlock lemma_block(const BigInt& floor, Complex c, double t, const SumOptions& sums) {
  if (floor < 2) throw InvalidArgument("floor", "must be >= 2");
  if (t == 0.0) throw InvalidArgument("t", "must be nonzero");
  LemmaBlock out;
  if (c == Complex{}) return out;

  const double mod_c = std::abs(c);
  out.correction_abs = mod_c;
  const ExtFloat inv = ExtFloat(1) / ExtFloat(mod_c);
  const BigInt raised = std::max({floor, ceil_to_int(inv * inv), ceil_to_int(inv)});

  // Travel along the phase circle from raised to the first x with x^{-it} parallel to c.
  // The phase -t ln x decreases in x for t > 0 and increases for t < 0.
  const ExtFloat target = wrap_unsigned(ExtFloat(std::arg(c)));
  const ExtFloat start_phase = phase_ext(raised, t);
  const ExtFloat travel = wrap_unsigned(t > 0 ? start_phase - target : target - start_phase);
  const ExtFloat abs_t = std::abs(t);
  const double tolerance = std::abs(t) * mod_c * mod_c;

  std::optional<BigInt> chosen;
  ExtFloat offset;
  for (std::size_t m = 0; m < kMaxPhaseCandidates && !chosen; ++m) {
    const ExtFloat ideal = ExtFloat(raised) * boost::multiprecision::exp((travel + ext_two_pi() * m) / abs_t);
    BigInt x = std::max(round_to_int(ideal), raised);
    offset = wrap_signed(phase_ext(x, t) - target);
    if (boost::multiprecision::abs(offset) <= tolerance) chosen = std::move(x);
  }
  if (!chosen) throw AuditFailure("no block start with matching phase found above " + to_decimal(raised));

  const BigInt len = floor_times(*chosen, mod_c);
  if (len < 1) throw AuditFailure("block length floor(x|c|) is zero");
  out.block.emplace(*chosen, len);
  out.sum = interval_sum(*chosen, len, t, sums);
  out.mass = harmonic_mass(*chosen, len, sums);
  out.phase_offset = offset.convert_to<double>();
  out.angular_slack = mod_c * (std::abs(out.phase_offset) + kExtPhaseErr);

  out.mass_margin = mod_c + kSlackFactor * out.mass.err - out.mass.value.real();
  const double bound = lemma_constant(t) * mod_c * mod_c + out.angular_slack + kSlackFactor * out.sum.err;
  out.approx_margin = bound - std::abs(c - out.sum.value);

  if (out.mass_margin < 0) {
    throw AuditFailure("block " + out.block->str() + ": harmonic mass " + format_double(out.mass.value.real()) +
                       " exceeds |c| = " + format_double(mod_c));
  }
  if (out.approx_margin < 0) {
    throw AuditFailure("block " + out.block->str() + ": |c - sum| = " + format_double(std::abs(c - out.sum.value)) +
                       " exceeds bound " + format_double(bound));
  }
  return out;
}

ConstructionState initial_state(const TargetSpec& spec) {
  ConstructionState s;
  s.lambda_k = spec.lambda;
  s.next_floor = spec.floor;
  return s;
}

StepResult step(const ConstructionState& state, const TargetSpec& spec) {
  return advance(state, spec, clamp(state.lambda_k, spec.rho), false);
}

Construction construct(const TargetSpec& spec) {
  spec.validate();
  ConstructionState state = initial_state(spec);
  BlockSet set(spec.t);
  ConstructionReport report;

  auto emit = [&](StepResult r) {
    if (r.record.lemma.block) {
      set = append_block(std::move(set), *r.record.lemma.block, r.record.lemma.sum, r.record.lemma.mass);
    }
    report.total_slack += r.record.slack;
    report.steps.push_back(std::move(r.record));
    state = std::move(r.state);
  };

  double detour_mass = 0.0;
  if (spec.detour && spec.lambda == Complex{}) {
    emit(advance(state, spec, Complex(spec.rho, 0.0), true));
    report.detour_used = true;
    detour_mass = set.total_mass().value.real();
  }

  const double start_abs = std::abs(state.lambda_k);
  while (std::abs(state.lambda_k) > spec.epsilon && report.steps.size() < spec.max_blocks) {
    if (std::abs(state.lambda_k) > spec.rho) ++report.large_steps;
    const double c_abs = std::abs(clamp(state.lambda_k, spec.rho));
    emit(step(state, spec));
    report.sum_abs_c += c_abs;
  }

  report.converged = std::abs(state.lambda_k) <= spec.epsilon;
  report.err_budget = state.err_budget;
  report.large_step_limit = static_cast<std::size_t>(std::ceil(2.0 * start_abs / spec.rho));

  if (report.large_steps > report.large_step_limit) {
    throw AuditFailure(std::to_string(report.large_steps) + " steps ran with |lambda_k| > rho; at most " +
                       std::to_string(report.large_step_limit) + " allowed");
  }
  if (report.sum_abs_c > 2.0 * start_abs + 2.0 * report.total_slack) {
    throw AuditFailure("sum of |c_k| = " + format_double(report.sum_abs_c) + " exceeds 2|lambda|");
  }
  const double keep = 1.0 - spec.rho / (2.0 * clamp_radius(spec.t));
  report.mass_bound = detour_mass + (start_abs + report.total_slack) / keep + kSlackFactor * set.total_mass().err;
  if (set.total_mass().value.real() > report.mass_bound) {
    throw AuditFailure("total harmonic mass " + format_double(set.total_mass().value.real()) +
                       " exceeds budget " + format_double(report.mass_bound));
  }

  Complex residual = state.lambda_k;
  return {std::move(set), residual, std::move(report)};
}

std::string report_json(const Construction& result, const TargetSpec& spec) {
  using nlohmann::json;
  json blocks = json::array();
  for (const auto& s : result.report.steps) {
    json rec = {
        {"k", s.k},
        {"c_re", s.c.real()},
        {"c_im", s.c.imag()},
        {"detour", s.detour},
        {"lambda_abs_before", std::abs(s.lambda_before)},
        {"lambda_abs_after", std::abs(s.lambda_after)},
        {"decrease_margin", s.decrease_margin},
    };
    if (s.lemma.block) {
      rec["start"] = to_decimal(s.lemma.block->start());
      rec["len"] = to_decimal(s.lemma.block->len());
      rec["sum_re"] = s.lemma.sum.value.real();
      rec["sum_im"] = s.lemma.sum.value.imag();
      rec["sum_err"] = s.lemma.sum.err;
      rec["mass"] = s.lemma.mass.value.real();
      rec["mass_err"] = s.lemma.mass.err;
      rec["phase_offset"] = s.lemma.phase_offset;
      rec["lemma_margin_1"] = s.lemma.mass_margin;
      rec["lemma_margin_2"] = s.lemma.approx_margin;
    }
    blocks.push_back(std::move(rec));
  }
  const auto& rep = result.report;
  const json doc = {
      {"spec",
       {{"t", spec.t},
        {"lambda_re", spec.lambda.real()},
        {"lambda_im", spec.lambda.imag()},
        {"epsilon", spec.epsilon},
        {"n0", to_decimal(spec.floor)},
        {"rho", spec.rho},
        {"clamp_radius", clamp_radius(spec.t)},
        {"max_blocks", spec.max_blocks},
        {"detour", spec.detour}}},
      {"blocks", std::move(blocks)},
      {"totals",
       {{"block_count", result.set.blocks().size()},
        {"converged", rep.converged},
        {"residual_re", result.residual.real()},
        {"residual_im", result.residual.imag()},
        {"residual_abs", std::abs(result.residual)},
        {"err_budget", rep.err_budget},
        {"certified_bound", std::abs(result.residual) + rep.err_budget},
        {"sum_abs_c", rep.sum_abs_c},
        {"total_mass", result.set.total_mass().value.real()},
        {"total_mass_err", result.set.total_mass().err},
        {"mass_bound", rep.mass_bound},
        {"large_steps", rep.large_steps},
        {"large_step_limit", rep.large_step_limit},
        {"detour_used", rep.detour_used}}},
  };
  return doc.dump(2) + "\n";
}

double predicted_start_digits(const TargetSpec& spec) {
  const double lam = std::max(std::abs(spec.lambda), spec.detour ? spec.rho : 0.0);
  if (lam <= spec.epsilon) return std::log10(to_double(spec.floor));
  const double steps = std::ceil(2.0 * lam / spec.rho) + std::ceil(std::log2(std::max(1.0, spec.rho / spec.epsilon))) + 2;
  const double per_step = (kTwoPi / std::abs(spec.t) + std::log1p(spec.rho)) / std::log(10.0);
  const double floor_digits = std::max(std::log10(to_double(spec.floor)), 2.0 * std::log10(1.0 / spec.epsilon));
  return floor_digits + steps * per_step;
}

bool VerifyReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

VerifyReport verify(const BlockSet& set, const TargetSpec& spec, bool replay) {
  spec.validate();
  VerifyReport rep;
  auto add = [&](std::string name, bool pass, std::string detail) {
    rep.checks.push_back({std::move(name), pass, std::move(detail)});
  };

  add("t matches", set.t() == spec.t, "set t = " + format_double(set.t()) + ", spec t = " + format_double(spec.t));

  bool ordered = true;
  std::string order_detail = "blocks are increasing and disjoint";
  for (std::size_t i = 0; i < set.blocks().size(); ++i) {
    const Block& b = set.blocks()[i];
    if (b.start() < 2 || b.len() < 1 || (i > 0 && b.start() < set.blocks()[i - 1].end())) {
      ordered = false;
      order_detail = "block " + std::to_string(i) + " " + b.str() + " breaks ordering";
      break;
    }
  }
  add("disjoint", ordered, order_detail);

  const bool above_floor = set.empty() || set.blocks().front().start() >= spec.floor;
  add("floor", above_floor, "every element >= " + to_decimal(spec.floor));

  for (const Block& b : set.blocks()) {
    rep.recomputed_sum = rep.recomputed_sum + interval_sum(b.start(), b.len(), spec.t, spec.sums);
    rep.recomputed_mass = rep.recomputed_mass + harmonic_mass(b.start(), b.len(), spec.sums);
  }

  const double sum_gap = std::abs(set.total_sum().value - rep.recomputed_sum.value);
  const double sum_allow = kSlackFactor * (set.total_sum().err + rep.recomputed_sum.err);
  add("stored sum", sum_gap <= sum_allow,
      "|stored - recomputed| = " + format_double(sum_gap) + " (allowed " + format_double(sum_allow) + ")");

  const double mass_gap = std::abs(set.total_mass().value.real() - rep.recomputed_mass.value.real());
  const double mass_allow = kSlackFactor * (set.total_mass().err + rep.recomputed_mass.err);
  add("stored mass", mass_gap <= mass_allow,
      "|stored - recomputed| = " + format_double(mass_gap) + " (allowed " + format_double(mass_allow) + ")");

  rep.distance = std::abs(spec.lambda - rep.recomputed_sum.value);
  rep.distance_err = rep.recomputed_sum.err + 2.0 * kEps * (std::abs(spec.lambda) + std::abs(rep.recomputed_sum.value));
  add("target", rep.distance <= spec.epsilon + rep.distance_err,
      "|lambda - sum| = " + format_double(rep.distance) + " <= " + format_double(spec.epsilon) + " + " +
          format_double(rep.distance_err));

  if (replay) {
    try {
      const Construction fresh = construct(spec);
      const auto& expect = fresh.set.blocks();
      const auto& got = set.blocks();
      std::string detail = "blocks match the deterministic construction";
      bool same = expect.size() == got.size();
      if (!same) detail = "expected " + std::to_string(expect.size()) + " blocks, found " + std::to_string(got.size());
      for (std::size_t i = 0; same && i < got.size(); ++i) {
        if (!(expect[i] == got[i])) {
          same = false;
          detail = "block " + std::to_string(i) + " is " + got[i].str() + ", expected " + expect[i].str();
        }
      }
      add("replay", same, detail);
    } catch (const AuditFailure& e) {
      add("replay", false, e.what());
    }
  }
  return rep;
}

}  // namespace twisted
