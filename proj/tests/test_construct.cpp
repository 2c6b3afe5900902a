#include <cmath>
#include <random>

#include "doctest.h"
#include "twisted/construct.hpp"
#include "twisted/errors.hpp"

using namespace twisted;

namespace {

std::complex<long double> brute_sum(std::uint64_t a, std::uint64_t len, long double t) {
  std::complex<long double> s = 0;
  for (std::uint64_t n = a; n < a + len; ++n) s += std::polar(1.0L / n, -t * std::log(static_cast<long double>(n)));
  return s;
}

long double brute_mass(std::uint64_t a, std::uint64_t len) {
  long double s = 0;
  for (std::uint64_t n = a; n < a + len; ++n) s += 1.0L / n;
  return s;
}

std::string shift_start(const std::string& doc, const BigInt& start, int delta) {
  const std::string from = "\"start\": \"" + to_decimal(start) + "\"";
  const std::string to = "\"start\": \"" + to_decimal(start + delta) + "\"";
  std::string out = doc;
  const auto pos = out.find(from);
  REQUIRE(pos != std::string::npos);
  out.replace(pos, from.size(), to);
  return out;
}

}  // namespace

TEST_CASE("clamp_radius") {
  CHECK(clamp_radius(0.0) == 0.25);
  CHECK(clamp_radius(1.0) == doctest::Approx(0.20710678118654752440).epsilon(1e-15));
  CHECK(clamp_radius(-1.0) == clamp_radius(1.0));
  double prev = clamp_radius(0.0);
  for (double t = 0.5; t < 1e6; t *= 2) {
    const double r = clamp_radius(t);
    CHECK(r < prev);
    prev = r;
  }
  CHECK(prev < 1e-6);
}

TEST_CASE("clamp") {
  CHECK(clamp({0.1, 0.0}, 0.2) == Complex(0.1, 0.0));
  const Complex big = clamp({1.0, 0.0}, 0.2071);
  CHECK(big.real() == doctest::Approx(0.2071));
  CHECK(big.imag() == 0.0);
  CHECK(clamp({}, 0.2) == Complex{});
  const Complex z(-3.0, 4.0);
  const Complex c = clamp(z, 0.25);
  CHECK(std::abs(c) == doctest::Approx(0.25));
  CHECK(std::arg(c) == doctest::Approx(std::arg(z)));
}

TEST_CASE("budget_rho") {
  const double r = clamp_radius(1.0);
  const double rho = budget_rho(1.0, {-1.0, 0.0}, 0.05);
  CHECK(rho == doctest::Approx(2 * r * 0.05 / 1.05));
  // the resulting mass budget is exactly |lambda| + delta
  CHECK(1.0 / (1.0 - rho / (2 * r)) == doctest::Approx(1.05));
  CHECK(budget_rho(1.0, {-1.0, 0.0}, 100.0) == r);
  CHECK_THROWS_AS(budget_rho(1.0, {-1.0, 0.0}, 0.0), InvalidArgument);
}

TEST_CASE("TargetSpec validation names the field") {
  auto field_of = [](TargetSpec s) {
    try {
      s.validate();
    } catch (const InvalidArgument& e) {
      return e.field();
    }
    return std::string();
  };
  TargetSpec ok = TargetSpec::standard(1.0, {-1.0, 0.0});
  CHECK(field_of(ok).empty());
  TargetSpec s = ok;
  s.t = 0.0;
  CHECK(field_of(s) == "t");
  s = ok;
  s.epsilon = 0.0;
  CHECK(field_of(s) == "epsilon");
  s = ok;
  s.floor = 1;
  CHECK(field_of(s) == "floor");
  s = ok;
  s.rho = clamp_radius(1.0) * 1.01;
  CHECK(field_of(s) == "rho");
  s = ok;
  s.lambda = {NAN, 0.0};
  CHECK(field_of(s) == "lambda");
  s = ok;
  s.max_blocks = 0;
  CHECK(field_of(s) == "max_blocks");
}

TEST_CASE("lemma_block") {
  SUBCASE("c = 0 gives the empty block") {
    const LemmaBlock lb = lemma_block(2, {}, 1.0);
    CHECK(!lb.block);
    CHECK(lb.sum.value == Complex{});
    CHECK(lb.mass.value == Complex{});
  }

  SUBCASE("N = 2, c = 0.1, t = 1 against a brute-force sum") {
    const Complex c(0.1, 0.0);
    const LemmaBlock lb = lemma_block(2, c, 1.0);
    REQUIRE(lb.block);
    const auto x = lb.block->start().convert_to<std::uint64_t>();
    const auto s = lb.block->len().convert_to<std::uint64_t>();
    CHECK(x >= 100);
    CHECK(s == static_cast<std::uint64_t>(std::floor(0.1 * static_cast<double>(x))));
    CHECK(static_cast<double>(brute_mass(x, s)) <= 0.1);
    const auto exact = brute_sum(x, s, 1.0L);
    const double dist = static_cast<double>(std::abs(std::complex<long double>(0.1L, 0.0L) - exact));
    CHECK(dist <= (1 + std::sqrt(2.0)) * 0.01 + lb.angular_slack);
    // x^{-it} is parallel to c up to the integer-rounding angle |t|/x
    CHECK(std::abs(std::remainder(std::arg(term(x, 1.0)) - std::arg(c), kTwoPi)) <= 1.0 / x);
  }

  SUBCASE("floor raising") {
    const LemmaBlock lb = lemma_block(2, {0.0, 0.01}, 2.0);
    CHECK(lb.block->start() >= 10000);
    const LemmaBlock high = lemma_block(BigInt(1) << 70, {0.0, 0.01}, 2.0);
    CHECK(high.block->start() >= BigInt(1) << 70);
  }

  SUBCASE("randomized per-block audit against brute force, t = 1") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> angle(-M_PI, M_PI);
    std::uniform_real_distribution<double> modulus(0.02, clamp_radius(1.0));
    for (int i = 0; i < 12; ++i) {
      const Complex c = std::polar(modulus(rng), angle(rng));
      const LemmaBlock lb = lemma_block(2 + rng() % 100, c, 1.0);
      CHECK(lb.mass_margin >= 0);
      CHECK(lb.approx_margin >= 0);
      if (lb.block->len() <= 2'000'000 && lb.block->end() < kNativeLimit) {
        const auto x = lb.block->start().convert_to<std::uint64_t>();
        const auto s = lb.block->len().convert_to<std::uint64_t>();
        const double d = static_cast<double>(std::abs(std::complex<long double>(c.real(), c.imag()) - brute_sum(x, s, 1.0L)));
        CHECK(d <= (1 + std::sqrt(2.0)) * std::norm(c) + lb.angular_slack + 1e-12);
        CHECK(static_cast<double>(brute_mass(x, s)) <= std::abs(c) + 1e-15);
      }
    }
  }

  SUBCASE("negative t travels the phase circle the other way") {
    const Complex c = std::polar(0.05, 2.0);
    const LemmaBlock lb = lemma_block(2, c, -3.0);
    const double offset = std::remainder(phase(lb.block->start(), -3.0) - 2.0, kTwoPi);
    CHECK(std::abs(offset) <= 3.0 * 0.05 * 0.05);
    CHECK(lb.approx_margin >= 0);
  }

  CHECK_THROWS_AS(lemma_block(1, {0.1, 0.0}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(lemma_block(2, {0.1, 0.0}, 0.0), InvalidArgument);
}

TEST_CASE("step") {
  const TargetSpec spec = TargetSpec::standard(1.0, {-1.0, 0.0});
  const double r = spec.rho;

  SUBCASE("large residual drops by at least rho/2") {
    const ConstructionState s0 = initial_state(spec);
    const StepResult out = step(s0, spec);
    CHECK(std::abs(out.state.lambda_k) <= 1.0 - r / 2 + out.record.slack);
    CHECK(out.state.k == 2);
    CHECK(out.state.next_floor == out.record.lemma.block->end());
    CHECK(out.state.err_budget >= out.record.lemma.sum.err);
  }

  SUBCASE("small residual at least halves") {
    ConstructionState s0 = initial_state(spec);
    s0.lambda_k = {0.0, 0.1};
    const StepResult out = step(s0, spec);
    CHECK(std::abs(out.state.lambda_k) <= 0.05 + out.record.slack);
  }

  SUBCASE("zero residual emits nothing") {
    ConstructionState s0 = initial_state(spec);
    s0.lambda_k = {};
    const StepResult out = step(s0, spec);
    CHECK(!out.record.lemma.block);
    CHECK(out.state.k == 2);
    CHECK(out.state.lambda_k == Complex{});
    CHECK(out.state.next_floor == s0.next_floor);
  }
}

TEST_CASE("construct") {
  SUBCASE("lambda = 0 gives the empty set") {
    const Construction c = construct(TargetSpec::standard(1.0, {}));
    CHECK(c.set.empty());
    CHECK(c.residual == Complex{});
    CHECK(c.report.converged);
  }

  SUBCASE("lambda = -1, t = 1") {
    TargetSpec spec = TargetSpec::standard(1.0, {-1.0, 0.0});
    const Construction c = construct(spec);
    CHECK(c.report.converged);
    CHECK(std::abs(c.residual) <= 1e-9);
    const double r = spec.rho;
    const auto schedule = std::ceil(2.0 / r) + std::ceil(std::log2(r / 1e-9)) + 2;
    CHECK(static_cast<double>(c.set.blocks().size()) <= schedule);
    CHECK(c.report.large_steps <= c.report.large_step_limit);
    CHECK(c.report.sum_abs_c <= 2.0 + c.report.total_slack);
    // lambda_{k+1} = lambda_k - sum over block k, so the emitted sum is lambda - residual
    CHECK(std::abs(c.set.total_sum().value - (spec.lambda - c.residual)) <= c.set.total_sum().err + c.report.err_budget);
    for (const auto& s : c.report.steps) {
      CHECK(s.decrease_margin >= 0);
      CHECK(s.lemma.mass_margin >= 0);
      CHECK(s.lemma.approx_margin >= 0);
      if (std::abs(s.lambda_before) <= r) CHECK(std::abs(s.lambda_after) <= std::abs(s.lambda_before) / 2 + s.slack);
    }
  }

  SUBCASE("reduced rho keeps the harmonic budget") {
    TargetSpec spec = TargetSpec::standard(1.0, {-1.0, 0.0});
    spec.rho = clamp_radius(1.0) / 10;
    const Construction c = construct(spec);
    CHECK(c.report.converged);
    CHECK(c.set.total_mass().value.real() <= 1.0 / 0.95 + 1e-9);
  }

  SUBCASE("floor respected") {
    TargetSpec spec = TargetSpec::standard(2.0, {0.3, -0.4});
    spec.floor = 1'000'000;
    const Construction c = construct(spec);
    REQUIRE(!c.set.empty());
    CHECK(c.set.blocks().front().start() >= 1'000'000);
  }

  SUBCASE("determinism") {
    const TargetSpec spec = TargetSpec::standard(0.7, {-1.0, 0.5});
    const Construction a = construct(spec);
    const Construction b = construct(spec);
    CHECK(a.set == b.set);
    CHECK(save(a.set) == save(b.set));
    CHECK(report_json(a, spec) == report_json(b, spec));
  }

  SUBCASE("non-convergence is flagged") {
    TargetSpec spec = TargetSpec::standard(1.0, {-3.0, 0.0});
    spec.max_blocks = 2;
    const Construction c = construct(spec);
    CHECK(!c.report.converged);
    CHECK(c.set.blocks().size() == 2);
    CHECK(std::abs(c.residual) > spec.epsilon);
  }

  SUBCASE("detour gives a nonempty set for lambda = 0") {
    TargetSpec spec = TargetSpec::standard(1.0, {});
    spec.detour = true;
    const Construction c = construct(spec);
    CHECK(c.report.detour_used);
    CHECK(c.set.blocks().size() >= 2);
    CHECK(c.report.converged);
    CHECK(std::abs(c.set.total_sum().value) <= spec.epsilon + c.report.err_budget + c.set.total_sum().err);
  }

  SUBCASE("decay and budget across random targets") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 20; ++i) {
      double t = u(rng) * 3;
      if (std::abs(t) < 0.5) t = t < 0 ? -0.5 : 0.5;
      const TargetSpec spec = TargetSpec::standard(t, {u(rng), u(rng)});
      const Construction c = construct(spec);
      CHECK(c.report.converged);
      CHECK(c.report.large_steps <= c.report.large_step_limit);
      CHECK(c.set.total_mass().value.real() <= 2 * std::abs(spec.lambda) + 2 * c.report.total_slack + 1e-12);
    }
  }

  CHECK_THROWS_AS(construct(TargetSpec::standard(0.0, {-1.0, 0.0})), InvalidArgument);
}

TEST_CASE("report_json carries per-block records") {
  const TargetSpec spec = TargetSpec::standard(1.0, {-1.0, 0.0});
  const Construction c = construct(spec);
  const std::string doc = report_json(c, spec);
  for (const char* key : {"\"c_re\"", "\"c_im\"", "\"start\"", "\"len\"", "\"sum_re\"", "\"sum_im\"", "\"sum_err\"",
                          "\"mass\"", "\"lemma_margin_1\"", "\"lemma_margin_2\"", "\"certified_bound\""}) {
    CHECK(doc.find(key) != std::string::npos);
  }
}

TEST_CASE("predicted_start_digits") {
  const double moderate = predicted_start_digits(TargetSpec::standard(1.0, {-1.0, 0.0}));
  CHECK(moderate > 18);
  CHECK(moderate < 1000);
  CHECK(predicted_start_digits(TargetSpec::standard(0.01, {-1.0, 0.0})) > 1e4);
}

TEST_CASE("verify") {
  const TargetSpec spec = TargetSpec::standard(1.0, {-1.0, 0.0});
  const Construction c = construct(spec);

  SUBCASE("fresh construction passes") {
    const VerifyReport rep = verify(c.set, spec);
    for (const auto& chk : rep.checks) {
      INFO(chk.name << ": " << chk.detail);
      CHECK(chk.pass);
    }
    CHECK(rep.distance <= std::abs(c.residual) + c.report.err_budget + rep.distance_err);
  }

  SUBCASE("persisted copy passes") { CHECK(verify(load(save(c.set)), spec).ok()); }

  SUBCASE("shifting any block start by one is detected") {
    const std::string doc = save(c.set);
    for (const Block& b : c.set.blocks()) {
      for (int delta : {-1, 1}) {
        BlockSet tampered(1.0);
        try {
          tampered = load(shift_start(doc, b.start(), delta));
        } catch (const FormatError&) {
          continue;  // shift made blocks overlap; load itself rejects it
        }
        CHECK(!verify(tampered, spec).ok());
      }
    }
  }

  SUBCASE("wrong target fails") {
    TargetSpec other = spec;
    other.lambda = {-1.0, 1e-6};
    CHECK(!verify(c.set, other, false).ok());
  }

  SUBCASE("t = 0 is rejected") {
    TargetSpec zero = spec;
    zero.t = 0.0;
    CHECK_THROWS_AS(verify(c.set, zero), InvalidArgument);
  }
}
