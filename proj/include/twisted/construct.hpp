#pragma once

// Greedy construction of a set S of integers >= 2 with sum 1/n finite and
// sum n^{-1-it} equal to a prescribed complex target, to within epsilon.
//
// Each step clamps the residual to a correction c of modulus <= rho and emits
// one block [x, x + floor(x|c|)) whose start x makes x^{-it} parallel to c.
// Such a block sums to c up to (1 + |1+it|) |c|^2, so the residual shrinks by
// at least |c|/2 per step.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "twisted/powersum.hpp"
#include "twisted/setrep.hpp"

namespace twisted {

/// 1 / (2 + 2|1+it|): the largest correction modulus for which one block's
/// quadratic error is at most half its linear gain.
double clamp_radius(double t);

/// lambda_k if |lambda_k| <= rho, otherwise the point of modulus rho on the same ray.
Complex clamp(Complex lambda_k, double rho);

/// Correction cap that keeps total harmonic mass below |lambda| + delta:
/// the solution of |lambda| / (1 - rho/(2r)) = |lambda| + delta, capped at r.
double budget_rho(double t, Complex lambda, double delta);

struct TargetSpec {
  double t = 1.0;
  Complex lambda{};
  /// Stop once the residual modulus is at most epsilon.
  double epsilon = 1e-9;
  /// Every element of the constructed set is >= floor.
  BigInt floor = 2;
  /// Correction cap, 0 < rho <= clamp_radius(t).
  double rho = 0.0;
  std::size_t max_blocks = 10'000;
  /// For lambda = 0, emit one block for c = rho first so the set is nonempty.
  bool detour = false;
  SumOptions sums;

  /// Defaults with rho = clamp_radius(t) and floor 2.
  static TargetSpec standard(double t, Complex lambda);

  /// Throws InvalidArgument naming the offending field.
  void validate() const;
};

/// Result of placing one block for a correction c.
struct LemmaBlock {
  std::optional<Block> block;  // empty iff c == 0
  CertifiedSum sum;
  CertifiedSum mass;
  double correction_abs = 0.0;
  /// Signed angle from arg c to the phase of x^{-it}, in radians.
  double phase_offset = 0.0;
  /// |c| * (|phase_offset| + phase evaluation error).
  double angular_slack = 0.0;
  /// |c| + 10 mass.err - mass; negative means the mass audit failed.
  double mass_margin = 0.0;
  /// (1 + |1+it|)|c|^2 + angular_slack + 10 sum.err - |c - sum|.
  double approx_margin = 0.0;
};

/// Places the block for correction c above `floor`; raises the floor to
/// max(|c|^-2, |c|^-1) first. Throws AuditFailure if either block inequality
/// fails beyond slack or no start with the right phase is found.
LemmaBlock lemma_block(const BigInt& floor, Complex c, double t, const SumOptions& sums = {});

struct ConstructionState {
  std::size_t k = 1;
  Complex lambda_k{};
  BigInt next_floor = 2;
  std::vector<double> c_history;
  double err_budget = 0.0;
};

ConstructionState initial_state(const TargetSpec& spec);

struct StepRecord {
  std::size_t k = 0;
  Complex c{};
  Complex lambda_before{};
  Complex lambda_after{};
  LemmaBlock lemma;
  /// |lambda_k| - |c|/2 + slack - |lambda_{k+1}|.
  double decrease_margin = 0.0;
  double slack = 0.0;
  bool detour = false;
};

struct StepResult {
  ConstructionState state;
  StepRecord record;
};

/// One recursion step. Throws AuditFailure if the residual fails to drop by |c|/2 (beyond slack).
StepResult step(const ConstructionState& state, const TargetSpec& spec);

struct ConstructionReport {
  std::vector<StepRecord> steps;
  bool converged = false;
  bool detour_used = false;
  double err_budget = 0.0;
  double sum_abs_c = 0.0;
  double total_slack = 0.0;
  /// Steps taken while |lambda_k| > rho, and the bound ceil(2|lambda|/rho).
  std::size_t large_steps = 0;
  std::size_t large_step_limit = 0;
  /// |lambda| / (1 - rho/(2r)) plus slack.
  double mass_bound = 0.0;
};

struct Construction {
  BlockSet set;
  Complex residual;
  ConstructionReport report;
};

/// Runs step() until |lambda_k| <= epsilon or max_blocks. Non-convergence is
/// reported through report.converged, never thrown.
Construction construct(const TargetSpec& spec);

/// Per-block and summary report as a JSON document.
std::string report_json(const Construction& result, const TargetSpec& spec);

/// Worst-case decimal digits of the last block start the construction may need.
double predicted_start_digits(const TargetSpec& spec);

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<Check> checks;
  CertifiedSum recomputed_sum;
  CertifiedSum recomputed_mass;
  /// |lambda - sum over the set| and a rigorous bound on its computation error.
  double distance = 0.0;
  double distance_err = 0.0;

  bool ok() const;
};

/// Independent audit of a set against a target: recomputes every block sum from
/// scratch, checks structure and the target, and (with replay) checks that
/// the blocks are exactly the ones construct(spec) emits.
VerifyReport verify(const BlockSet& set, const TargetSpec& spec, bool replay = true);

}  // namespace twisted
