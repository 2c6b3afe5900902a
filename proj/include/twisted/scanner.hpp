#pragma once

// Zero scanning for g(t) = 1 + sum_{n in S} n^{-1-it} over a t-interval.
// A grid cell [a, b] is certified zero-free when
//   min(|g(a)|, |g(b)|) > L (b - a) / 2 + eval_err,
// L being an upper bound on |g'| = |sum (ln n) n^{-1-it}| <= sum (ln n)/n.
// Cells that fail are bisected down to a floor width and reported, never dropped.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "twisted/powersum.hpp"
#include "twisted/setrep.hpp"

namespace twisted {

/// Sorted, distinct integers >= 2.
class FiniteSet {
 public:
  FiniteSet() = default;
  /// Sorts; throws InvalidArgument on duplicates or elements below 2.
  explicit FiniteSet(std::vector<std::uint64_t> elements);

  /// "2,3,5" or a JSON list "[2, 3, 5]". Empty text or "[]" is the empty set.
  static FiniteSet parse(const std::string& text);

  const std::vector<std::uint64_t>& elements() const { return elements_; }

  CertifiedSum evaluate(double t) const;
  double lipschitz() const;

 private:
  std::vector<std::uint64_t> elements_;
  std::vector<double> logs_;
};

/// 1 + sum over the finite set, compensated.
CertifiedSum g(const FiniteSet& s, double t);

/// sum_{n in S} (ln n)/n, rounded up.
double lipschitz_bound(const FiniteSet& s);

/// 1 + sum over a block set, each block summed by interval_sum; blocks may be
/// astronomically long.
class BlockSeries {
 public:
  explicit BlockSeries(BlockSet set, SumOptions sums = {});

  const BlockSet& set() const { return set_; }
  CertifiedSum evaluate(double t) const;
  /// Upper bound on sum over all elements of (ln n)/n.
  double lipschitz() const { return lipschitz_; }

 private:
  BlockSet set_;
  SumOptions sums_;
  double lipschitz_ = 0.0;
};

using Evaluator = std::function<CertifiedSum(double)>;

struct ScanOptions {
  /// Uncertified cells are bisected until narrower than this.
  double h_min = 1e-12;
  /// Safety factor on the certified evaluation error.
  double eval_safety = 10.0;
  /// Width of the golden-section refinement of the grid minimum.
  double refine_tol = 1e-10;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
  /// Keep (t, g(t)) for every grid point, for CSV export.
  bool keep_samples = false;
};

struct Cell {
  double lo = 0.0;
  double hi = 0.0;
};

struct Sample {
  double t = 0.0;
  Complex g{};
};

struct ScanReport {
  double t0 = 0.0;
  double t1 = 0.0;
  double grid_step = 0.0;
  /// (t1 - t0) / cells, never above grid_step.
  double effective_step = 0.0;
  double h_min = 0.0;
  double lipschitz_L = 0.0;
  double min_abs_g = 0.0;
  double argmin_t = 0.0;
  bool certified_zero_free = false;
  std::vector<Cell> uncertified_cells;
  std::size_t evaluations = 0;
  std::size_t bisections = 0;
  double max_eval_err = 0.0;
  std::vector<Sample> samples;
};

struct RefineResult {
  double t = 0.0;
  double abs_g = 0.0;
  /// False when the midpoint was not below both ends; the result is then the best of the three.
  bool bracketed = false;
  std::size_t evaluations = 0;
};

/// Golden-section minimization of |g|^2 on [t_lo, t_hi] down to width tol.
/// The returned value never exceeds |g| at t_lo, t_hi or the midpoint.
RefineResult refine_min(const Evaluator& eval, double t_lo, double t_hi, double tol);
RefineResult refine_min(const FiniteSet& s, double t_lo, double t_hi, double tol);

/// Throws InvalidArgument for h <= 0 or t0 >= t1.
ScanReport scan(const Evaluator& eval, double lipschitz, double t0, double t1, double h, const ScanOptions& options = {});
ScanReport scan(const FiniteSet& s, double t0, double t1, double h, const ScanOptions& options = {});
ScanReport scan(const BlockSeries& s, double t0, double t1, double h, const ScanOptions& options = {});

std::string scan_report_json(const ScanReport& report);
/// Header "t,re_g,im_g,abs_g" then one row per kept sample.
void write_scan_csv(std::ostream& out, const ScanReport& report);

}  // namespace twisted
