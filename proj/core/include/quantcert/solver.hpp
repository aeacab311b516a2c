#pragma once

#include "quantcert/interval.hpp"
#include "quantcert/merge.hpp"
#include "quantcert/quantization.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace quantcert {

enum class Method { moore_skelboe, exact_1d, grid };

const char* to_string(Method m);
Method method_from_string(const std::string& name);

// The full problem: network, how it is quantized, and where the inputs live.
struct ProblemSpec {
  Network phi;
  SchemePolicy scheme;
  Box box;
  Norm norm = Norm::linf;
};

struct SolveBudget {
  std::uint64_t max_boxes = 1'000'000;
  double wall_ms = 60'000.0;
  std::uint64_t max_grid_points = 10'000'000;
  std::uint64_t grid_points_per_axis = 101;  // used when dispatching method=grid
  int workers = 1;
  // Turns on the internal sanity asserts (incumbent monotone, queue upper
  // bound non-increasing, pruned boxes below the final bound).
  bool check_invariants = false;
};

// Certified enclosure of the worst-case output error. `lo` is always the
// norm attained at `witness_input`; for certified methods lo <= true sup <= hi.
// Grid search is a sampling lower bound only: certified == false and hi == lo.
struct ErrorCertificate {
  double lo = 0.0;
  double hi = 0.0;
  double eps_target = 0.0;
  Method method = Method::moore_skelboe;
  Norm norm = Norm::linf;
  bool certified = true;
  bool budget_exhausted = false;
  Vector witness_input;
  std::uint64_t boxes_processed = 0;
  int max_depth = 0;
  double wall_time_ms = 0.0;
};

// Interval propagation specialized to the merged layout: the two source
// paths advance as separate half-width states and the final [I, -I] layer
// becomes an interval subtraction, halving the flops of the dominant
// layers. Bounds many boxes per call (one box per column) so the solver can
// batch sibling boxes through one matrix product. The constructor verifies
// the block structure it exploits (zero off-diagonal blocks, exact [I, -I],
// zero final bias); bounds are interchangeable with interval_eval up to
// rounding slack.
class MergedBoxEvaluator {
 public:
  static bool compatible(const MergedNetwork& merged);

  explicit MergedBoxEvaluator(const MergedNetwork& merged);

  // lo/hi hold one box per column; returns the enclosure per column.
  void eval(const Matrix& lo, const Matrix& hi, Matrix& out_lo,
            Matrix& out_hi) const;

  // Certified upper end of the output norm, one entry per column.
  Vector norm_upper(const Matrix& lo, const Matrix& hi, Norm norm) const;

  Index input_dim() const { return input_dim_; }

 private:
  struct Path {
    Matrix w_minus;
    Matrix w_plus;
    Matrix w_abs;
    Vector bias;
    Vector bias_abs;
  };
  struct Stage {
    Path top;
    Path bottom;
    Activation activation = Activation::linear;
  };
  std::vector<Stage> stages_;
  Index input_dim_ = 0;
  Index output_dim_ = 0;
};

// Best-first interval branch-and-bound maximizing the output norm over the
// box. Boxes are keyed by the upper end of their interval norm; the incumbent
// comes from concrete midpoint (plus root-corner) evaluations. Terminates
// when the largest key is within eps of the incumbent, or the budget runs
// out (then the partial enclosure is returned with budget_exhausted set).
ErrorCertificate moore_skelboe(const MergedNetwork& merged, const Box& box,
                               Norm norm, double eps,
                               const SolveBudget& budget = {});

// Continuous piecewise-linear curve t -> value(t), linear between
// consecutive breakpoints; endpoints are always breakpoints.
struct PiecewiseLinearPath {
  std::vector<double> breakpoints;
  std::vector<Vector> values;

  Vector value_at(double t) const;
};

struct Reach1dResult {
  PiecewiseLinearPath path;
  ErrorCertificate certificate;
};

// Exact reachable curve of a 1-input piecewise-linear network over a
// segment: affine layers map breakpoint values, relu inserts a breakpoint at
// every zero crossing. The norm is convex on each affine piece, so the
// maximum sits on a breakpoint and the certificate is tight up to float slop.
Reach1dResult exact_reach_1d(const MergedNetwork& merged, Interval segment,
                             Norm norm);

// Uncertified sampling oracle: max norm over a uniform grid that includes
// all box corners.
ErrorCertificate grid_lower_bound(const MergedNetwork& merged, const Box& box,
                                  Norm norm, std::uint64_t points_per_axis,
                                  const SolveBudget& budget = {});

// Top-level operation: quantize, merge, then bound with the chosen method.
ErrorCertificate quantization_error(const ProblemSpec& spec, Method method,
                                    double eps, const SolveBudget& budget = {});

// One row per sample: the network output and the certified band around it.
struct BandRow {
  Vector u;
  Vector phi;
  Vector lower;
  Vector upper;
};

struct BandTable {
  std::vector<BandRow> rows;
  double hi = 0.0;
  Norm norm = Norm::linf;
};

BandTable bound_band(const Network& phi, const ErrorCertificate& cert,
                     const Box& box, const std::vector<Vector>& samples);

// CSV with header "u,phi,lower,upper", one row per output component; vector
// inputs are ';'-joined in the u column.
std::string band_csv(const BandTable& table);

}  // namespace quantcert
