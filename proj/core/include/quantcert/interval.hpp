#pragma once

#include "quantcert/network.hpp"

#include <vector>

namespace quantcert {

// Additive outward-rounding slack: every affine accumulation is widened by
// tau_round * (1 + running magnitude) so enclosures stay sound without
// directed rounding. Negligible next to quantization perturbations ~1e-4.
inline constexpr double kTauRound = 1e-12;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Validates lo <= hi and finiteness.
Interval make_interval(double lo, double hi);

// Component-wise interval vector, also used as the input Box.
struct IntervalVector {
  Vector lo;
  Vector hi;

  IntervalVector() = default;
  IntervalVector(Vector lo_, Vector hi_);

  Index size() const { return lo.size(); }
  Interval component(Index i) const { return {lo[i], hi[i]}; }
  Vector midpoint() const { return 0.5 * (lo + hi); }
  Vector width() const { return hi - lo; }
  bool contains(const Vector& x, double slack = 0.0) const;
  // True if every component of this lies inside the corresponding
  // component of `outer`.
  bool inside(const IntervalVector& outer, double slack = 0.0) const;
};

using Box = IntervalVector;

Box uniform_box(Index dim, double lo, double hi);

// W = w_minus + w_plus with w_minus holding exactly the negative entries
// and w_plus the non-negative ones.
struct SplitWeights {
  Matrix w_minus;
  Matrix w_plus;
};

SplitWeights split_weights(const Matrix& weights);

// Exact range of |x| over an interval.
Interval interval_abs(Interval iv);

enum class Norm { linf, l2 };

const char* to_string(Norm n);
Norm norm_from_string(const std::string& name);

double point_norm(const Vector& v, Norm norm);

// Exact range of the norm over the box (l2 ends widened by tau_round for
// the sqrt rounding).
Interval interval_norm(const IntervalVector& iv, Norm norm);

// Activation applied to an interval end. Monotonicity makes the end map to
// an end; tanh/sigmoid results are nudged one ulp outward because libm is
// not correctly rounded.
double activate_lo(Activation a, double x);
double activate_hi(Activation a, double x);

// Monotone interval propagation through a network. Splitting, absolute
// weights and biases are precomputed once, so reuse the evaluator when
// bounding many boxes of the same network.
class IntervalEvaluator {
public:
  explicit IntervalEvaluator(const Network& net);

  IntervalVector eval(const Box& box) const;
  Index input_dim() const { return input_dim_; }

private:
  struct PreparedLayer {
    Matrix w_minus;
    Matrix w_plus;
    Matrix w_abs;
    Vector bias;
    Vector bias_abs;
    Activation activation;
  };
  std::vector<PreparedLayer> layers_;
  Index input_dim_ = 0;
};

// One-shot convenience wrapper around IntervalEvaluator.
IntervalVector interval_eval(const Network& net, const Box& box);

}  // namespace quantcert
