#include "quantcert/interval.hpp"

#include "quantcert/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace quantcert {

Interval make_interval(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw Error("non-finite-input", "interval ends must be finite");
  if (lo > hi) {
    std::ostringstream os;
    os << "interval lower end " << lo << " exceeds upper end " << hi;
    throw Error("empty-box", os.str());
  }
  return {lo, hi};
}

IntervalVector::IntervalVector(Vector lo_, Vector hi_)
    : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.size() != hi.size())
    throw Error("dimension-mismatch", "interval vector ends differ in length");
  for (Index i = 0; i < lo.size(); ++i) make_interval(lo[i], hi[i]);
}

bool IntervalVector::contains(const Vector& x, double slack) const {
  if (x.size() != size()) return false;
  for (Index i = 0; i < size(); ++i) {
    if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
  }
  return true;
}

bool IntervalVector::inside(const IntervalVector& outer, double slack) const {
  if (outer.size() != size()) return false;
  for (Index i = 0; i < size(); ++i) {
    if (lo[i] < outer.lo[i] - slack || hi[i] > outer.hi[i] + slack) return false;
  }
  return true;
}

Box uniform_box(Index dim, double lo, double hi) {
  if (dim < 1) throw Error("empty-box", "box needs at least one dimension");
  return IntervalVector(Vector::Constant(dim, lo), Vector::Constant(dim, hi));
}

SplitWeights split_weights(const Matrix& weights) {
  if (!weights.allFinite())
    throw Error("non-finite-entry", "cannot split a matrix with NaN/Inf");
  SplitWeights s;
  s.w_minus = weights.cwiseMin(0.0);
  s.w_plus = weights.cwiseMax(0.0);
  return s;
}

Interval interval_abs(Interval iv) {
  if (iv.lo >= 0.0) return iv;
  if (iv.hi <= 0.0) return {-iv.hi, -iv.lo};
  return {0.0, std::max(-iv.lo, iv.hi)};
}

const char* to_string(Norm n) { return n == Norm::linf ? "linf" : "l2"; }

Norm norm_from_string(const std::string& name) {
  if (name == "linf") return Norm::linf;
  if (name == "l2") return Norm::l2;
  throw Error("unknown-norm", "no norm named '" + name + "'");
}

double point_norm(const Vector& v, Norm norm) {
  return norm == Norm::linf ? v.lpNorm<Eigen::Infinity>() : v.norm();
}

Interval interval_norm(const IntervalVector& iv, Norm norm) {
  if (iv.size() == 0) throw Error("empty-box", "norm of an empty vector");
  if (norm == Norm::linf) {
    double lo = 0.0, hi = 0.0;
    for (Index i = 0; i < iv.size(); ++i) {
      const Interval a = interval_abs(iv.component(i));
      lo = std::max(lo, a.lo);
      hi = std::max(hi, a.hi);
    }
    return {lo, hi};
  }
  double sum_lo = 0.0, sum_hi = 0.0;
  for (Index i = 0; i < iv.size(); ++i) {
    const Interval a = interval_abs(iv.component(i));
    sum_lo += a.lo * a.lo;
    sum_hi += a.hi * a.hi;
  }
  double lo = std::sqrt(sum_lo);
  double hi = std::sqrt(sum_hi);
  lo = std::max(0.0, lo - kTauRound * (1.0 + lo));
  hi = hi + kTauRound * (1.0 + hi);
  return {lo, hi};
}

double activate_lo(Activation a, double x) {
  const double y = apply_activation(a, x);
  // libm tanh/exp are not correctly rounded; nudge one ulp outward
  if (a == Activation::tanh || a == Activation::sigmoid)
    return std::nextafter(y, -std::numeric_limits<double>::infinity());
  return y;
}

double activate_hi(Activation a, double x) {
  const double y = apply_activation(a, x);
  if (a == Activation::tanh || a == Activation::sigmoid)
    return std::nextafter(y, std::numeric_limits<double>::infinity());
  return y;
}

IntervalEvaluator::IntervalEvaluator(const Network& net) {
  require_valid(net);
  input_dim_ = net.input_dim;
  layers_.reserve(net.layers.size());
  for (const Layer& l : net.layers) {
    SplitWeights split = split_weights(l.weights);
    PreparedLayer p;
    p.w_minus = std::move(split.w_minus);
    p.w_plus = std::move(split.w_plus);
    p.w_abs = l.weights.cwiseAbs();
    p.bias = l.bias;
    p.bias_abs = l.bias.cwiseAbs();
    p.activation = l.activation;
    layers_.push_back(std::move(p));
  }
}

IntervalVector IntervalEvaluator::eval(const Box& box) const {
  if (box.size() != input_dim_)
    throw Error("dimension-mismatch", "box dimension does not match network input");
  if (!box.lo.allFinite() || !box.hi.allFinite())
    throw Error("non-finite-input", "box ends must be finite");

  Vector lo = box.lo;
  Vector hi = box.hi;
  for (const PreparedLayer& p : layers_) {
    // monotone affine enclosure: negative part sees the opposite end
    Vector pre_lo = p.w_minus * hi + p.w_plus * lo + p.bias;
    Vector pre_hi = p.w_minus * lo + p.w_plus * hi + p.bias;
    // accumulated term magnitude drives the outward widening
    const Vector max_abs = lo.cwiseAbs().cwiseMax(hi.cwiseAbs());
    const Vector slack =
        kTauRound * ((p.w_abs * max_abs + p.bias_abs).array() + 1.0).matrix();
    pre_lo -= slack;
    pre_hi += slack;

    lo.resize(pre_lo.size());
    hi.resize(pre_hi.size());
    for (Index i = 0; i < pre_lo.size(); ++i) {
      lo[i] = activate_lo(p.activation, pre_lo[i]);
      hi[i] = activate_hi(p.activation, pre_hi[i]);
    }
  }
  return IntervalVector(std::move(lo), std::move(hi));
}

IntervalVector interval_eval(const Network& net, const Box& box) {
  return IntervalEvaluator(net).eval(box);
}

}  // namespace quantcert
