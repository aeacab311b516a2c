#include "quantcert/solver.hpp"

#include "quantcert/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace quantcert {

namespace {

using Clock = std::chrono::steady_clock;

// Hard cap on the path size; random nets stay in the hundreds, the cap only
// guards adversarial inputs from exhausting memory.
constexpr std::size_t kMaxBreakpoints = 1'000'000;

// Relative slack folded into the certified upper end so that float rounding
// inside the layer sweep can never make hi understate the true maximum.
constexpr double kPathSlack = 1e-9;

}  // namespace

Vector PiecewiseLinearPath::value_at(double t) const {
  if (breakpoints.empty()) {
    throw Error("empty-path", "path has no breakpoints");
  }
  if (t <= breakpoints.front()) return values.front();
  if (t >= breakpoints.back()) return values.back();
  const auto it =
      std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  const std::size_t j =
      static_cast<std::size_t>(it - breakpoints.begin()) - 1;
  const double t0 = breakpoints[j];
  const double t1 = breakpoints[j + 1];
  if (t1 == t0) return values[j];
  const double w = (t - t0) / (t1 - t0);
  return values[j] + w * (values[j + 1] - values[j]);
}

Reach1dResult exact_reach_1d(const MergedNetwork& merged, Interval segment,
                             Norm norm) {
  const auto start = Clock::now();
  const Network& net = merged.net;
  require_valid(net);
  if (net.input_dim != 1) {
    throw Error("input-dim-not-one",
                "exact 1-d reachability needs input dimension 1, got " +
                    std::to_string(net.input_dim));
  }
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const Activation a = net.layers[l].activation;
    if (a != Activation::relu && a != Activation::linear) {
      throw Error("unsupported-activation",
                  "layer " + std::to_string(l + 1) + " uses " +
                      std::string(to_string(a)) +
                      "; only relu and linear are piecewise linear");
    }
  }
  segment = make_interval(segment.lo, segment.hi);

  // Identity path u(t) = t; a degenerate segment is a single point.
  PiecewiseLinearPath path;
  path.breakpoints = {segment.lo};
  if (segment.hi > segment.lo) path.breakpoints.push_back(segment.hi);
  for (const double t : path.breakpoints) {
    path.values.push_back(Vector::Constant(1, t));
  }

  std::vector<double> crossings;
  for (const Layer& layer : net.layers) {
    for (Vector& v : path.values) {
      v = layer.weights * v + layer.bias;
    }
    if (layer.activation != Activation::relu || path.breakpoints.size() < 2) {
      if (layer.activation == Activation::relu) {
        for (Vector& v : path.values) v = v.cwiseMax(0.0);
      }
      continue;
    }

    // Insert a breakpoint wherever some component crosses zero strictly
    // inside a piece, then clamp. Values at inserted points interpolate the
    // surrounding pair, which is exact because the piece is affine.
    std::vector<double> ts;
    std::vector<Vector> vals;
    ts.reserve(path.breakpoints.size() * 2);
    vals.reserve(path.breakpoints.size() * 2);
    for (std::size_t j = 0; j + 1 < path.breakpoints.size(); ++j) {
      const double t0 = path.breakpoints[j];
      const double t1 = path.breakpoints[j + 1];
      const Vector& v0 = path.values[j];
      const Vector& v1 = path.values[j + 1];
      ts.push_back(t0);
      vals.push_back(v0);

      crossings.clear();
      for (Index i = 0; i < v0.size(); ++i) {
        const double p0 = v0[i];
        const double p1 = v1[i];
        if ((p0 < 0.0 && p1 > 0.0) || (p0 > 0.0 && p1 < 0.0)) {
          const double t = t0 + (t1 - t0) * (p0 / (p0 - p1));
          if (t > t0 && t < t1) crossings.push_back(t);
        }
      }
      std::sort(crossings.begin(), crossings.end());
      crossings.erase(std::unique(crossings.begin(), crossings.end()),
                      crossings.end());
      for (const double t : crossings) {
        const double w = (t - t0) / (t1 - t0);
        ts.push_back(t);
        vals.push_back(v0 + w * (v1 - v0));
      }
      if (ts.size() > kMaxBreakpoints) {
        throw Error("budget-exceeded",
                    "piecewise-linear path exceeded " +
                        std::to_string(kMaxBreakpoints) + " breakpoints");
      }
    }
    ts.push_back(path.breakpoints.back());
    vals.push_back(path.values.back());
    for (Vector& v : vals) v = v.cwiseMax(0.0);
    path.breakpoints = std::move(ts);
    path.values = std::move(vals);
  }

  // The norm is convex on each affine piece, so the sup over the segment is
  // attained at a breakpoint.
  double best = -1.0;
  std::size_t best_index = 0;
  for (std::size_t j = 0; j < path.breakpoints.size(); ++j) {
    const double value = point_norm(path.values[j], norm);
    if (value > best) {
      best = value;
      best_index = j;
    }
  }

  ErrorCertificate cert;
  cert.method = Method::exact_1d;
  cert.norm = norm;
  cert.eps_target = 0.0;
  cert.witness_input = Vector::Constant(1, path.breakpoints[best_index]);
  // lo re-evaluates the witness through the network so the witness invariant
  // holds bit-exactly even where the path sweep rounded differently.
  cert.lo = point_norm(eval(net, cert.witness_input), norm);
  cert.hi = std::max(best, cert.lo);
  cert.hi += kPathSlack * (1.0 + cert.hi);
  cert.certified = true;
  cert.budget_exhausted = false;
  cert.boxes_processed =
      static_cast<std::uint64_t>(path.breakpoints.size());
  cert.max_depth = 0;
  cert.wall_time_ms =
      std::chrono::duration<double, std::milli>(Clock::now() - start).count();

  return Reach1dResult{std::move(path), std::move(cert)};
}

}  // namespace quantcert
