#include "quantcert/solver.hpp"

#include "quantcert/error.hpp"
#include "quantcert/model_io.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace quantcert {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

void invariant(bool ok, const char* what) {
  if (!ok) {
    throw std::logic_error(std::string("solver invariant violated: ") + what);
  }
}

struct SearchBox {
  Vector lo;
  Vector hi;
  double upper = 0.0;  // certified bound on the norm over this box
  std::uint64_t id = 0;
  int depth = 0;
};

// Max-heap on the certified upper bound; equal keys fall back to the box id
// so older boxes are expanded first and runs are reproducible.
struct HighestUpperFirst {
  bool operator()(const SearchBox& a, const SearchBox& b) const {
    if (a.upper != b.upper) return a.upper < b.upper;
    return a.id > b.id;
  }
};

using BoxQueue =
    std::priority_queue<SearchBox, std::vector<SearchBox>, HighestUpperFirst>;

// Widest axis whose midpoint is still distinct from both ends; -1 when the
// box cannot be halved anywhere (it is then final at its current bound).
int pick_split_axis(const SearchBox& box) {
  int axis = -1;
  double best = -1.0;
  for (Index i = 0; i < box.lo.size(); ++i) {
    const double lo = box.lo[i];
    const double hi = box.hi[i];
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) continue;
    const double width = hi - lo;
    if (width > best) {
      best = width;
      axis = static_cast<int>(i);
    }
  }
  return axis;
}

// Bound computation behind one face: the structured evaluator when the
// merged block layout checks out, the generic interval evaluator otherwise.
struct BoundOracle {
  const MergedBoxEvaluator* structured = nullptr;
  const IntervalEvaluator* generic = nullptr;
  Norm norm = Norm::linf;

  double one(const Vector& lo, const Vector& hi) const {
    if (structured) return structured->norm_upper(lo, hi, norm)[0];
    return interval_norm(generic->eval(IntervalVector{lo, hi}), norm).hi;
  }

  void pair(const Matrix& lo2, const Matrix& hi2, double& u0,
            double& u1) const {
    if (structured) {
      const Vector u = structured->norm_upper(lo2, hi2, norm);
      u0 = u[0];
      u1 = u[1];
      return;
    }
    u0 = interval_norm(generic->eval(IntervalVector{lo2.col(0), hi2.col(0)}),
                       norm)
             .hi;
    u1 = interval_norm(generic->eval(IntervalVector{lo2.col(1), hi2.col(1)}),
                       norm)
             .hi;
  }
};

// Everything one expansion produces; filled by workers, merged serially in
// batch order so multi-worker runs stay deterministic.
struct Expansion {
  SearchBox box;
  double point_value = 0.0;
  Vector midpoint;
  int axis = -1;
  SearchBox children[2];
};

void expand(const Network& net, const BoundOracle& oracle, Norm norm,
            Expansion& item) {
  item.midpoint = 0.5 * (item.box.lo + item.box.hi);
  item.point_value = point_norm(eval(net, item.midpoint), norm);
  item.axis = pick_split_axis(item.box);
  if (item.axis < 0) return;
  const double mid =
      0.5 * (item.box.lo[item.axis] + item.box.hi[item.axis]);
  const Index dim = item.box.lo.size();
  Matrix clo(dim, 2);
  Matrix chi(dim, 2);
  for (int side = 0; side < 2; ++side) {
    SearchBox& child = item.children[side];
    child.lo = item.box.lo;
    child.hi = item.box.hi;
    (side == 0 ? child.hi : child.lo)[item.axis] = mid;
    child.depth = item.box.depth + 1;
    clo.col(side) = child.lo;
    chi.col(side) = child.hi;
  }
  // siblings share one batched bound call
  oracle.pair(clo, chi, item.children[0].upper, item.children[1].upper);
}

// Concrete corner sweep of the root box; cheap incumbent seed. Skipped for
// high dimensions where 2^dim would dwarf the real search.
constexpr Index kMaxCornerDim = 16;

void seed_corners(const Network& net, const Box& box, Norm norm, double& lo,
                  Vector& witness) {
  const Index dim = box.size();
  if (dim > kMaxCornerDim) return;
  const std::uint64_t corners = std::uint64_t{1} << dim;
  constexpr std::uint64_t kChunk = 1024;
  Matrix batch(dim, static_cast<Index>(std::min(corners, kChunk)));
  for (std::uint64_t base = 0; base < corners; base += kChunk) {
    const Index cols =
        static_cast<Index>(std::min(kChunk, corners - base));
    for (Index c = 0; c < cols; ++c) {
      const std::uint64_t mask = base + static_cast<std::uint64_t>(c);
      for (Index i = 0; i < dim; ++i) {
        batch(i, c) = (mask >> i & 1) ? box.hi[i] : box.lo[i];
      }
    }
    const Matrix out = eval_batch(net, batch.leftCols(cols));
    for (Index c = 0; c < cols; ++c) {
      const double value = point_norm(out.col(c), norm);
      if (value > lo) {
        lo = value;
        witness = batch.col(c);
      }
    }
  }
}

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::moore_skelboe: return "moore-skelboe";
    case Method::exact_1d: return "exact-1d";
    case Method::grid: return "grid";
  }
  throw std::logic_error("unknown Method value");
}

Method method_from_string(const std::string& name) {
  if (name == "moore-skelboe" || name == "ms") return Method::moore_skelboe;
  if (name == "exact-1d") return Method::exact_1d;
  if (name == "grid") return Method::grid;
  throw Error("unknown-method",
              "unknown method '" + name +
                  "' (expected moore-skelboe, exact-1d, or grid)");
}

namespace {

// One monotone interval step for one path, all columns at once.
void advance_state(const Matrix& w_minus, const Matrix& w_plus,
                   const Matrix& w_abs, const Vector& bias,
                   const Vector& bias_abs, Activation act, Matrix& lo,
                   Matrix& hi) {
  Matrix pre_lo = w_minus * hi + w_plus * lo;
  pre_lo.colwise() += bias;
  Matrix pre_hi = w_minus * lo + w_plus * hi;
  pre_hi.colwise() += bias;
  Matrix slack = w_abs * lo.cwiseAbs().cwiseMax(hi.cwiseAbs());
  slack.colwise() += bias_abs;
  slack = (kTauRound * (slack.array() + 1.0)).matrix();
  pre_lo -= slack;
  pre_hi += slack;
  switch (act) {
    case Activation::linear:
      break;
    case Activation::relu:
      pre_lo = pre_lo.cwiseMax(0.0);
      pre_hi = pre_hi.cwiseMax(0.0);
      break;
    default:
      for (Index c = 0; c < pre_lo.cols(); ++c) {
        for (Index r = 0; r < pre_lo.rows(); ++r) {
          pre_lo(r, c) = activate_lo(act, pre_lo(r, c));
          pre_hi(r, c) = activate_hi(act, pre_hi(r, c));
        }
      }
  }
  lo = std::move(pre_lo);
  hi = std::move(pre_hi);
}

}  // namespace

bool MergedBoxEvaluator::compatible(const MergedNetwork& merged) {
  const Network& net = merged.net;
  const std::vector<Index>& d = merged.source_dims;
  if (d.size() < 2) return false;
  const std::size_t L = d.size() - 1;
  if (net.layers.size() != L + 1) return false;
  if (net.input_dim != d[0]) return false;
  for (std::size_t l = 0; l < L; ++l) {
    const Layer& layer = net.layers[l];
    const Index n_out = d[l + 1];
    const Index n_in = d[l];
    if (n_out < 1 || n_in < 1) return false;
    if (layer.weights.rows() != 2 * n_out) return false;
    if (layer.weights.cols() != (l == 0 ? n_in : 2 * n_in)) return false;
    if (layer.bias.size() != 2 * n_out) return false;
    if (l > 0) {
      if (!layer.weights.topRightCorner(n_out, n_in).isZero(0.0)) return false;
      if (!layer.weights.bottomLeftCorner(n_out, n_in).isZero(0.0))
        return false;
    }
  }
  const Layer& last = net.layers[L];
  const Index ny = d[L];
  if (last.activation != Activation::linear) return false;
  if (last.weights.rows() != ny || last.weights.cols() != 2 * ny) return false;
  if (!last.bias.isZero(0.0)) return false;
  if (!(last.weights.leftCols(ny) - Matrix::Identity(ny, ny)).isZero(0.0))
    return false;
  if (!(last.weights.rightCols(ny) + Matrix::Identity(ny, ny)).isZero(0.0))
    return false;
  return true;
}

MergedBoxEvaluator::MergedBoxEvaluator(const MergedNetwork& merged) {
  if (!compatible(merged)) {
    throw Error("architecture-mismatch",
                "network does not have the merged block layout");
  }
  const Network& net = merged.net;
  const std::vector<Index>& d = merged.source_dims;
  const std::size_t L = d.size() - 1;
  input_dim_ = d[0];
  output_dim_ = d[L];

  const auto make_path = [](const Matrix& w, const Vector& b) {
    Path p;
    p.w_minus = w.cwiseMin(0.0);
    p.w_plus = w.cwiseMax(0.0);
    p.w_abs = w.cwiseAbs();
    p.bias = b;
    p.bias_abs = b.cwiseAbs();
    return p;
  };

  stages_.reserve(L);
  for (std::size_t l = 0; l < L; ++l) {
    const Layer& layer = net.layers[l];
    const Index n_out = d[l + 1];
    const Index n_in = d[l];
    Stage stage;
    stage.activation = layer.activation;
    if (l == 0) {
      stage.top = make_path(layer.weights.topRows(n_out),
                            layer.bias.head(n_out));
      stage.bottom = make_path(layer.weights.bottomRows(n_out),
                               layer.bias.tail(n_out));
    } else {
      stage.top = make_path(layer.weights.topLeftCorner(n_out, n_in),
                            layer.bias.head(n_out));
      stage.bottom = make_path(layer.weights.bottomRightCorner(n_out, n_in),
                               layer.bias.tail(n_out));
    }
    stages_.push_back(std::move(stage));
  }
}

void MergedBoxEvaluator::eval(const Matrix& lo, const Matrix& hi,
                              Matrix& out_lo, Matrix& out_hi) const {
  if (lo.rows() != input_dim_ || hi.rows() != input_dim_ ||
      lo.cols() != hi.cols()) {
    throw Error("dimension-mismatch",
                "box columns do not match the network input");
  }
  if (!lo.allFinite() || !hi.allFinite()) {
    throw Error("non-finite-input", "box ends must be finite");
  }

  Matrix top_lo = lo;
  Matrix top_hi = hi;
  Matrix bot_lo = lo;
  Matrix bot_hi = hi;
  for (const Stage& s : stages_) {
    advance_state(s.top.w_minus, s.top.w_plus, s.top.w_abs, s.top.bias,
                  s.top.bias_abs, s.activation, top_lo, top_hi);
    advance_state(s.bottom.w_minus, s.bottom.w_plus, s.bottom.w_abs,
                  s.bottom.bias, s.bottom.bias_abs, s.activation, bot_lo,
                  bot_hi);
  }

  // Final [I, -I] layer as interval subtraction, same widening formula as
  // the generic affine step would apply to it.
  const Matrix magnitude = top_lo.cwiseAbs().cwiseMax(top_hi.cwiseAbs()) +
                           bot_lo.cwiseAbs().cwiseMax(bot_hi.cwiseAbs());
  const Matrix slack = (kTauRound * (magnitude.array() + 1.0)).matrix();
  out_lo = top_lo - bot_hi - slack;
  out_hi = top_hi - bot_lo + slack;
}

Vector MergedBoxEvaluator::norm_upper(const Matrix& lo, const Matrix& hi,
                                      Norm norm) const {
  Matrix out_lo;
  Matrix out_hi;
  eval(lo, hi, out_lo, out_hi);
  // max(|lo|, |hi|) is the upper end of |x| over [lo, hi] in every case
  const Matrix mag = out_lo.cwiseAbs().cwiseMax(out_hi.cwiseAbs());
  Vector uppers;
  if (norm == Norm::linf) {
    uppers = mag.colwise().maxCoeff().transpose();
  } else {
    uppers = mag.colwise().norm().transpose();
    uppers = (uppers.array() + kTauRound * (1.0 + uppers.array())).matrix();
  }
  return uppers;
}

ErrorCertificate moore_skelboe(const MergedNetwork& merged, const Box& box,
                               Norm norm, double eps,
                               const SolveBudget& budget) {
  const auto start = Clock::now();
  const Network& net = merged.net;
  require_valid(net);
  if (box.size() != net.input_dim) {
    throw Error("dimension-mismatch",
                "box has " + std::to_string(box.size()) +
                    " components but the network expects " +
                    std::to_string(net.input_dim));
  }
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw Error("invalid-eps", "eps must be a finite positive number");
  }
  if (budget.workers < 1) {
    throw Error("invalid-budget", "workers must be >= 1");
  }

  std::optional<MergedBoxEvaluator> structured;
  std::optional<IntervalEvaluator> generic;
  BoundOracle oracle;
  oracle.norm = norm;
  if (MergedBoxEvaluator::compatible(merged)) {
    structured.emplace(merged);
    oracle.structured = &*structured;
  } else {
    generic.emplace(net);
    oracle.generic = &*generic;
  }

  ErrorCertificate cert;
  cert.method = Method::moore_skelboe;
  cert.norm = norm;
  cert.eps_target = eps;

  double lo = -1.0;
  Vector witness = box.midpoint();
  lo = point_norm(eval(net, witness), norm);
  seed_corners(net, box, norm, lo, witness);

  std::uint64_t next_id = 0;
  BoxQueue queue;
  {
    SearchBox root;
    root.lo = box.lo;
    root.hi = box.hi;
    root.upper = oracle.one(root.lo, root.hi);
    root.id = next_id++;
    queue.push(std::move(root));
  }

  // Norm of a point inside a box never exceeds the box's certified bound, so
  // once every queued bound is within eps of the incumbent the enclosure
  // [lo, max queued bound] is proven. Finalized boxes (too thin to split)
  // keep contributing through finalized_max.
  double finalized_max = 0.0;
  double hi = queue.top().upper;
  std::uint64_t boxes_processed = 0;
  int max_depth = 0;
  bool budget_exhausted = false;
  double last_top = queue.top().upper;

  const std::size_t batch_target =
      budget.workers == 1 ? 1 : static_cast<std::size_t>(budget.workers) * 8;
  std::vector<Expansion> batch;
  batch.reserve(batch_target);

  while (!queue.empty()) {
    if (queue.top().upper <= lo + eps) {
      hi = std::max(queue.top().upper, finalized_max);
      break;
    }
    if (boxes_processed >= budget.max_boxes ||
        elapsed_ms(start) >= budget.wall_ms) {
      hi = std::max(queue.top().upper, finalized_max);
      budget_exhausted = true;
      break;
    }

    if (budget.check_invariants) {
      invariant(queue.top().upper <= last_top + 1e-9 * (1.0 + last_top),
                "best queued bound must not increase");
      last_top = queue.top().upper;
    }

    batch.clear();
    while (batch.size() < batch_target && !queue.empty() &&
           boxes_processed + batch.size() < budget.max_boxes &&
           queue.top().upper > lo + eps) {
      Expansion item;
      item.box = queue.top();
      queue.pop();
      batch.push_back(std::move(item));
    }

    if (batch.size() == 1 || budget.workers == 1) {
      for (Expansion& item : batch) expand(net, oracle, norm, item);
    } else {
      std::atomic<std::size_t> cursor{0};
      auto work = [&] {
        for (std::size_t i = cursor.fetch_add(1); i < batch.size();
             i = cursor.fetch_add(1)) {
          expand(net, oracle, norm, batch[i]);
        }
      };
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(budget.workers) - 1);
      for (int w = 1; w < budget.workers; ++w) pool.emplace_back(work);
      work();
      for (std::thread& t : pool) t.join();
    }

    for (Expansion& item : batch) {
      ++boxes_processed;
      if (item.point_value > lo) {
        lo = item.point_value;
        witness = item.midpoint;
      }
      if (item.axis < 0) {
        finalized_max = std::max(finalized_max, item.box.upper);
        continue;
      }
      for (SearchBox& child : item.children) {
        if (budget.check_invariants) {
          invariant(child.upper <=
                        item.box.upper + 1e-9 * (1.0 + item.box.upper),
                    "child bound must not exceed its parent's");
        }
        child.id = next_id++;
        max_depth = std::max(max_depth, child.depth);
        queue.push(std::move(child));
      }
    }
  }

  if (queue.empty() && !budget_exhausted) {
    hi = finalized_max;  // everything was finalized; certified cover
  }
  hi = std::max(hi, lo);
  if (budget.check_invariants) {
    invariant(lo <= hi, "enclosure must satisfy lo <= hi");
  }

  cert.lo = lo;
  cert.hi = hi;
  cert.certified = hi - lo <= eps;
  cert.budget_exhausted = budget_exhausted;
  cert.witness_input = witness;
  cert.boxes_processed = boxes_processed;
  cert.max_depth = max_depth;
  cert.wall_time_ms = elapsed_ms(start);
  return cert;
}

ErrorCertificate grid_lower_bound(const MergedNetwork& merged, const Box& box,
                                  Norm norm, std::uint64_t points_per_axis,
                                  const SolveBudget& budget) {
  const auto start = Clock::now();
  const Network& net = merged.net;
  require_valid(net);
  if (box.size() != net.input_dim) {
    throw Error("dimension-mismatch",
                "box has " + std::to_string(box.size()) +
                    " components but the network expects " +
                    std::to_string(net.input_dim));
  }
  if (points_per_axis < 2) {
    throw Error("invalid-grid", "points_per_axis must be >= 2");
  }

  const Index dim = box.size();
  std::uint64_t total = 1;
  for (Index i = 0; i < dim; ++i) {
    if (total > budget.max_grid_points / points_per_axis) {
      throw Error("budget-exceeded",
                  "grid would exceed max_grid_points = " +
                      std::to_string(budget.max_grid_points));
    }
    total *= points_per_axis;
  }

  double lo = -1.0;
  Vector witness;
  bool budget_exhausted = false;
  std::uint64_t evaluated = 0;

  std::vector<std::uint64_t> odo(static_cast<std::size_t>(dim), 0);
  constexpr Index kChunk = 4096;
  Matrix batch(dim, std::min<Index>(kChunk, static_cast<Index>(total)));

  auto coordinate = [&](Index axis, std::uint64_t j) {
    if (j == points_per_axis - 1) return box.hi[axis];
    const double step =
        (box.hi[axis] - box.lo[axis]) / static_cast<double>(points_per_axis - 1);
    return box.lo[axis] + step * static_cast<double>(j);
  };

  std::uint64_t remaining = total;
  while (remaining > 0) {
    const Index cols = static_cast<Index>(
        std::min<std::uint64_t>(remaining, static_cast<std::uint64_t>(kChunk)));
    for (Index c = 0; c < cols; ++c) {
      for (Index i = 0; i < dim; ++i) {
        batch(i, c) = coordinate(i, odo[static_cast<std::size_t>(i)]);
      }
      for (Index i = 0; i < dim; ++i) {  // odometer advance
        if (++odo[static_cast<std::size_t>(i)] < points_per_axis) break;
        odo[static_cast<std::size_t>(i)] = 0;
      }
    }
    const Matrix out = eval_batch(net, batch.leftCols(cols));
    for (Index c = 0; c < cols; ++c) {
      const double value = point_norm(out.col(c), norm);
      if (value > lo) {
        lo = value;
        witness = batch.col(c);
      }
    }
    evaluated += static_cast<std::uint64_t>(cols);
    remaining -= static_cast<std::uint64_t>(cols);
    if (remaining > 0 && elapsed_ms(start) >= budget.wall_ms) {
      budget_exhausted = true;  // partial sweep is still a lower bound
      break;
    }
  }

  ErrorCertificate cert;
  cert.method = Method::grid;
  cert.norm = norm;
  cert.eps_target = 0.0;
  cert.lo = lo;
  cert.hi = lo;  // sampling gives no upper bound; hi mirrors lo
  cert.certified = false;
  cert.budget_exhausted = budget_exhausted;
  cert.witness_input = witness;
  cert.boxes_processed = evaluated;
  cert.max_depth = 0;
  cert.wall_time_ms = elapsed_ms(start);
  return cert;
}

ErrorCertificate quantization_error(const ProblemSpec& spec, Method method,
                                    double eps, const SolveBudget& budget) {
  require_valid(spec.phi);
  if (spec.box.size() != spec.phi.input_dim) {
    throw Error("dimension-mismatch",
                "box has " + std::to_string(spec.box.size()) +
                    " components but the network expects " +
                    std::to_string(spec.phi.input_dim));
  }
  const QuantizedNetwork quantized = quantize_network(spec.phi, spec.scheme);
  const MergedNetwork merged = merge(spec.phi, quantized);

  switch (method) {
    case Method::moore_skelboe:
      return moore_skelboe(merged, spec.box, spec.norm, eps, budget);
    case Method::exact_1d: {
      if (spec.phi.input_dim != 1) {
        throw Error("method-precondition-violated",
                    "exact-1d requires input dimension 1, got " +
                        std::to_string(spec.phi.input_dim));
      }
      for (const Layer& layer : spec.phi.layers) {
        if (layer.activation != Activation::relu &&
            layer.activation != Activation::linear) {
          throw Error("method-precondition-violated",
                      "exact-1d requires piecewise-linear activations, got " +
                          std::string(to_string(layer.activation)));
        }
      }
      Reach1dResult result = exact_reach_1d(
          merged, Interval{spec.box.lo[0], spec.box.hi[0]}, spec.norm);
      result.certificate.eps_target = eps;
      return result.certificate;
    }
    case Method::grid:
      return grid_lower_bound(merged, spec.box, spec.norm,
                              budget.grid_points_per_axis, budget);
  }
  throw std::logic_error("unknown Method value");
}

BandTable bound_band(const Network& phi, const ErrorCertificate& cert,
                     const Box& box, const std::vector<Vector>& samples) {
  require_valid(phi);
  if (box.size() != phi.input_dim) {
    throw Error("dimension-mismatch",
                "box has " + std::to_string(box.size()) +
                    " components but the network expects " +
                    std::to_string(phi.input_dim));
  }
  if (!(cert.hi >= 0.0) || !std::isfinite(cert.hi)) {
    throw Error("invalid-certificate", "certificate hi must be finite");
  }

  BandTable table;
  table.hi = cert.hi;
  table.norm = cert.norm;
  table.rows.reserve(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Vector& u = samples[k];
    if (u.size() != box.size() || !box.contains(u)) {
      throw Error("sample-outside-box",
                  "sample " + std::to_string(k) + " is not inside the box");
    }
    BandRow row;
    row.u = u;
    row.phi = eval(phi, u);
    // For linf the bound applies per component; for l2 it caps the whole
    // output vector, which still yields a valid per-component band.
    row.lower = row.phi.array() - cert.hi;
    row.upper = row.phi.array() + cert.hi;
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string band_csv(const BandTable& table) {
  std::string out = "u,phi,lower,upper\n";
  for (const BandRow& row : table.rows) {
    std::string u_text;
    for (Index i = 0; i < row.u.size(); ++i) {
      if (i > 0) u_text += ';';
      u_text += format_double(row.u[i]);
    }
    for (Index j = 0; j < row.phi.size(); ++j) {
      out += u_text;
      out += ',';
      out += format_double(row.phi[j]);
      out += ',';
      out += format_double(row.lower[j]);
      out += ',';
      out += format_double(row.upper[j]);
      out += '\n';
    }
  }
  return out;
}

}  // namespace quantcert
