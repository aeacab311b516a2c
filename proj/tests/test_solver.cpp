#include "quantcert/solver.hpp"

#include "quantcert/error.hpp"
#include "quantcert/interval.hpp"
#include "quantcert/merge.hpp"
#include "quantcert/quantization.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace quantcert;
using namespace quantcert::testing;

namespace {

// phi(u) = 1.5u; truncation to whole digits turns the weight into 1.0, so
// the difference network is exactly 0.5u with sup 0.5 on [0, 1].
ProblemSpec half_slope_problem() {
  ProblemSpec spec;
  spec.phi = single_layer_net(mat({{1.5}}), vec({0.0}), Activation::linear);
  spec.scheme = SchemePolicy::truncate(0);
  spec.box = uniform_box(1, 0.0, 1.0);
  spec.norm = Norm::linf;
  return spec;
}

MergedNetwork half_slope_merged() {
  const ProblemSpec spec = half_slope_problem();
  return merge(spec.phi, quantize_network(spec.phi, spec.scheme));
}

Vector sample_in(std::mt19937_64& rng, const Box& box) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector u(box.size());
  for (Index i = 0; i < box.size(); ++i) {
    u(i) = box.lo(i) + unit(rng) * (box.hi(i) - box.lo(i));
  }
  return u;
}

}  // namespace

TEST_CASE("method names round-trip") {
  CHECK(method_from_string("moore-skelboe") == Method::moore_skelboe);
  CHECK(method_from_string("exact-1d") == Method::exact_1d);
  CHECK(method_from_string("grid") == Method::grid);
  CHECK(method_from_string(to_string(Method::moore_skelboe)) ==
        Method::moore_skelboe);
  CHECK(method_from_string(to_string(Method::exact_1d)) == Method::exact_1d);
  CHECK(method_from_string(to_string(Method::grid)) == Method::grid);
  CHECK_THROWS_WITH_AS(method_from_string("newton"),
                       doctest::Contains("unknown-method"), Error);
}

TEST_CASE("a constant difference network decides at the root") {
  // zero weights make both path intervals degenerate, so the subtraction
  // collapses and the very first bound already certifies
  const Network net = single_layer_net(mat({{0.0, 0.0}}), vec({0.7}),
                                       Activation::relu);
  const MergedNetwork m = merge_networks(net, net);
  const ErrorCertificate cert =
      moore_skelboe(m, uniform_box(2, -1.0, 1.0), Norm::linf, 1e-6);
  CHECK(cert.certified);
  CHECK(cert.lo == 0.0);
  CHECK(cert.hi >= 0.0);
  CHECK(cert.hi <= 1e-9);
  CHECK(cert.boxes_processed == 0);  // the root interval already decides
  CHECK(cert.max_depth == 0);
  CHECK(!cert.budget_exhausted);
}

TEST_CASE("identical paths converge even though intervals cannot collapse") {
  // merging a network with itself is pointwise zero, but the interval
  // subtraction still carries both path widths; the solver has to bisect
  // down to the eps scale before it can certify
  const Network net = random_network({1, 4, 1}, Activation::relu, 4);
  const MergedNetwork m = merge_networks(net, net);
  const ErrorCertificate cert =
      moore_skelboe(m, uniform_box(1, -1.0, 1.0), Norm::linf, 1e-3);
  CHECK(cert.certified);
  CHECK(cert.lo == 0.0);
  CHECK(cert.hi <= 1e-3);
  CHECK(cert.boxes_processed > 0);
}

TEST_CASE("branch and bound solves the half-slope example") {
  const ErrorCertificate cert =
      moore_skelboe(half_slope_merged(), uniform_box(1, 0.0, 1.0), Norm::linf,
                    1e-6);
  CHECK(cert.certified);
  CHECK(!cert.budget_exhausted);
  CHECK(cert.lo == 0.5);  // the right corner is evaluated exactly
  CHECK(cert.hi >= 0.5);
  CHECK(cert.hi <= 0.5 + 1e-6);
  REQUIRE(cert.witness_input.size() == 1);
  CHECK(cert.witness_input(0) == 1.0);
  CHECK(cert.method == Method::moore_skelboe);
  CHECK(cert.eps_target == 1e-6);
  CHECK(cert.wall_time_ms >= 0.0);
}

TEST_CASE("moore_skelboe validates its inputs") {
  const MergedNetwork m = half_slope_merged();
  CHECK_THROWS_WITH_AS(
      moore_skelboe(m, uniform_box(2, 0.0, 1.0), Norm::linf, 1e-6),
      doctest::Contains("dimension-mismatch"), Error);
  CHECK_THROWS_WITH_AS(moore_skelboe(m, uniform_box(1, 0.0, 1.0), Norm::linf,
                                     0.0),
                       doctest::Contains("invalid-eps"), Error);
  SolveBudget budget;
  budget.workers = 0;
  CHECK_THROWS_WITH_AS(moore_skelboe(m, uniform_box(1, 0.0, 1.0), Norm::linf,
                                     1e-6, budget),
                       doctest::Contains("invalid-budget"), Error);
}

TEST_CASE("two-input problem agrees with a fine reference grid") {
  const Network net = random_network({2, 4, 1}, Activation::relu, 11);
  const QuantizedNetwork q = quantize_network(net, SchemePolicy::truncate(2));
  const MergedNetwork m = merge(net, q);
  const Box box = uniform_box(2, 0.0, 1.0);

  SolveBudget budget;
  budget.max_boxes = 2'000'000;
  budget.check_invariants = true;  // also exercises the internal asserts
  const ErrorCertificate ms = moore_skelboe(m, box, Norm::linf, 1e-4, budget);
  CHECK(ms.certified);
  CHECK(ms.hi - ms.lo <= 1e-4);

  const ErrorCertificate ref = grid_lower_bound(m, box, Norm::linf, 101);
  CHECK(ref.lo <= ms.hi + 1e-12);
  CHECK(ref.lo >= 0.0);
  // the sampled max must land inside the certified enclosure's reach
  CHECK(ms.lo <= ms.hi);
  CHECK(box.contains(ms.witness_input, 1e-12));
}

TEST_CASE("l2 norm certificates are sound too") {
  const Network net = random_network({2, 5, 2}, Activation::relu, 23);
  const QuantizedNetwork q = quantize_network(net, SchemePolicy::truncate(2));
  const MergedNetwork m = merge(net, q);
  const Box box = uniform_box(2, -0.5, 0.5);
  SolveBudget budget;
  budget.max_boxes = 4'000'000;
  const ErrorCertificate cert = moore_skelboe(m, box, Norm::l2, 1e-4, budget);
  CHECK(cert.certified);
  std::mt19937_64 rng(77);
  for (int i = 0; i < 500; ++i) {
    const double v = point_norm(eval(m.net, sample_in(rng, box)), Norm::l2);
    CHECK(v <= cert.hi + 1e-12);
  }
}

TEST_CASE("exhausted box budget still yields a sound enclosure") {
  const Network net = random_network({1, 8, 8, 1}, Activation::relu, 3);
  const QuantizedNetwork q = quantize_network(net, SchemePolicy::truncate(4));
  const MergedNetwork m = merge(net, q);
  const Box box = uniform_box(1, 0.0, 1.0);

  SolveBudget tight;
  tight.max_boxes = 10;
  const ErrorCertificate cert = moore_skelboe(m, box, Norm::linf, 1e-9, tight);
  CHECK(cert.budget_exhausted);
  CHECK(!cert.certified);
  CHECK(cert.lo <= cert.hi);
  CHECK(cert.boxes_processed <= 10 + 2);

  // the partial enclosure still brackets a dense sampling estimate
  const ErrorCertificate ref = grid_lower_bound(m, box, Norm::linf, 10001);
  CHECK(ref.lo <= cert.hi + 1e-12);
  CHECK(cert.lo <= ref.lo + 1e-12);
}

TEST_CASE("wall budget exhaustion is flagged") {
  const Network net = random_network({2, 16, 16, 1}, Activation::relu, 9);
  const QuantizedNetwork q = quantize_network(net, SchemePolicy::truncate(6));
  const MergedNetwork m = merge(net, q);
  SolveBudget tight;
  tight.wall_ms = 0.0;
  const ErrorCertificate cert =
      moore_skelboe(m, uniform_box(2, 0.0, 1.0), Norm::linf, 1e-12, tight);
  CHECK(cert.budget_exhausted);
  CHECK(cert.lo <= cert.hi);
}

TEST_CASE("worker count does not change the certified enclosure") {
  const Network net = random_network({2, 4, 1}, Activation::relu, 31);
  const QuantizedNetwork q = quantize_network(net, SchemePolicy::truncate(2));
  const MergedNetwork m = merge(net, q);
  const Box box = uniform_box(2, 0.0, 1.0);

  SolveBudget serial;
  serial.max_boxes = 4'000'000;
  SolveBudget parallel = serial;
  parallel.workers = 2;

  const ErrorCertificate a = moore_skelboe(m, box, Norm::linf, 1e-4, serial);
  const ErrorCertificate b = moore_skelboe(m, box, Norm::linf, 1e-4, parallel);
  CHECK(a.certified);
  CHECK(b.certified);
  CHECK(a.hi - a.lo <= 1e-4);
  CHECK(b.hi - b.lo <= 1e-4);
  // both enclose the same supremum, so they must overlap
  CHECK(std::max(a.lo, b.lo) <= std::min(a.hi, b.hi) + 1e-12);
}

TEST_CASE("exact 1d reachability of a shifted relu") {
  Network net = single_layer_net(mat({{1.0}}), vec({-0.5}), Activation::relu);
  MergedNetwork m;
  m.net = net;
  m.source_dims = {1, 1};
  const Reach1dResult r = exact_reach_1d(m, make_interval(0.0, 1.0), Norm::linf);
  REQUIRE(r.path.breakpoints.size() == 3);
  CHECK(r.path.breakpoints[0] == 0.0);
  CHECK(r.path.breakpoints[1] == 0.5);
  CHECK(r.path.breakpoints[2] == 1.0);
  CHECK(r.path.values[0](0) == 0.0);
  CHECK(r.path.values[1](0) == 0.0);
  CHECK(r.path.values[2](0) == 0.5);
  CHECK(r.certificate.lo == 0.5);
  CHECK(r.certificate.hi >= 0.5);
  CHECK(r.certificate.hi <= 0.5 + 1e-8);
  CHECK(r.certificate.certified);
  CHECK(r.certificate.witness_input(0) == 1.0);
  CHECK(r.certificate.method == Method::exact_1d);
}

TEST_CASE("linear layers add no interior breakpoints") {
  Network net;
  net.input_dim = 1;
  net.layers.push_back(layer(mat({{2.0}, {1.0}}), vec({0.5, -0.5}),
                             Activation::linear));
  net.layers.push_back(layer(mat({{1.0, 1.0}}), vec({0.0}),
                             Activation::linear));
  MergedNetwork m;
  m.net = net;
  m.source_dims = {1, 1};
  const Reach1dResult r =
      exact_reach_1d(m, make_interval(-1.0, 2.0), Norm::linf);
  REQUIRE(r.path.breakpoints.size() == 2);
  CHECK(r.path.breakpoints[0] == -1.0);
  CHECK(r.path.breakpoints[1] == 2.0);
  // 3u at the ends: -3 and 6, max |.| at the right end
  CHECK(r.certificate.lo == 6.0);
}

TEST_CASE("the reachability path reproduces the network everywhere") {
  const Network net = random_network({1, 6, 6, 2}, Activation::relu, 19);
  const QuantizedNetwork q = quantize_network(net, SchemePolicy::truncate(2));
  const MergedNetwork m = merge(net, q);
  const Reach1dResult r =
      exact_reach_1d(m, make_interval(-1.0, 2.0), Norm::linf);

  REQUIRE(r.path.breakpoints.size() >= 2);
  CHECK(r.path.breakpoints.front() == -1.0);
  CHECK(r.path.breakpoints.back() == 2.0);
  for (std::size_t i = 1; i < r.path.breakpoints.size(); ++i) {
    CHECK(r.path.breakpoints[i] > r.path.breakpoints[i - 1]);
  }

  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> dist(-1.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const double t = dist(rng);
    Vector u(1);
    u << t;
    const Vector direct = eval(m.net, u);
    const Vector on_path = r.path.value_at(t);
    const double scale = 1.0 + direct.cwiseAbs().maxCoeff();
    CHECK((direct - on_path).cwiseAbs().maxCoeff() <= 1e-9 * scale);
  }

  // certificate upper end dominates a dense sweep
  const ErrorCertificate ref =
      grid_lower_bound(m, Box(Vector::Constant(1, -1.0), Vector::Constant(1, 2.0)),
                       Norm::linf, 100001);
  CHECK(ref.lo <= r.certificate.hi);
  CHECK(r.certificate.lo <= ref.lo + 1e-12);
}

TEST_CASE("value_at clamps outside the segment") {
  PiecewiseLinearPath path;
  path.breakpoints = {0.0, 1.0};
  path.values = {vec({1.0}), vec({3.0})};
  CHECK(path.value_at(-5.0)(0) == 1.0);
  CHECK(path.value_at(5.0)(0) == 3.0);
  CHECK(path.value_at(0.5)(0) == 2.0);
  PiecewiseLinearPath empty;
  CHECK_THROWS_WITH_AS(empty.value_at(0.0), doctest::Contains("empty-path"),
                       Error);
}

TEST_CASE("exact 1d rejects unsupported problems") {
  {
    const Network net = random_network({2, 4, 1}, Activation::relu, 1);
    const MergedNetwork m =
        merge(net, quantize_network(net, SchemePolicy::truncate(2)));
    CHECK_THROWS_WITH_AS(exact_reach_1d(m, make_interval(0.0, 1.0), Norm::linf),
                         doctest::Contains("input-dim-not-one"), Error);
  }
  {
    const Network net = random_network({1, 4, 1}, Activation::tanh, 1);
    const MergedNetwork m =
        merge(net, quantize_network(net, SchemePolicy::truncate(2)));
    CHECK_THROWS_WITH_AS(exact_reach_1d(m, make_interval(0.0, 1.0), Norm::linf),
                         doctest::Contains("unsupported-activation"), Error);
  }
}

TEST_CASE("grid search hits exact corner values") {
  const ErrorCertificate cert = grid_lower_bound(
      half_slope_merged(), uniform_box(1, 0.0, 1.0), Norm::linf, 11);
  CHECK(cert.lo == 0.5);
  CHECK(cert.hi == cert.lo);
  CHECK(!cert.certified);
  CHECK(cert.boxes_processed == 11);
  CHECK(cert.witness_input(0) == 1.0);
}

TEST_CASE("grid search validates and budgets") {
  const MergedNetwork m = half_slope_merged();
  const Box box = uniform_box(1, 0.0, 1.0);
  CHECK_THROWS_WITH_AS(grid_lower_bound(m, box, Norm::linf, 1),
                       doctest::Contains("invalid-grid"), Error);

  SolveBudget small;
  small.max_grid_points = 1000;
  CHECK_THROWS_WITH_AS(grid_lower_bound(m, box, Norm::linf, 1001, small),
                       doctest::Contains("budget-exceeded"), Error);

  SolveBudget no_time;
  no_time.wall_ms = 0.0;
  const ErrorCertificate partial =
      grid_lower_bound(m, box, Norm::linf, 10001, no_time);
  CHECK(partial.budget_exhausted);
  CHECK(partial.boxes_processed == 4096);
  CHECK(partial.lo >= 0.0);
}

TEST_CASE("quantization_error runs the full pipeline") {
  const ProblemSpec spec = half_slope_problem();
  for (Method method : {Method::moore_skelboe, Method::exact_1d}) {
    const ErrorCertificate cert = quantization_error(spec, method, 1e-6);
    CHECK(cert.certified);
    CHECK(cert.lo <= 0.5);
    CHECK(cert.lo >= 0.5 - 1e-6);
    CHECK(cert.hi >= 0.5);
    CHECK(cert.hi <= 0.5 + 1e-6);
    CHECK(cert.method == method);
  }
  SolveBudget budget;
  budget.grid_points_per_axis = 11;
  const ErrorCertificate g =
      quantization_error(spec, Method::grid, 1e-6, budget);
  CHECK(g.lo == 0.5);
  CHECK(!g.certified);
}

TEST_CASE("quantizing an unperturbed network certifies zero error") {
  ProblemSpec spec;
  spec.phi = single_layer_net(mat({{0.5}}), vec({0.25}), Activation::relu);
  spec.scheme = SchemePolicy::truncate(4);  // weights already 4-digit
  spec.box = uniform_box(1, -1.0, 1.0);
  const ErrorCertificate cert =
      quantization_error(spec, Method::moore_skelboe, 1e-3);
  CHECK(cert.certified);
  CHECK(cert.lo == 0.0);
  CHECK(cert.hi <= 1e-3);  // interval width cannot undercut the eps scale
}

TEST_CASE("quantization_error enforces method preconditions") {
  ProblemSpec tanh_spec = half_slope_problem();
  tanh_spec.phi.layers[0].activation = Activation::tanh;
  CHECK_THROWS_WITH_AS(quantization_error(tanh_spec, Method::exact_1d, 1e-6),
                       doctest::Contains("method-precondition-violated"),
                       Error);

  ProblemSpec wide;
  wide.phi = single_layer_net(mat({{1.0, 1.0}}), vec({0.0}), Activation::relu);
  wide.scheme = SchemePolicy::truncate(0);
  wide.box = uniform_box(2, 0.0, 1.0);
  CHECK_THROWS_WITH_AS(quantization_error(wide, Method::exact_1d, 1e-6),
                       doctest::Contains("method-precondition-violated"),
                       Error);
}

TEST_CASE("methods agree on small one-dimensional problems") {
  std::mt19937_64 seeds(101);
  for (int trial = 0; trial < 3; ++trial) {
    ProblemSpec spec;
    spec.phi = random_network({1, 5, 5, 1}, Activation::relu, seeds());
    spec.scheme = SchemePolicy::truncate(3);
    spec.box = uniform_box(1, 0.0, 1.0);
    SolveBudget budget;
    budget.max_boxes = 4'000'000;
    const ErrorCertificate ms =
        quantization_error(spec, Method::moore_skelboe, 1e-6, budget);
    const ErrorCertificate ex =
        quantization_error(spec, Method::exact_1d, 1e-6, budget);
    CHECK(ms.certified);
    CHECK(ex.certified);
    // both enclose the same supremum
    CHECK(std::max(ms.lo, ex.lo) <= std::min(ms.hi, ex.hi) + 1e-12);
    CHECK(std::abs(ms.hi - ex.hi) <= 1e-6 + 1e-8);
  }
}

TEST_CASE("structured evaluator matches the generic one") {
  std::mt19937_64 rng(61);
  for (Activation act : {Activation::relu, Activation::tanh,
                         Activation::sigmoid}) {
    const Network net = random_network({2, 7, 5, 2}, act, rng());
    const QuantizedNetwork q = quantize_network(net, SchemePolicy::truncate(3));
    const MergedNetwork m = merge(net, q);
    REQUIRE(MergedBoxEvaluator::compatible(m));
    const MergedBoxEvaluator fast(m);
    CHECK(fast.input_dim() == 2);

    for (int i = 0; i < 20; ++i) {
      Box box = Box(sample_in(rng, uniform_box(2, -2.0, 0.0)),
                    sample_in(rng, uniform_box(2, 0.0, 2.0)));
      const IntervalVector slow = interval_eval(m.net, box);
      Matrix out_lo, out_hi;
      fast.eval(box.lo, box.hi, out_lo, out_hi);
      REQUIRE(out_lo.rows() == slow.lo.size());
      for (Index r = 0; r < out_lo.rows(); ++r) {
        const double scale =
            1.0 + std::max(std::abs(slow.lo(r)), std::abs(slow.hi(r)));
        CHECK(std::abs(out_lo(r, 0) - slow.lo(r)) <= 1e-9 * scale);
        CHECK(std::abs(out_hi(r, 0) - slow.hi(r)) <= 1e-9 * scale);
      }

      // the norm upper end dominates concrete samples inside the box
      const Vector upper = fast.norm_upper(box.lo, box.hi, Norm::linf);
      for (int s = 0; s < 50; ++s) {
        const double v =
            point_norm(eval(m.net, sample_in(rng, box)), Norm::linf);
        CHECK(v <= upper(0) + 1e-12);
      }
    }
  }
}

TEST_CASE("batched evaluation matches per-column evaluation") {
  const Network net = random_network({3, 6, 4, 1}, Activation::relu, 83);
  const QuantizedNetwork q = quantize_network(net, SchemePolicy::truncate(2));
  const MergedNetwork m = merge(net, q);
  const MergedBoxEvaluator fast(m);

  std::mt19937_64 rng(84);
  const int cols = 17;
  Matrix lo(3, cols), hi(3, cols);
  for (int c = 0; c < cols; ++c) {
    lo.col(c) = sample_in(rng, uniform_box(3, -1.0, 0.0));
    hi.col(c) = sample_in(rng, uniform_box(3, 0.0, 1.0));
  }
  Matrix batch_lo, batch_hi;
  fast.eval(lo, hi, batch_lo, batch_hi);
  for (int c = 0; c < cols; ++c) {
    Matrix one_lo, one_hi;
    fast.eval(lo.col(c), hi.col(c), one_lo, one_hi);
    const double scale = 1.0 + one_hi.cwiseAbs().maxCoeff();
    CHECK((batch_lo.col(c) - one_lo.col(0)).cwiseAbs().maxCoeff() <=
          1e-12 * scale);
    CHECK((batch_hi.col(c) - one_hi.col(0)).cwiseAbs().maxCoeff() <=
          1e-12 * scale);
  }
}

TEST_CASE("the structured evaluator rejects non-merged layouts") {
  Network plain = random_network({2, 4, 1}, Activation::relu, 5);
  MergedNetwork fake;
  fake.net = plain;
  fake.source_dims = {2, 4, 1};
  CHECK(!MergedBoxEvaluator::compatible(fake));
  CHECK_THROWS_WITH_AS(MergedBoxEvaluator{fake},
                       doctest::Contains("architecture-mismatch"), Error);

  // tampering with a structural zero breaks compatibility
  const Network net = random_network({1, 4, 4, 1}, Activation::relu, 6);
  MergedNetwork m =
      merge(net, quantize_network(net, SchemePolicy::truncate(3)));
  REQUIRE(MergedBoxEvaluator::compatible(m));
  m.net.layers[1].weights(0, 7) = 1e-30;
  CHECK(!MergedBoxEvaluator::compatible(m));

  // the solver still accepts it through the generic evaluator
  const ErrorCertificate cert =
      moore_skelboe(m, uniform_box(1, 0.0, 1.0), Norm::linf, 1e-5);
  CHECK(cert.certified);
}

TEST_CASE("bound_band wraps outputs in the certified corridor") {
  const Network phi =
      single_layer_net(mat({{1.5}}), vec({0.0}), Activation::linear);
  ErrorCertificate cert;
  cert.hi = 0.5;
  cert.lo = 0.5;
  cert.norm = Norm::linf;

  const std::vector<Vector> samples = {vec({1.0}), vec({0.0})};
  const BandTable table =
      bound_band(phi, cert, uniform_box(1, 0.0, 1.0), samples);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0].u(0) == 1.0);
  CHECK(table.rows[0].phi(0) == 1.5);
  CHECK(table.rows[0].lower(0) == 1.0);
  CHECK(table.rows[0].upper(0) == 2.0);

  const std::string csv = band_csv(table);
  CHECK(csv == "u,phi,lower,upper\n1,1.5,1,2\n0,0,-0.5,0.5\n");
}

TEST_CASE("a zero-width certificate collapses the band onto the curve") {
  const Network phi = random_network({2, 4, 2}, Activation::relu, 15);
  ErrorCertificate cert;
  cert.hi = 0.0;
  const Box box = uniform_box(2, 0.0, 1.0);
  std::mt19937_64 rng(16);
  const std::vector<Vector> samples = {sample_in(rng, box)};
  const BandTable table = bound_band(phi, cert, box, samples);
  REQUIRE(table.rows.size() == 1);
  CHECK(same_bits(table.rows[0].lower, table.rows[0].phi));
  CHECK(same_bits(table.rows[0].upper, table.rows[0].phi));
}

TEST_CASE("bound_band rejects bad inputs") {
  const Network phi =
      single_layer_net(mat({{1.0}}), vec({0.0}), Activation::linear);
  ErrorCertificate cert;
  cert.hi = 0.1;
  const Box box = uniform_box(1, 0.0, 1.0);
  CHECK_THROWS_WITH_AS(bound_band(phi, cert, box, {vec({2.0})}),
                       doctest::Contains("sample-outside-box"), Error);
  ErrorCertificate bad;
  bad.hi = std::nan("");
  CHECK_THROWS_WITH_AS(bound_band(phi, bad, box, {vec({0.5})}),
                       doctest::Contains("invalid-certificate"), Error);
}
