// quantcert: certified upper bounds on the output error introduced by
// quantizing a fully-connected feedforward network. The pipeline is
//   gen -> quantize -> merge -> bound -> report
// and `repro-paper` runs the whole chain on the reference architecture.

#include "quantcert/certificate_io.hpp"
#include "quantcert/error.hpp"
#include "quantcert/interval.hpp"
#include "quantcert/merge.hpp"
#include "quantcert/model_io.hpp"
#include "quantcert/network.hpp"
#include "quantcert/quantization.hpp"
#include "quantcert/solver.hpp"
#include "quantcert/version.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace quantcert;

constexpr double kCrossMethodTau = 1e-9;

std::string g_provenance;  // verbatim flag echo, printed with every report

void print_provenance() { std::cout << g_provenance << "\n"; }

std::vector<Index> parse_dims(const std::string& text) {
  std::vector<Index> dims;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(item, &pos);
      if (pos != item.size() || v < 1) throw std::invalid_argument(item);
      dims.push_back(static_cast<Index>(v));
    } catch (const std::exception&) {
      throw Error("invalid-dims",
                  "dims must be comma-separated positive integers, got '" +
                      text + "'");
    }
  }
  if (dims.size() < 2) {
    throw Error("invalid-dims",
                "need at least an input and an output width, got '" + text +
                    "'");
  }
  return dims;
}

double parse_real(const std::string& item, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(item, &pos);
    if (pos != item.size()) throw std::invalid_argument(item);
    return v;
  } catch (const std::exception&) {
    throw Error("invalid-box",
                std::string(what) + " is not a number: '" + item + "'");
  }
}

// "lo:hi" broadcast to every axis, or one comma-separated pair per axis.
Box parse_box(const std::string& text, Index dim) {
  std::vector<Interval> pairs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw Error("invalid-box", "expected lo:hi, got '" + item + "'");
    }
    pairs.push_back(make_interval(parse_real(item.substr(0, colon), "box lo"),
                                  parse_real(item.substr(colon + 1), "box hi")));
  }
  if (pairs.empty()) throw Error("invalid-box", "empty --input-box");
  if (pairs.size() == 1) {
    return uniform_box(dim, pairs[0].lo, pairs[0].hi);
  }
  if (static_cast<Index>(pairs.size()) != dim) {
    throw Error("invalid-box",
                "box has " + std::to_string(pairs.size()) +
                    " pairs but the network expects " + std::to_string(dim));
  }
  Vector lo(dim), hi(dim);
  for (Index i = 0; i < dim; ++i) {
    lo[i] = pairs[static_cast<std::size_t>(i)].lo;
    hi[i] = pairs[static_cast<std::size_t>(i)].hi;
  }
  return Box{std::move(lo), std::move(hi)};
}

std::string sidecar_path(const std::string& out) {
  const std::string suffix = ".json";
  if (out.size() > suffix.size() &&
      out.compare(out.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return out.substr(0, out.size() - suffix.size()) + ".scheme.json";
  }
  return out + ".scheme.json";
}

std::string describe(const ErrorCertificate& cert) {
  std::ostringstream os;
  os << "method:           " << to_string(cert.method) << "\n"
     << "norm:             " << to_string(cert.norm) << "\n"
     << "lo:               " << format_double(cert.lo) << "\n"
     << "hi:               " << format_double(cert.hi) << "\n"
     << "gap:              " << format_double(cert.hi - cert.lo) << "\n"
     << "eps target:       " << format_double(cert.eps_target) << "\n"
     << "certified:        " << (cert.certified ? "yes" : "no") << "\n"
     << "budget exhausted: " << (cert.budget_exhausted ? "yes" : "no") << "\n";
  os << "witness:          [";
  for (Index i = 0; i < cert.witness_input.size(); ++i) {
    if (i) os << ", ";
    os << format_double(cert.witness_input[i]);
  }
  os << "]\n";
  os << "boxes processed:  " << cert.boxes_processed << "\n"
     << "max depth:        " << cert.max_depth << "\n"
     << "wall time ms:     " << cert.wall_time_ms << "\n";
  return os.str();
}

// Re-derives the certificate's own claims from the merged network: witness
// inside the box attaining lo, and lo <= hi. Returns an empty string when
// everything holds.
std::string recheck_certificate(const MergedNetwork& merged,
                                const ErrorCertificate& cert, const Box& box) {
  if (!(cert.lo <= cert.hi)) return "lo exceeds hi";
  if (cert.witness_input.size() != box.size()) {
    return "witness dimension does not match the box";
  }
  if (!box.contains(cert.witness_input, 1e-12)) {
    return "witness lies outside the box";
  }
  const double value =
      point_norm(eval(merged.net, cert.witness_input), cert.norm);
  if (std::abs(value - cert.lo) > 1e-9 * (1.0 + cert.lo)) {
    return "witness error norm " + format_double(value) +
           " does not match lo " + format_double(cert.lo);
  }
  return {};
}

ErrorCertificate solve(const MergedNetwork& merged, const Box& box, Norm norm,
                       Method method, double eps, const SolveBudget& budget) {
  switch (method) {
    case Method::moore_skelboe:
      return moore_skelboe(merged, box, norm, eps, budget);
    case Method::exact_1d: {
      if (merged.net.input_dim != 1) {
        throw Error("method-precondition-violated",
                    "exact-1d requires input dimension 1");
      }
      ErrorCertificate cert =
          exact_reach_1d(merged, Interval{box.lo[0], box.hi[0]}, norm)
              .certificate;
      cert.eps_target = eps;
      return cert;
    }
    case Method::grid:
      return grid_lower_bound(merged, box, norm, budget.grid_points_per_axis,
                              budget);
  }
  throw std::logic_error("unknown Method value");
}

std::vector<Vector> band_samples(const Box& box, std::uint64_t count) {
  std::vector<Vector> samples;
  samples.reserve(count);
  if (count == 0) return samples;
  if (box.size() == 1) {
    // Uniform sweep, endpoints included; this is the Fig-1-style 1-D slice.
    for (std::uint64_t k = 0; k < count; ++k) {
      const double w =
          count == 1 ? 0.5
                     : static_cast<double>(k) / static_cast<double>(count - 1);
      samples.push_back(
          Vector::Constant(1, box.lo[0] + w * (box.hi[0] - box.lo[0])));
    }
    return samples;
  }
  std::mt19937_64 rng(12345);  // fixed seed, band sampling is reproducible
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::uint64_t k = 0; k < count; ++k) {
    Vector u(box.size());
    for (Index i = 0; i < box.size(); ++i) {
      u[i] = box.lo[i] + unit(rng) * (box.hi[i] - box.lo[i]);
    }
    samples.push_back(std::move(u));
  }
  return samples;
}

struct GenOpts {
  std::string dims;
  std::string act = "relu";
  std::uint64_t seed = 0;
  std::string out;
};

int run_gen(const GenOpts& o) {
  const std::vector<Index> dims = parse_dims(o.dims);
  const Network net = random_network(dims, activation_from_string(o.act), o.seed);
  save_model_file(net, o.out);
  std::cout << "wrote " << o.out << ": dims " << o.dims << ", "
            << parameter_count(net) << " parameters\n";
  print_provenance();
  return 0;
}

struct QuantizeOpts {
  std::string model;
  std::string quant;
  std::string out;
  std::string stats_out;
};

int run_quantize(const QuantizeOpts& o) {
  const Network net = load_model_file(o.model);
  const SchemePolicy policy = SchemePolicy::parse(o.quant);
  const QuantizedNetwork q = quantize_network(net, policy);
  save_model_file(q.net, o.out);
  const std::string scheme_file = sidecar_path(o.out);
  write_text_file(scheme_file, save_schemes(q.schemes));

  const QuantizationStats stats = quantization_stats(q);
  const std::string report = format_stats(stats);
  std::cout << "wrote " << o.out << " and " << scheme_file << "\n"
            << report;
  if (!o.stats_out.empty()) write_text_file(o.stats_out, report);
  print_provenance();
  return 0;
}

struct MergeOpts {
  std::string model;
  std::string qmodel;
  std::string out;
};

int run_merge(const MergeOpts& o) {
  const Network phi = load_model_file(o.model);
  const Network phi_q = load_model_file(o.qmodel);
  const MergedNetwork merged = merge_networks(phi, phi_q);
  save_model_file(merged.net, o.out);
  std::cout << "wrote " << o.out << "\n"
            << merged_shape_report(merged).text;
  print_provenance();
  return 0;
}

struct BoundOpts {
  std::string model;
  std::string qmodel;
  std::string quant;
  std::string box_text = "0:1";
  std::string norm = "linf";
  std::string method = "moore-skelboe";
  double eps = 1e-4;
  std::uint64_t max_boxes = 1'000'000;
  double budget_ms = 60'000.0;
  std::uint64_t grid_points = 101;
  int workers = 1;
  std::string out;
  std::string band;
  std::uint64_t band_count = 500;
};

int run_bound(const BoundOpts& o) {
  if (o.qmodel.empty() == o.quant.empty()) {
    throw Error("invalid-arguments",
                "give exactly one of --qmodel and --quant");
  }
  const Network phi = load_model_file(o.model);
  const MergedNetwork merged =
      o.qmodel.empty()
          ? merge(phi, quantize_network(phi, SchemePolicy::parse(o.quant)))
          : merge_networks(phi, load_model_file(o.qmodel));

  const Box box = parse_box(o.box_text, phi.input_dim);
  const Norm norm = norm_from_string(o.norm);
  const Method method = method_from_string(o.method);

  SolveBudget budget;
  budget.max_boxes = o.max_boxes;
  budget.wall_ms = o.budget_ms;
  budget.grid_points_per_axis = o.grid_points;
  budget.workers = o.workers;

  const ErrorCertificate cert = solve(merged, box, norm, method, o.eps, budget);

  if (method == Method::grid) {
    std::cout << "warning: grid search is an uncertified lower bound; "
                 "hi carries no guarantee\n";
  }
  if (cert.budget_exhausted) {
    std::cout << "warning: budget exhausted before reaching the eps target; "
                 "the enclosure is sound but wide\n";
  }
  std::cout << describe(cert);
  print_provenance();

  const std::string problem = recheck_certificate(merged, cert, box);
  if (!problem.empty()) {
    std::cerr << "error: certificate-invariant-violated: " << problem << "\n";
    return 1;
  }

  if (!o.out.empty()) {
    save_certificate_file(cert, o.out);
    std::cout << "wrote " << o.out << "\n";
  }
  if (!o.band.empty()) {
    const BandTable table =
        bound_band(phi, cert, box, band_samples(box, o.band_count));
    write_text_file(o.band, band_csv(table));
    std::cout << "wrote " << o.band << " (" << table.rows.size()
              << " samples)\n";
  }
  return 0;
}

struct ReproOpts {
  std::uint64_t seed = 7;
  std::string out_dir = "repro-out";
  double eps = 1e-4;
  double budget_ms = 300'000.0;
  int workers = 1;
};

int run_repro(const ReproOpts& o) {
  namespace fs = std::filesystem;
  fs::create_directories(o.out_dir);
  const auto path = [&](const char* name) {
    return (fs::path(o.out_dir) / name).string();
  };
  std::ostringstream summary;
  summary << "quantcert " << kToolVersion << " reference reproduction\n"
          << "seed " << o.seed << ", eps " << format_double(o.eps) << "\n\n";

  const std::vector<Index> dims = {1, 50, 50, 50, 1};
  const Network phi = random_network(dims, Activation::relu, o.seed);
  save_model_file(phi, path("model.json"));
  summary << "network: dims 1,50,50,50,1 relu, " << parameter_count(phi)
          << " parameters\n";

  const SchemePolicy policy = SchemePolicy::truncate(4);
  const QuantizedNetwork q = quantize_network(phi, policy);
  save_model_file(q.net, path("qmodel.json"));
  write_text_file(sidecar_path(path("qmodel.json")), save_schemes(q.schemes));
  const QuantizationStats stats = quantization_stats(q);
  summary << "\nquantization (truncate:4):\n" << format_stats(stats);

  const MergedNetwork merged = merge(phi, q);
  save_model_file(merged.net, path("merged.json"));
  summary << "\nmerged network:\n" << merged_shape_report(merged).text;

  const Box box = uniform_box(1, 0.0, 1.0);

  const ErrorCertificate cert_1d =
      solve(merged, box, Norm::linf, Method::exact_1d, o.eps, SolveBudget{});
  save_certificate_file(cert_1d, path("certificate_exact1d.json"));
  summary << "\nexact-1d:\n" << describe(cert_1d);

  SolveBudget budget;
  budget.max_boxes = 100'000'000;  // the wall clock is the real limit here
  budget.wall_ms = o.budget_ms;
  budget.workers = o.workers;
  const ErrorCertificate cert_ms =
      solve(merged, box, Norm::linf, Method::moore_skelboe, o.eps, budget);
  save_certificate_file(cert_ms, path("certificate_ms.json"));
  summary << "\nmoore-skelboe:\n" << describe(cert_ms);

  const std::vector<Vector> samples = band_samples(box, 500);
  const BandTable table = bound_band(phi, cert_1d, box, samples);
  write_text_file(path("band.csv"), band_csv(table));

  // The checks the run must pass before it may exit 0.
  int failures = 0;
  const auto check = [&](bool ok, const std::string& what) {
    summary << (ok ? "[ok]   " : "[FAIL] ") << what << "\n";
    if (!ok) ++failures;
  };
  summary << "\nchecks:\n";
  check(recheck_certificate(merged, cert_1d, box).empty(),
        "exact-1d certificate is self-consistent");
  check(recheck_certificate(merged, cert_ms, box).empty(),
        "moore-skelboe certificate is self-consistent");
  check(!cert_ms.budget_exhausted && cert_ms.hi - cert_ms.lo <= o.eps,
        "moore-skelboe reached the eps target");
  const double rho = cert_1d.lo;
  check(rho >= cert_ms.lo - kCrossMethodTau &&
            rho <= cert_ms.hi + kCrossMethodTau,
        "exact rho lies inside the moore-skelboe enclosure");

  std::size_t violations = 0;
  for (const BandRow& row : table.rows) {
    const Vector qy = eval(q.net, row.u);
    for (Index j = 0; j < qy.size(); ++j) {
      if (qy[j] < row.lower[j] || qy[j] > row.upper[j]) ++violations;
    }
  }
  check(violations == 0, "band contains the quantized outputs (500 samples)");
  check(stats.compressed_serialized_bytes < stats.origin_serialized_bytes,
        "quantized model file is smaller than the original");

  summary << "\nrho (exact-1d) = " << format_double(rho) << "\n"
          << "enclosure (ms) = [" << format_double(cert_ms.lo) << ", "
          << format_double(cert_ms.hi) << "]\n"
          << g_provenance << "\n";

  write_text_file(path("summary.txt"), summary.str());
  std::cout << summary.str();
  std::cout << "wrote " << o.out_dir << "/{model,qmodel,merged}.json, "
            << "certificates, band.csv, summary.txt\n";
  return failures == 0 ? 0 : 1;
}

struct ReportOpts {
  std::string cert;
  std::string model;
  std::string qmodel;
};

int run_report(const ReportOpts& o) {
  const ErrorCertificate cert = load_certificate_file(o.cert);
  std::cout << describe(cert);

  if (o.model.empty() != o.qmodel.empty()) {
    throw Error("invalid-arguments",
                "--model and --qmodel must be given together");
  }
  if (!o.model.empty()) {
    const Network phi = load_model_file(o.model);
    const MergedNetwork merged =
        merge_networks(phi, load_model_file(o.qmodel));
    if (cert.witness_input.size() != merged.net.input_dim) {
      throw Error("dimension-mismatch",
                  "witness does not match the model input dimension");
    }
    const double value =
        point_norm(eval(merged.net, cert.witness_input), cert.norm);
    std::cout << "witness recheck:  " << format_double(value) << "\n";
    if (std::abs(value - cert.lo) > 1e-9 * (1.0 + cert.lo)) {
      std::cerr << "error: certificate-invariant-violated: recomputed "
                   "witness norm does not match lo\n";
      return 1;
    }
    std::cout << "witness recheck matches lo within 1e-9\n";
  }
  print_provenance();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certified quantization error bounds for feedforward networks"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  {
    std::ostringstream os;
    os << "provenance: quantcert " << kToolVersion;
    for (int i = 1; i < argc; ++i) os << ' ' << argv[i];
    g_provenance = os.str();
  }

  int rc = 0;

  GenOpts gen;
  auto* cmd_gen = app.add_subcommand("gen", "generate a random network");
  cmd_gen->add_option("--dims", gen.dims,
                      "comma-separated layer widths, e.g. 1,50,50,50,1")
      ->required();
  cmd_gen->add_option("--act", gen.act, "hidden activation")
      ->check(CLI::IsMember({"relu", "tanh", "sigmoid", "linear"}))
      ->capture_default_str();
  cmd_gen->add_option("--seed", gen.seed, "rng seed")->capture_default_str();
  cmd_gen->add_option("--out", gen.out, "output model file")->required();
  cmd_gen->callback([&] { rc = run_gen(gen); });

  QuantizeOpts quant;
  auto* cmd_quant =
      app.add_subcommand("quantize", "quantize a network's parameters");
  cmd_quant->add_option("--model", quant.model, "input model file")->required();
  cmd_quant
      ->add_option("--quant", quant.quant,
                   "policy, truncate:<digits> or affine:<bits>")
      ->required();
  cmd_quant->add_option("--out", quant.out, "output model file")->required();
  cmd_quant->add_option("--stats-out", quant.stats_out,
                        "also write the size report to this file");
  cmd_quant->callback([&] { rc = run_quantize(quant); });

  MergeOpts mrg;
  auto* cmd_merge = app.add_subcommand(
      "merge", "build the difference network of a model pair");
  cmd_merge->add_option("--model", mrg.model, "original model")->required();
  cmd_merge->add_option("--qmodel", mrg.qmodel, "quantized model")->required();
  cmd_merge->add_option("--out", mrg.out, "output model file")->required();
  cmd_merge->callback([&] { rc = run_merge(mrg); });

  BoundOpts bound;
  auto* cmd_bound = app.add_subcommand(
      "bound", "certify the worst-case quantization error over a box");
  cmd_bound->add_option("--model", bound.model, "original model")->required();
  cmd_bound->add_option("--qmodel", bound.qmodel,
                        "quantized model (alternative to --quant)");
  cmd_bound->add_option("--quant", bound.quant,
                        "quantize in-process, truncate:<d> or affine:<b>");
  cmd_bound
      ->add_option("--input-box", bound.box_text,
                   "lo:hi broadcast, or one pair per axis comma-separated")
      ->capture_default_str();
  cmd_bound->add_option("--norm", bound.norm, "output norm")
      ->check(CLI::IsMember({"linf", "l2"}))
      ->capture_default_str();
  cmd_bound->add_option("--method", bound.method, "solver")
      ->check(CLI::IsMember({"moore-skelboe", "exact-1d", "grid"}))
      ->capture_default_str();
  cmd_bound->add_option("--eps", bound.eps, "target gap hi - lo")
      ->capture_default_str();
  cmd_bound->add_option("--max-boxes", bound.max_boxes, "box budget")
      ->capture_default_str();
  cmd_bound->add_option("--budget-ms", bound.budget_ms, "wall-time budget")
      ->envname("QUANTCERT_BUDGET_MS")
      ->capture_default_str();
  cmd_bound
      ->add_option("--grid-points", bound.grid_points,
                   "points per axis for --method grid")
      ->capture_default_str();
  cmd_bound->add_option("--workers", bound.workers, "solver worker threads")
      ->capture_default_str();
  cmd_bound->add_option("--out", bound.out, "write the certificate here");
  cmd_bound->add_option("--band", bound.band,
                        "write a bound-band CSV over box samples");
  cmd_bound->add_option("--band-samples", bound.band_count, "band sample count")
      ->capture_default_str();
  cmd_bound->callback([&] { rc = run_bound(bound); });

  ReproOpts repro;
  auto* cmd_repro = app.add_subcommand(
      "repro-paper",
      "run the full reference workflow: 1x50x50x50x1 relu, truncate:4, "
      "box [0,1], exact-1d and moore-skelboe, 500-point band");
  cmd_repro->add_option("--seed", repro.seed, "rng seed")
      ->capture_default_str();
  cmd_repro->add_option("--out-dir", repro.out_dir, "artifact directory")
      ->capture_default_str();
  cmd_repro->add_option("--eps", repro.eps, "moore-skelboe gap target")
      ->capture_default_str();
  cmd_repro->add_option("--budget-ms", repro.budget_ms, "wall-time budget")
      ->envname("QUANTCERT_BUDGET_MS")
      ->capture_default_str();
  cmd_repro->add_option("--workers", repro.workers, "solver worker threads")
      ->capture_default_str();
  cmd_repro->callback([&] { rc = run_repro(repro); });

  ReportOpts report;
  auto* cmd_report = app.add_subcommand(
      "report", "print a certificate, optionally recheck it against models");
  cmd_report->add_option("--cert", report.cert, "certificate file")
      ->required();
  cmd_report->add_option("--model", report.model, "original model");
  cmd_report->add_option("--qmodel", report.qmodel, "quantized model");
  cmd_report->callback([&] { rc = run_report(report); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
