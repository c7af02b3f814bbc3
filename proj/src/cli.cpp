#include "cachendt/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>
#include <utility>

#include "CLI11.hpp"
#include "json.hpp"

#include "cachendt/bounds.hpp"
#include "cachendt/caching.hpp"
#include "cachendt/converse_check.hpp"
#include "cachendt/core_model.hpp"
#include "cachendt/errors.hpp"
#include "cachendt/phy_sim.hpp"
#include "cachendt/report_io.hpp"

#ifndef CACHENDT_VERSION
#define CACHENDT_VERSION "0.0.0"
#endif

namespace cachendt {
namespace {

using nlohmann::json;

struct Run {
  Run(std::ostream& o, std::ostream& e, std::vector<std::string> args)
      : out(o), err(e), argv(std::move(args)) {}

  std::ostream& out;
  std::ostream& err;
  std::vector<std::string> argv;
  bool write_manifest = true;
  std::string path_suffix;  // appended to every output path (replay)

  std::string subcommand;
  json config = json::object();
  std::optional<std::uint64_t> seed;
  std::vector<OutputDigest> produced;

  std::string output_path(const std::string& base) const { return base + path_suffix; }

  void emit(const std::string& path, const std::string& text) {
    write_text_file(path, text);
    produced.push_back({path, sha256_hex(text)});
  }

  void finish(const std::string& out_base) {
    if (!write_manifest || out_base.empty()) return;
    RunManifest m;
    m.tool_version = CACHENDT_VERSION;
    m.command = argv;
    m.subcommand = subcommand;
    m.config = config;
    m.master_seed = seed;
    m.timestamp = utc_timestamp();
    m.outputs = produced;
    write_text_file(out_base + ".manifest.json", manifest_to_json(m).dump(2) + "\n");
  }
};

struct BoundsOptions {
  int m = 0;
  int k = 0;
  int n = 0;
  std::string csi = "perfect";
  std::string grid_step;
  std::string out;
  bool json = false;
};

struct SimulateOptions {
  int m = 0;
  int k = 0;
  int n = 0;
  std::string mu;
  std::string scheme;
  std::string snr_grid = "20,30,40,50,60";
  int trials = 200;
  std::uint64_t seed = 0;
  int threads = 0;
  std::int64_t file_bits = 2400;
  std::string out;
};

struct ConverseOptions {
  int m = 0;
  int k = 0;
  std::string ell = "all";
  int trials = 1000;
  std::uint64_t seed = 0;
  int noise_samples = 100000;
  int noise_channels = 4;
  std::string out;
};

std::vector<double> parse_snr_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      grid.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::logic_error&) {
      throw ArgumentError("bad SNR value '" + cell + "'");
    }
  }
  if (grid.empty()) throw ArgumentError("empty SNR grid");
  return grid;
}

SchemeKind parse_scheme(const std::string& s) {
  if (s == "zf") return SchemeKind::ZeroForcing;
  if (s == "ia") return SchemeKind::XChannelIA2x2;
  if (s == "tdma") return SchemeKind::Tdma;
  if (s == "hybrid") return SchemeKind::HybridShare;
  throw ArgumentError("unknown scheme '" + s + "' (zf, ia, tdma, hybrid)");
}

// NDT the scheme reaches at high SNR, for the summary.
std::optional<Rational> scheme_target(const SystemConfig& config, SchemeKind kind,
                                      const Rational& alpha) {
  const int m = config.num_ens();
  const int k = config.num_users();
  switch (kind) {
    case SchemeKind::ZeroForcing: return Rational(k, std::min(m, k));
    case SchemeKind::XChannelIA2x2: return Rational(m + k - 1, m);
    case SchemeKind::Tdma: return Rational(k);
    case SchemeKind::HybridShare:
      return alpha * Rational(m + k - 1, m) + (Rational(1) - alpha) * Rational(k, std::min(m, k));
  }
  return std::nullopt;
}

int cmd_bounds(const BoundsOptions& o, Run& run) {
  const int n = o.n > 0 ? o.n : o.k;
  const SystemConfig base = validate_config(o.m, o.k, n, Rational(1, std::max(o.m, 1)), 1);
  const CsiMode mode = parse_csi_mode(o.csi);
  const Rational step = o.grid_step.empty() ? default_grid_step(base) : Rational::parse(o.grid_step);
  run.config = {{"m", o.m}, {"k", o.k}, {"n", n}, {"csi", o.csi}, {"grid_step", step.str()},
                {"format", o.json ? "json" : "csv"}};

  const std::vector<Rational> grid = mu_grid(base, step);
  const TradeoffTable table = tradeoff_sweep(base, grid, mode);

  std::ostringstream text;
  if (o.json) {
    text << tradeoff_to_json(table).dump(2) << '\n';
  } else {
    write_tradeoff_csv(text, table);
  }
  if (o.out.empty()) {
    run.out << text.str();
  } else {
    run.emit(run.output_path(o.out), text.str());
  }

  if (mode == CsiMode::Perfect) {
    run.out << "tight regions: " << format_regions(optimality_regions(base)) << '\n';
  } else {
    run.out << "tight regions: none (no converse for csi=" << to_string(mode) << ")\n";
  }
  run.finish(o.out);
  return kExitOk;
}

int cmd_simulate(const SimulateOptions& o, Run& run) {
  const int n = o.n > 0 ? o.n : o.k;
  const Rational mu = Rational::parse(o.mu);
  const SystemConfig config = validate_config(o.m, o.k, n, mu, o.file_bits);
  const SchemeKind kind = parse_scheme(o.scheme);
  const std::vector<double> grid = parse_snr_grid(o.snr_grid);
  const int threads = o.threads > 0 ? o.threads
                                    : std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  run.seed = o.seed;
  run.config = {{"m", o.m},         {"k", o.k},           {"n", n},
                {"mu", mu.str()},   {"l", o.file_bits},   {"scheme", o.scheme},
                {"snr_grid", grid}, {"trials", o.trials}};

  const FileLibrary library = random_library(config, derive_seed(o.seed, ~std::uint64_t{0}));
  CacheAllocation allocation;
  if (mu == Rational(1)) {
    allocation = full_placement(library, config);
  } else if (mu == Rational(1, o.m)) {
    allocation = split_placement(library, config);
  } else {
    allocation = shared_placement(library, config, mu);
  }
  const TransmissionScheme scheme{kind, allocation.alpha};
  const DemandVector demand = worst_case_demand(config);

  const auto points = run_campaign(config, allocation, scheme, demand, grid, o.trials, o.seed, threads);
  const EmpiricalNdt est = estimate_ndt(points);

  json summary;
  summary["config"] = run.config;
  summary["seed"] = o.seed;
  summary["placement"] = std::string(to_string(allocation.policy));
  summary["alpha"] = allocation.alpha.str();
  summary["snr_grid"] = est.snr_grid;
  summary["mean_sum_rate"] = est.mean_sum_rate;
  summary["dof_estimate"] = est.dof_estimate;
  summary["ndt_estimate"] = est.ndt_estimate;
  summary["fit_residual"] = est.fit_residual;
  const LowerBound lb = ndt_lower_bound(config, mu);
  const TradeoffCurve envelope = convex_envelope(achievable_points(config, CsiMode::Perfect));
  json analytic;
  analytic["lower_bound"] = lb.value.str();
  analytic["lower_bound_ell_star"] = lb.ell_star;
  analytic["upper_bound_perfect_csi"] = envelope.evaluate(mu).str();
  if (const auto target = scheme_target(config, kind, allocation.alpha)) {
    analytic["scheme_ndt"] = target->str();
  }
  summary["analytic"] = analytic;
  const std::string summary_text = summary.dump(2) + "\n";

  if (o.out.empty()) {
    run.out << summary_text;
  } else {
    std::ostringstream csv;
    write_simulation_csv(csv, points);
    run.emit(run.output_path(o.out), csv.str());
    run.emit(run.output_path(o.out + ".summary.json"), summary_text);
    run.out << "dof_estimate=" << est.dof_estimate << " ndt_estimate=" << est.ndt_estimate
            << " (lower bound " << lb.value << ", scheme " << analytic["scheme_ndt"].get<std::string>()
            << ")\n";
  }
  run.finish(o.out);
  return kExitOk;
}

int cmd_verify_converse(const ConverseOptions& o, Run& run) {
  std::vector<int> ells;
  if (o.ell != "all") {
    try {
      std::size_t used = 0;
      ells.push_back(std::stoi(o.ell, &used));
      if (used != o.ell.size()) throw std::invalid_argument(o.ell);
    } catch (const std::logic_error&) {
      throw ArgumentError("--ell must be 'all' or an integer");
    }
  }
  run.seed = o.seed;
  run.config = {{"m", o.m},
                {"k", o.k},
                {"ell", o.ell},
                {"trials", o.trials},
                {"noise_samples", o.noise_samples},
                {"noise_channels", o.noise_channels}};

  const ConverseReport report =
      verify_converse(o.m, o.k, ells, o.trials, o.seed, o.noise_samples, o.noise_channels);
  const std::string text = converse_to_json(report).dump(2) + "\n";
  if (o.out.empty()) {
    run.out << text;
  } else {
    run.emit(run.output_path(o.out), text);
  }
  for (const auto& l : report.levels) {
    run.out << "ell=" << l.ell << " residual=" << l.max_reconstruction_residual
            << " logdet_err=" << l.max_logdet_oracle_error
            << " noise_cov_err=" << l.noise_cov_max_normalized_error
            << " lambda_literal_violations=" << l.lambda_literal_violations << ' '
            << (l.pass ? "PASS" : "FAIL") << '\n';
  }
  run.finish(o.out);
  return report.pass ? kExitOk : kExitTolerance;
}

int dispatch(const std::vector<std::string>& args, Run& run);

int cmd_replay(const std::string& manifest_path, Run& run) {
  const RunManifest m = manifest_from_json([&] {
    try {
      return json::parse(read_text_file(manifest_path));
    } catch (const json::parse_error& e) {
      throw ArgumentError(std::string("manifest is not valid JSON: ") + e.what());
    }
  }());
  if (m.subcommand == "replay" || m.command.empty()) {
    throw ArgumentError("manifest does not describe a replayable command");
  }
  std::ostringstream sink;
  Run inner{sink, run.err, m.command};
  inner.write_manifest = false;
  inner.path_suffix = ".replay";
  const int code = dispatch(m.command, inner);
  if (code != kExitOk && code != kExitTolerance) return code;

  bool same = inner.produced.size() == m.outputs.size();
  for (std::size_t i = 0; i < m.outputs.size(); ++i) {
    const bool ok = i < inner.produced.size() &&
                    inner.produced[i].path == m.outputs[i].path + inner.path_suffix &&
                    inner.produced[i].sha256 == m.outputs[i].sha256;
    run.out << (ok ? "identical " : "DIFFERS   ") << m.outputs[i].path << '\n';
    same = same && ok;
  }
  for (const auto& p : inner.produced) std::remove(p.path.c_str());
  return same ? kExitOk : kExitTolerance;
}

int dispatch(const std::vector<std::string>& args, Run& run) {
  CLI::App app{"Storage/latency tradeoff bounds, delivery simulation and converse checks for "
               "cache-aided edge networks",
               "cachendt"};
  app.set_version_flag("--version", std::string(CACHENDT_VERSION));
  app.require_subcommand(1);

  BoundsOptions b;
  auto* bounds = app.add_subcommand("bounds", "exact NDT lower/upper bound sweep over mu");
  bounds->add_option("--m", b.m, "edge nodes")->required();
  bounds->add_option("--k", b.k, "users")->required();
  bounds->add_option("--n", b.n, "library size (default K)");
  bounds->add_option("--csi", b.csi, "perfect | delayed | nocsi")->capture_default_str();
  bounds->add_option("--grid-step", b.grid_step, "mu step p/q (default 1/(12MK))");
  bounds->add_option("--out", b.out, "table path (stdout if omitted)");
  bounds->add_flag("--json", b.json, "write JSON instead of CSV");

  SimulateOptions s;
  auto* sim = app.add_subcommand("simulate", "Monte-Carlo delivery simulation and NDT estimate");
  sim->add_option("--m", s.m, "edge nodes")->required();
  sim->add_option("--k", s.k, "users")->required();
  sim->add_option("--n", s.n, "library size (default K)");
  sim->add_option("--mu", s.mu, "fractional cache size p/q")->required();
  sim->add_option("--scheme", s.scheme, "zf | ia | tdma | hybrid")->required();
  sim->add_option("--snr-grid", s.snr_grid, "comma-separated dB values")->capture_default_str();
  sim->add_option("--trials", s.trials, "trials per SNR point")->capture_default_str();
  sim->add_option("--seed", s.seed, "master seed")->required();
  sim->add_option("--threads", s.threads, "worker threads (default: all cores)");
  sim->add_option("--l", s.file_bits, "file length in bits")->capture_default_str();
  sim->add_option("--out", s.out, "per-SNR CSV path; summary goes to <out>.summary.json");

  ConverseOptions c;
  auto* conv = app.add_subcommand("verify-converse", "numerical checks of the converse algebra");
  conv->add_option("--m", c.m, "edge nodes")->required();
  conv->add_option("--k", c.k, "users")->required();
  conv->add_option("--ell", c.ell, "all | value")->capture_default_str();
  conv->add_option("--trials", c.trials, "random channels per ell")->capture_default_str();
  conv->add_option("--seed", c.seed, "master seed")->required();
  conv->add_option("--noise-samples", c.noise_samples, "samples per noise covariance check")
      ->capture_default_str();
  conv->add_option("--noise-channels", c.noise_channels, "channels per ell for the noise check")
      ->capture_default_str();
  conv->add_option("--out", c.out, "JSON report path");

  std::string manifest_path;
  auto* replay = app.add_subcommand("replay", "re-run a manifest and compare output digests");
  replay->add_option("--manifest", manifest_path, "manifest JSON path")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, run.out, run.err);
    return code == 0 ? kExitOk : kExitArgument;
  }

  if (bounds->parsed()) {
    run.subcommand = "bounds";
    return cmd_bounds(b, run);
  }
  if (sim->parsed()) {
    run.subcommand = "simulate";
    return cmd_simulate(s, run);
  }
  if (conv->parsed()) {
    run.subcommand = "verify-converse";
    return cmd_verify_converse(c, run);
  }
  run.subcommand = "replay";
  return cmd_replay(manifest_path, run);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Run run{out, err, args};
  try {
    return dispatch(args, run);
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitArgument;
  } catch (const RangeError& e) {
    err << "error: " << e.what() << '\n';
    return kExitArgument;
  } catch (const InsufficientDataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitArgument;
  } catch (const OverflowError& e) {
    err << "error: " << e.what() << '\n';
    return kExitArgument;
  } catch (const FeasibilityError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const DemandError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const UnsupportedError& e) {
    err << "error: UnsupportedError: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const CompatibilityError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace cachendt
