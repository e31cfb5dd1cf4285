// Copyright 2026 The acmead Authors
// SPDX-License-Identifier: Apache-2.0

#include "acmead/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "acmead/aggregate.hpp"
#include "acmead/bench.hpp"
#include "acmead/core.hpp"
#include "acmead/detectors.hpp"
#include "acmead/explainer.hpp"
#include "acmead/shapref.hpp"
#include "acmead/synth.hpp"
#include "acmead/viz.hpp"

namespace acmead::cli {

namespace {

constexpr const char* kSeedEnv = "ACMEAD_SEED";

struct Io {
  std::istream& in;
  std::ostream& out;
};

Dataset read_dataset(const std::string& path, Io io) {
  if (path == "-") {
    std::ostringstream buf;
    buf << io.in.rdbuf();
    return parse_csv(buf.str());
  }
  return load_csv(path);
}

void write_text(const std::string& path, const std::string& text, Io io) {
  if (path == "-") {
    io.out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError(fmt::format("cannot write '{}'", path));
  file << text;
  if (!file) throw DataError(fmt::format("failed writing '{}'", path));
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv(kSeedEnv)) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError(fmt::format("{}='{}' is not an unsigned integer", kSeedEnv, env));
  }
  throw UsageError(fmt::format("--seed is required (or set {})", kSeedEnv));
}

// threads == 0 means every core. One thread selects the serial path.
Execution use_threads(int threads) {
  if (threads < 0) throw UsageError("--threads must be >= 0");
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
  return omp_get_max_threads() > 1 ? Execution::parallel : Execution::serial;
#else
  (void)threads;
  return Execution::serial;
#endif
}

std::size_t checked_row(const Dataset& data, std::size_t row) {
  if (row >= data.rows())
    throw UsageError(fmt::format("--row {} out of range ({} rows)", row, data.rows()));
  return row;
}

void check_columns(const Detector& model, const Dataset& data) {
  if (model.feature_names() != data.feature_names())
    throw DataError("input columns do not match the model's feature names");
}

std::string dump(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  Io io{in, out};
  CLI::App app{"acmead: perturbation-based explanations for anomaly detectors"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a detector and its threshold");
  std::string fit_input, fit_model, fit_out;
  double fit_contamination = 0.05;
  std::optional<std::uint64_t> fit_seed;
  IsolationForestParams if_params;
  LodaParams loda_params;
  fit->add_option("--input", fit_input, "Training CSV")->required();
  fit->add_option("--model", fit_model, "iforest or loda")
      ->required()
      ->check(CLI::IsMember({"iforest", "loda"}));
  fit->add_option("--contamination", fit_contamination, "Expected anomaly fraction");
  fit->add_option("--seed", fit_seed, "Random seed");
  fit->add_option("--out", fit_out, "Model JSON")->required();
  fit->add_option("--trees", if_params.trees, "Isolation Forest trees");
  fit->add_option("--subsample", if_params.subsample, "Isolation Forest subsample size");
  fit->add_option("--projections", loda_params.projections, "LODA projections");
  fit->add_option("--bins", loda_params.bins, "LODA histogram bins");

  // score
  auto* score = app.add_subcommand("score", "Score every row of a CSV");
  std::string score_model, score_input, score_out;
  score->add_option("--model", score_model, "Model JSON")->required();
  score->add_option("--input", score_input, "CSV to score")->required();
  score->add_option("--out", score_out, "Scores CSV")->required();

  // explain
  auto* expl = app.add_subcommand("explain", "Explain one row");
  std::string expl_model, expl_input, expl_out, expl_svg;
  std::string expl_weights = "0.3,0.3,0.2,0.2";
  std::size_t expl_row = 0, expl_levels = kDefaultQuantileLevels, expl_top = 10;
  int expl_threads = 0;
  SvgSize expl_size;
  expl->add_option("--model", expl_model, "Model JSON")->required();
  expl->add_option("--input", expl_input, "Reference CSV (quantiles and the row)")->required();
  expl->add_option("--row", expl_row, "Zero-based row index")->required();
  expl->add_option("--weights", expl_weights, "wD,wC,wQ,wR");
  expl->add_option("--quantiles", expl_levels, "Quantile levels K");
  expl->add_option("--out", expl_out, "Explanation JSON")->required();
  expl->add_option("--svg", expl_svg, "What-if chart SVG");
  expl->add_option("--top-k", expl_top, "Features shown in the chart");
  expl->add_option("--width", expl_size.width, "SVG width");
  expl->add_option("--height", expl_size.height, "SVG height");
  expl->add_option("--threads", expl_threads, "Worker threads (0 = all cores)");

  // overall
  auto* overall = app.add_subcommand("overall", "Rank histogram over detected anomalies");
  std::string ov_model, ov_input, ov_out, ov_svg;
  std::string ov_weights = "0.3,0.3,0.2,0.2";
  std::size_t ov_positions = 0, ov_levels = kDefaultQuantileLevels;
  double ov_cutoff = kDefaultMergeCutoff;
  bool ov_no_merge = false;
  int ov_threads = 0;
  SvgSize ov_size;
  overall->add_option("--model", ov_model, "Model JSON")->required();
  overall->add_option("--input", ov_input, "CSV")->required();
  overall->add_option("--positions", ov_positions, "Rank positions (default min(d, 10))");
  overall->add_option("--cutoff", ov_cutoff, "Merge features below this share into others");
  overall->add_flag("--no-merge", ov_no_merge, "Keep every feature");
  overall->add_option("--weights", ov_weights, "wD,wC,wQ,wR");
  overall->add_option("--quantiles", ov_levels, "Quantile levels K");
  overall->add_option("--out", ov_out, "Histogram JSON")->required();
  overall->add_option("--svg", ov_svg, "Stacked bar chart SVG");
  overall->add_option("--width", ov_size.width, "SVG width");
  overall->add_option("--height", ov_size.height, "SVG height");
  overall->add_option("--threads", ov_threads, "Worker threads (0 = all cores)");

  // shap
  auto* shap = app.add_subcommand("shap", "KernelSHAP explanation of one row");
  std::string shap_model, shap_input, shap_out;
  std::size_t shap_row = 0, shap_coalitions = 0;
  double shap_fraction = 0.1;
  std::optional<std::uint64_t> shap_seed;
  int shap_threads = 0;
  shap->add_option("--model", shap_model, "Model JSON")->required();
  shap->add_option("--input", shap_input, "CSV (background source and the row)")->required();
  shap->add_option("--row", shap_row, "Zero-based row index")->required();
  shap->add_option("--background-frac", shap_fraction, "Background sample fraction");
  shap->add_option("--coalitions", shap_coalitions, "Coalition budget (default 2d+2048)");
  shap->add_option("--seed", shap_seed, "Random seed");
  shap->add_option("--out", shap_out, "Attribution JSON")->required();
  shap->add_option("--threads", shap_threads, "Worker threads (0 = all cores)");

  // bench
  auto* bench = app.add_subcommand("bench", "Timing suites");
  std::string bench_suite, bench_out, bench_model = "iforest";
  std::size_t bench_n = 20000, bench_d = 50, bench_repeats = 3,
              bench_levels = kDefaultQuantileLevels, bench_coalitions = 0, bench_work = 2000;
  std::vector<double> bench_fractions = {0.05, 0.1, 0.2, 0.5};
  std::vector<std::size_t> bench_dims = {10, 20, 40};
  std::optional<std::uint64_t> bench_seed;
  int bench_threads = 1;
  bench->add_option("--suite", bench_suite, "background, dimension or head2head")
      ->required()
      ->check(CLI::IsMember({"background", "dimension", "head2head"}));
  bench->add_option("--out", bench_out, "Results CSV")->required();
  bench->add_option("--n", bench_n, "Synthetic training rows");
  bench->add_option("--dims", bench_d, "Synthetic dimensionality");
  bench->add_option("--model", bench_model, "iforest or loda")
      ->check(CLI::IsMember({"iforest", "loda"}));
  bench->add_option("--fractions", bench_fractions, "Background fractions (ascending)")
      ->delimiter(',');
  bench->add_option("--dim-values", bench_dims, "Dimensionalities (ascending)")
      ->delimiter(',');
  bench->add_option("--quantiles", bench_levels, "Quantile levels K");
  bench->add_option("--coalitions", bench_coalitions, "Coalition budget (default 2d+2048)");
  bench->add_option("--work", bench_work, "Fixed-cost scorer iterations (dimension suite)");
  bench->add_option("--repeats", bench_repeats, "Timed repeats (>= 3)");
  bench->add_option("--seed", bench_seed, "Random seed");
  bench->add_option("--threads", bench_threads, "Worker threads (1 = serial)");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic dataset");
  SynthSpec spec;
  std::string synth_out;
  std::optional<std::uint64_t> synth_seed;
  synth->add_option("--n", spec.n_normal, "Normal rows")->required();
  synth->add_option("--anomalies", spec.n_anomalies, "Anomalous rows")->required();
  synth->add_option("--dims", spec.dims, "Features")->required();
  synth->add_option("--root", spec.root_feature, "Zero-based root-cause feature")->required();
  synth->add_option("--shift", spec.shift, "Root shift in standard deviations")->required();
  synth->add_option("--seed", synth_seed, "Random seed");
  synth->add_option("--out", synth_out, "Output CSV (- for stdout)")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: " << msg << "\n";
    return 1;
  }

  try {
    if (*fit) {
      const Dataset data = read_dataset(fit_input, io);
      const auto seed = resolve_seed(fit_seed);
      const auto model = Detector::fit(data, fit_model, fit_contamination, seed, if_params,
                                       loda_params);
      write_text(fit_out, dump(model.to_json()), io);
    } else if (*score) {
      const auto model = Detector::load(score_model);
      const Dataset data = read_dataset(score_input, io);
      check_columns(model, data);
      std::string csv = "score,anomalous\n";
      for (double s : score_all(model, data)) {
        fmt::format_to(std::back_inserter(csv), "{},{}\n", s,
                       classify(s, model.threshold()) == Classification::anomalous ? 1 : 0);
      }
      write_text(score_out, csv, io);
    } else if (*expl) {
      const auto exec = use_threads(expl_threads);
      const auto weights = parse_weights(expl_weights);
      const auto model = Detector::load(expl_model);
      const Dataset data = read_dataset(expl_input, io);
      check_columns(model, data);
      const auto grid = build_quantile_grid(data, expl_levels);
      const std::size_t row = checked_row(data, expl_row);
      const auto e = explain(model, data.row(row), grid, weights, model.threshold(), exec);
      write_text(expl_out, dump(to_json(e, data.feature_names(), row)), io);
      if (!expl_svg.empty())
        write_text(expl_svg,
                   render_whatif(e, data.feature_names(), std::min(expl_top, data.dims()),
                                 expl_size),
                   io);
    } else if (*overall) {
      const auto exec = use_threads(ov_threads);
      const auto weights = parse_weights(ov_weights);
      const auto model = Detector::load(ov_model);
      const Dataset data = read_dataset(ov_input, io);
      check_columns(model, data);
      const auto grid = build_quantile_grid(data, ov_levels);
      const auto result = overall_importance(model, data, grid, weights, model.threshold(),
                                             ov_positions, exec);
      const RankHistogram hist =
          ov_no_merge ? result.histogram : merge_others(result.histogram, ov_cutoff);
      write_text(ov_out, dump(to_json(hist)), io);
      if (!ov_svg.empty()) write_text(ov_svg, render_rank_bars(hist, ov_size), io);
    } else if (*shap) {
      const auto exec = use_threads(shap_threads);
      const auto seed = resolve_seed(shap_seed);
      const auto model = Detector::load(shap_model);
      const Dataset data = read_dataset(shap_input, io);
      check_columns(model, data);
      const std::size_t row = checked_row(data, shap_row);
      const Dataset background = sample_background(data, shap_fraction, seed);
      const std::size_t budget = shap_coalitions ? shap_coalitions : default_coalitions(data.dims());
      const auto e = kernel_shap(model, data.row(row), background, budget, seed, exec);
      write_text(shap_out, dump(to_json(e, data.feature_names(), row, model.threshold())), io);
    } else if (*bench) {
      const auto exec = use_threads(bench_threads);
      const auto seed = resolve_seed(bench_seed);
      BenchConfig config;
      config.detector = bench_model == "iforest" ? "IF" : "LODA";
      config.repeats = bench_repeats;
      config.seed = seed;
      config.exec = Execution::serial;
      config.coalitions = bench_coalitions;
      std::vector<TimingRecord> records;

      if (bench_suite == "dimension") {
        config.detector = "fixed-cost";
        const std::size_t work = bench_work;
        const std::size_t n = bench_n;
        auto factory = [&](std::size_t d) {
          const Dataset data = generate({n, std::max<std::size_t>(1, n / 50), d, 0, 4.0, seed});
          return Workload{std::make_unique<FixedCostScorer>(d, work),
                          std::vector<double>(data.row(data.rows() - 1).begin(),
                                              data.row(data.rows() - 1).end()),
                          build_quantile_grid(data, bench_levels)};
        };
        records = dimension_sweep(factory, bench_dims, n, config);
        if (exec == Execution::parallel) {
          config.exec = Execution::parallel;
          auto par = dimension_sweep(factory, bench_dims, n, config);
          records.insert(records.end(), par.begin(), par.end());
        }
      } else {
        const std::size_t anomalies = std::max<std::size_t>(1, bench_n / 50);
        const Dataset data = generate({bench_n - std::min(bench_n - 1, anomalies),
                                       std::min(bench_n - 1, anomalies), bench_d, 0, 4.0, seed});
        const auto model = Detector::fit(data, bench_model, 0.02, seed);
        const auto scores = score_all(model, data, exec);
        const auto top = static_cast<std::size_t>(
            std::max_element(scores.begin(), scores.end()) - scores.begin());
        const auto grid = build_quantile_grid(data, bench_levels);
        config.grid = &grid;
        config.threshold = model.threshold();
        config.n = data.rows();
        const auto x = data.row(top);
        records.push_back(time_single_explanation(Method::acme_ad, model, x, config));
        if (exec == Execution::parallel) {
          BenchConfig par = config;
          par.exec = Execution::parallel;
          records.push_back(time_single_explanation(Method::acme_ad, model, x, par));
        }
        const std::vector<double> fractions =
            bench_suite == "head2head" ? std::vector<double>{0.1} : bench_fractions;
        auto sweep = background_sweep(model, x, data, fractions, config);
        records.insert(records.end(), sweep.begin(), sweep.end());
      }
      write_text(bench_out, to_csv(records), io);
      if (bench_out != "-") out << format_table(records);
    } else if (*synth) {
      spec.seed = resolve_seed(synth_seed);
      write_text(synth_out, to_csv(generate(spec)), io);
    }
  } catch (const Error& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: " << msg << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: " << msg << "\n";
    return static_cast<int>(ErrorKind::data);
  }
  return 0;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cin, std::cout, std::cerr);
}

}  // namespace acmead::cli
