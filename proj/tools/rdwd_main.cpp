// Command-line surface for the radial DWD toolkit.
//
//   rdwd train <input.csv> [--method rdwd|md|ldwd] [flags] --out model.txt
//   rdwd predict <model> <input.csv> [--out scores.csv]
//   rdwd simulate <scenario> [--seed N] [--full] [--out prefix]
//   rdwd report <model> <input.csv> [--seed N] [--out prefix]
//
// Exit codes: 0 success, 2 input/flag parse error, 3 fit failure,
// 4 dimension mismatch, 5 scenario parse failure.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rdwd/baselines.hpp"
#include "rdwd/core.hpp"
#include "rdwd/io.hpp"
#include "rdwd/radial.hpp"
#include "rdwd/simlab.hpp"

namespace {

using namespace rdwd;

constexpr int kExitParse = 2;
constexpr int kExitFit = 3;
constexpr int kExitDimension = 4;
constexpr int kExitScenario = 5;

int fail(int code, const std::string& message) {
  std::cerr << "error: " << message << '\n';
  return code;
}

bool write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << bytes;
  return static_cast<bool>(out) && static_cast<bool>(out.flush());
}

// --- shared option bundles --------------------------------------------------------

struct TrainOpts {
  std::string input;
  std::string method = "rdwd";
  double penalty = 0.0;  // <= 0: data-driven default
  double eps = 1e-4;
  double delta = 1e-3;
  std::string weights = "auto";
  std::string init = "mean";
  bool no_normalize = false;
  std::string out = "model.txt";
};

struct PredictOpts {
  std::string model;
  std::string input;
  bool no_normalize = false;
  std::string out;  // empty: stdout
};

struct SimulateOpts {
  std::string scenario;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool full = false;
  std::string out = "sim";
};

struct ReportOpts {
  std::string model;
  std::string input;
  std::uint64_t seed = 0;
  bool no_normalize = false;
  std::string out = "report";
};

// "auto" or "w+,w-" with both weights positive.
std::optional<std::pair<double, double>> parse_weights(const std::string& s) {
  if (s == "auto") return std::nullopt;
  const auto comma = s.find(',');
  if (comma == std::string::npos)
    throw std::invalid_argument("--weights expects auto or w+,w-");
  auto one = [](const std::string& token) {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size() || !(v > 0.0))
      throw std::invalid_argument("--weights entries must be positive numbers");
    return v;
  };
  return std::make_pair(one(s.substr(0, comma)), one(s.substr(comma + 1)));
}

// --- train ------------------------------------------------------------------------

int cmd_train(const TrainOpts& opt) {
  std::optional<std::pair<double, double>> weights;
  TrainingSet data;
  try {
    weights = parse_weights(opt.weights);
    std::ifstream in(opt.input);
    if (!in) return fail(kExitParse, "cannot open input '" + opt.input + "'");
    data = io::to_training_set(io::read_coverage_rows(in), !opt.no_normalize);
  } catch (const std::exception& e) {
    return fail(kExitParse, e.what());
  }

  std::ostringstream model_text, summary;
  try {
    if (opt.method == "rdwd") {
      RdwdConfig cfg;
      if (opt.penalty > 0.0) cfg.penalty = opt.penalty;
      cfg.stop_eps = opt.eps;
      cfg.step_length = opt.delta;
      cfg.weights = weights;
      cfg.init_mode = opt.init == "median" ? RdwdConfig::Init::MedianPlus
                                           : RdwdConfig::Init::MeanPlus;
      const auto [model, cert] = radial::fit(data, cfg);
      const double objective = radial::exact_objective(
          data, model.center, model.radius, *model.config_snapshot.penalty,
          *model.config_snapshot.weights);
      double kkt_max = 0.0;
      for (const auto& [key, value] : cert.kkt_residuals)
        kkt_max = std::max(kkt_max, value);
      summary << "outer_iterations " << model.iterations << '\n'
              << "final_objective " << io::fmt17(objective) << '\n'
              << "kkt_max_residual " << io::fmt17(kkt_max) << '\n';
      if (model.radius == 0.0)
        std::cerr << "warning: fitted radius is 0; every off-center point "
                     "classifies as -1\n";
      io::write_sphere_model(model, model_text);
    } else {
      const auto model = opt.method == "md"
                             ? baselines::md_fit(data)
                             : baselines::ldwd_fit(
                                   data, opt.penalty > 0.0
                                             ? std::optional<double>(opt.penalty)
                                             : std::nullopt);
      summary << "method " << baselines::to_string(model.provenance) << '\n'
              << "norm_w " << io::fmt17(model.normal.norm()) << '\n'
              << "intercept " << io::fmt17(model.intercept) << '\n';
      io::write_hyperplane_model(model, model_text);
    }
  } catch (const std::exception& e) {
    return fail(kExitFit, std::string("fit failed: ") + e.what());
  }

  if (!write_file(opt.out, model_text.str()))
    return fail(kExitParse, "cannot write '" + opt.out + "'");
  std::cout << summary.str();
  return 0;
}

// --- predict ----------------------------------------------------------------------

int cmd_predict(const PredictOpts& opt) {
  io::AnyModel model(SphereModel{});
  std::vector<io::DataRow> rows;
  try {
    std::ifstream min(opt.model);
    if (!min) return fail(kExitParse, "cannot open model '" + opt.model + "'");
    model = io::read_model(min);
    std::ifstream in(opt.input);
    if (!in) return fail(kExitParse, "cannot open input '" + opt.input + "'");
    rows = io::read_coverage_rows(in);
  } catch (const std::exception& e) {
    return fail(kExitParse, e.what());
  }

  std::ostringstream csv;
  csv << "sample_id,signed_distance,predicted_label\n";
  try {
    const auto samples = io::to_samples(rows, !opt.no_normalize);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto scored = io::classify_any(model, samples[i]);
      csv << rows[i].id << ',' << io::fmt17(scored.signed_distance) << ','
          << (scored.predicted_label > 0 ? "+1" : "-1") << '\n';
    }
  } catch (const DimensionMismatch& e) {
    return fail(kExitDimension, e.what());
  }

  if (opt.out.empty()) {
    std::cout << csv.str();
    return 0;
  }
  if (!write_file(opt.out, csv.str()))
    return fail(kExitParse, "cannot write '" + opt.out + "'");
  return 0;
}

// --- simulate ---------------------------------------------------------------------

int cmd_simulate(const SimulateOpts& opt) {
  simlab::ExperimentScenario sc;
  try {
    std::ifstream in(opt.scenario);
    if (!in)
      return fail(kExitScenario, "cannot open scenario '" + opt.scenario + "'");
    sc = simlab::parse_scenario(in);
  } catch (const std::exception& e) {
    return fail(kExitScenario, e.what());
  }
  if (opt.seed_given) sc.seed = opt.seed;
  if (opt.full) {
    // the publication-scale grid; desk-scale scenarios stay the default
    sc.dims = {10, 50, 100, 500, 1000, 5000, 10000, 50000, 100000};
    sc.n_test = 5000;
    sc.replications = 30;
  }

  simlab::ErrorTable table;
  try {
    table = simlab::run_scenario(sc);
  } catch (const simlab::ScenarioError& e) {
    return fail(kExitScenario, e.what());
  } catch (const std::exception& e) {
    return fail(kExitFit, std::string("simulation failed: ") + e.what());
  }

  std::ostringstream errors_csv;
  simlab::write_error_csv(table, errors_csv);

  std::ostringstream plot_csv;
  plot_csv << "method,d,metric,value\n";
  for (const auto& cell : table.cells) {
    const std::pair<const char*, double> metrics[] = {
        {"fp_mean", cell.fp_mean}, {"fp_sd", cell.fp_sd},
        {"fn_mean", cell.fn_mean}, {"fn_sd", cell.fn_sd},
        {"avg_mean", cell.avg_mean}, {"avg_sd", cell.avg_sd}};
    for (const auto& [name, value] : metrics)
      plot_csv << cell.method << ',' << cell.d << ',' << name << ','
               << io::fmt17(value) << '\n';
  }

  if (!write_file(opt.out + "-errors.csv", errors_csv.str()) ||
      !write_file(opt.out + "-plot.csv", plot_csv.str()))
    return fail(kExitParse, "cannot write outputs under '" + opt.out + "'");
  return 0;
}

// --- report -----------------------------------------------------------------------

int cmd_report(const ReportOpts& opt) {
  io::AnyModel model(SphereModel{});
  std::vector<io::DataRow> rows;
  try {
    std::ifstream min(opt.model);
    if (!min) return fail(kExitParse, "cannot open model '" + opt.model + "'");
    model = io::read_model(min);
    std::ifstream in(opt.input);
    if (!in) return fail(kExitParse, "cannot open input '" + opt.input + "'");
    rows = io::read_coverage_rows(in);
  } catch (const std::exception& e) {
    return fail(kExitParse, e.what());
  }
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (!rows[i].label)
      return fail(kExitParse, "row " + std::to_string(i + 1) +
                                  ": report needs a +1 or -1 label");

  std::vector<int> labels;
  labels.reserve(rows.size());
  for (const auto& row : rows) labels.push_back(*row.label);

  io::ClassRates rates;
  std::vector<double> distances(rows.size());
  try {
    const auto samples = io::to_samples(rows, !opt.no_normalize);
    rates = io::score_rates(model, samples, labels);
    for (std::size_t i = 0; i < samples.size(); ++i)
      distances[i] = io::classify_any(model, samples[i]).signed_distance;
  } catch (const DimensionMismatch& e) {
    return fail(kExitDimension, e.what());
  }

  std::ostringstream metrics;
  metrics << "metric,value\n";
  metrics << "n_pos," << rates.n_pos << '\n';
  metrics << "n_neg," << rates.n_neg << '\n';
  metrics << "false_neg," << rates.false_neg << '\n';
  metrics << "false_pos," << rates.false_pos << '\n';
  metrics << "fn_rate," << io::fmt17(rates.fn_rate) << '\n';
  metrics << "fp_rate," << io::fmt17(rates.fp_rate) << '\n';

  // long-format plot data: jitter strip rows, then one KDE curve per class
  // (over the finite distances; -inf rows appear in the strip only)
  std::ostringstream plot;
  plot << "series,id,label,x,y\n";
  const auto heights = io::jitter_heights(rows.size(), opt.seed);
  for (std::size_t i = 0; i < rows.size(); ++i)
    plot << "jitter," << rows[i].id << ',' << (labels[i] > 0 ? "+1" : "-1")
         << ',' << io::fmt17(distances[i]) << ',' << io::fmt17(heights[i])
         << '\n';
  for (const int group : {+1, -1}) {
    std::vector<double> finite;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (labels[i] == group && std::isfinite(distances[i]))
        finite.push_back(distances[i]);
    if (finite.empty()) continue;
    const auto kde = io::silverman_kde(finite);
    for (Eigen::Index i = 0; i < kde.x.size(); ++i)
      plot << "kde,," << (group > 0 ? "+1" : "-1") << ','
           << io::fmt17(kde.x[i]) << ',' << io::fmt17(kde.density[i]) << '\n';
  }

  if (!write_file(opt.out + "-metrics.csv", metrics.str()) ||
      !write_file(opt.out + "-data.csv", plot.str()))
    return fail(kExitParse, "cannot write outputs under '" + opt.out + "'");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"radial distance weighted discrimination toolkit"};
  app.require_subcommand(1);

  TrainOpts train;
  auto* t = app.add_subcommand("train", "fit a model and write a model file");
  t->add_option("input", train.input, "coverage table (CSV or TSV)")
      ->required();
  t->add_option("--method", train.method, "rdwd, md, or ldwd")
      ->check(CLI::IsMember({"rdwd", "md", "ldwd"}));
  t->add_option("--penalty", train.penalty,
                "penalty C (omit or <=0 for the data-driven default)");
  t->add_option("--eps", train.eps, "outer-loop stopping threshold");
  t->add_option("--delta", train.delta, "initial trust-region radius");
  t->add_option("--weights", train.weights, "auto or w+,w-");
  t->add_option("--init", train.init, "center initialization")
      ->check(CLI::IsMember({"mean", "median"}));
  t->add_flag("--no-normalize", train.no_normalize,
              "input rows are already simplex-normalized");
  t->add_option("--out", train.out, "model file path");

  PredictOpts predict;
  auto* p = app.add_subcommand("predict", "score a coverage table");
  p->add_option("model", predict.model, "model file")->required();
  p->add_option("input", predict.input, "coverage table")->required();
  p->add_flag("--no-normalize", predict.no_normalize,
              "input rows are already simplex-normalized");
  p->add_option("--out", predict.out, "scores CSV path (default: stdout)");

  SimulateOpts simulate;
  auto* s = app.add_subcommand("simulate", "run a scenario sweep");
  s->add_option("scenario", simulate.scenario, "scenario file")->required();
  auto* seed_opt =
      s->add_option("--seed", simulate.seed, "override the scenario seed");
  s->add_flag("--full", simulate.full,
              "publication-scale grid: d up to 100000, 5000 tests, 30 reps");
  s->add_option("--out", simulate.out,
                "output prefix (<prefix>-errors.csv, <prefix>-plot.csv)");

  ReportOpts report;
  auto* r = app.add_subcommand("report", "per-class rates and plot data");
  r->add_option("model", report.model, "model file")->required();
  r->add_option("input", report.input, "labeled coverage table")->required();
  r->add_option("--seed", report.seed, "jitter seed");
  r->add_flag("--no-normalize", report.no_normalize,
              "input rows are already simplex-normalized");
  r->add_option("--out", report.out,
                "output prefix (<prefix>-metrics.csv, <prefix>-data.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << '\n';
    return kExitParse;
  }
  simulate.seed_given = seed_opt->count() > 0;

  if (*t) return cmd_train(train);
  if (*p) return cmd_predict(predict);
  if (*s) return cmd_simulate(simulate);
  return cmd_report(report);
}
