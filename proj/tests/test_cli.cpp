// End-to-end checks for the rdwd binary: spawns the real executable and
// inspects exit codes and output bytes. argv[1] = path to the binary,
// argv[2] = path to the bundled scenarios directory.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "rdwd/simlab.hpp"

namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
  if (!ok) {
    std::cout << "FAIL: " << what << '\n';
    ++failures;
  }
}

std::string g_cli;

struct RunResult {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

RunResult run(const std::string& args) {
  const std::string cmd =
      "'" + g_cli + "' " + args + " > cli_stdout.txt 2> cli_stderr.txt";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp("cli_stdout.txt");
  r.err = slurp("cli_stderr.txt");
  return r;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto end = line.find(sep, start);
    out.push_back(line.substr(
        start, end == std::string::npos ? std::string::npos : end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

const char* kToyCsv =
    "a,+1,9,1\n"
    "b,+1,8,2\n"
    "c,+1,7,3\n"
    "d,-1,2,8\n"
    "e,-1,1,9\n"
    "f,-1,3,7\n"
    "g,-1,4,6\n";

const char* kTinyScenario =
    "alpha_plus 4.0\n"
    "alpha_minus 0.5\n"
    "dims 4 6\n"
    "n_pos 6\n"
    "n_neg 8\n"
    "n_test 20\n"
    "test_class both\n"
    "replications 2\n"
    "seed 11\n";

void test_train_and_model_file() {
  write_text("toy.csv", kToyCsv);
  const auto r = run("train toy.csv --out toy.model");
  check(r.code == 0, "train exits 0: " + r.err);
  check(contains(r.out, "outer_iterations "), "summary reports iterations");
  check(contains(r.out, "final_objective "), "summary reports the objective");
  check(contains(r.out, "kkt_max_residual "), "summary reports kkt residual");

  const std::string model = slurp("toy.model");
  check(model.rfind("rdwd-model v1\n", 0) == 0, "sphere model header");
  check(contains(model, "\nd 2\n"), "model dimension recorded");
  // R line parses and is positive on the separable toy
  const auto rpos = model.find("\nR ");
  check(rpos != std::string::npos, "model has an R line");
  check(std::stod(model.substr(rpos + 3)) > 0.0, "fitted radius is positive");

  // byte determinism across reruns
  const auto again = run("train toy.csv --out toy2.model");
  check(again.code == 0 && again.out == r.out, "train stdout is stable");
  check(slurp("toy2.model") == model, "model files are byte-identical");

  // flags plumb through to the recorded config snapshot
  const auto flags = run(
      "train toy.csv --init median --weights 0.5,0.5 --penalty 8 "
      "--out flags.model");
  check(flags.code == 0, "flagged train exits 0: " + flags.err);
  const std::string fmodel = slurp("flags.model");
  check(contains(fmodel, "meta init median"), "init choice is recorded");
  check(contains(fmodel, "meta weight_pos 0.5\n"), "weights are recorded");
  check(contains(fmodel, "meta penalty 8\n"), "penalty is recorded");
}

void test_hyperplane_methods() {
  const auto md = run("train toy.csv --method md --out md.model");
  check(md.code == 0, "md train exits 0: " + md.err);
  check(contains(md.out, "method md"), "md summary names the method");
  check(slurp("md.model").rfind("hyperplane-model v1\n", 0) == 0,
        "md writes a hyperplane model");

  const auto ld = run("train toy.csv --method ldwd --out ldwd.model");
  check(ld.code == 0, "ldwd train exits 0: " + ld.err);
  const std::string model = slurp("ldwd.model");
  check(model.rfind("hyperplane-model v1\n", 0) == 0,
        "ldwd writes a hyperplane model");
  check(contains(model, "meta method ldwd"), "ldwd provenance recorded");
}

void test_predict_round_trip() {
  const auto r = run("predict toy.model toy.csv --out scores.csv");
  check(r.code == 0, "predict exits 0: " + r.err);
  const std::string csv = slurp("scores.csv");
  const auto lines = split(csv, '\n');
  check(lines[0] == "sample_id,signed_distance,predicted_label",
        "predict header");
  check(lines.size() == 9 && lines[8].empty(), "one row per sample, LF ending");
  // training labels are reproduced on the separable toy (+1 first 3 rows)
  const char* expect[] = {"+1", "+1", "+1", "-1", "-1", "-1", "-1"};
  const char* ids[] = {"a", "b", "c", "d", "e", "f", "g"};
  for (int i = 0; i < 7; ++i) {
    const auto cols = split(lines[static_cast<std::size_t>(i) + 1], ',');
    check(cols.size() == 3 && cols[0] == ids[i] && cols[2] == expect[i],
          std::string("row for sample ") + ids[i]);
    check(std::isfinite(std::stod(cols[1])), "finite signed distance");
  }

  const auto again = run("predict toy.model toy.csv --out scores2.csv");
  check(again.code == 0 && slurp("scores2.csv") == csv,
        "predict output is byte-identical");

  // stdout mode emits the same bytes
  const auto to_stdout = run("predict toy.model toy.csv");
  check(to_stdout.code == 0 && to_stdout.out == csv,
        "stdout and --out agree");
}

void test_zero_vector_rows() {
  write_text("zeros.csv", "z1,unknown,0,0\nk,unknown,5,5\n");
  const auto r = run("predict toy.model zeros.csv");
  check(r.code == 0, "zero-row predict exits 0");
  check(contains(r.out, "z1,-inf,-1\n"),
        "all-zero row scores -inf with label -1");
  const auto raw = run("predict toy.model zeros.csv --no-normalize");
  check(raw.code == 0 && contains(raw.out, "z1,-inf,-1\n"),
        "zero-row contract survives --no-normalize");
}

void test_error_exits() {
  write_text("nolabel.csv", "a,+1,1,2\nb,0.5,0.5\n");
  const auto parse = run("train nolabel.csv");
  check(parse.code == 2, "missing label exits 2");
  check(contains(parse.err, "row 2"), "parse error names the row");

  write_text("wide.csv", "a,unknown,1,2,3\n");
  const auto dim = run("predict toy.model wide.csv");
  check(dim.code == 4, "dimension mismatch exits 4");

  const auto scen = run("simulate no-such-file.scenario");
  check(scen.code == 5, "unreadable scenario exits 5");
  write_text("bad.scenario", "alpha_plus nope\n");
  check(run("simulate bad.scenario").code == 5, "bad scenario exits 5");

  check(run("train toy.csv --method svm").code == 2, "bad flag value exits 2");
  check(run("predict toy.model").code == 2, "missing argument exits 2");

  write_text("zp.csv", "a,+1,0,0\nb,-1,1,2\n");
  check(run("train zp.csv").code == 2, "zero +1 training row exits 2");
}

void test_simulate() {
  write_text("tiny.scenario", kTinyScenario);
  const auto r = run("simulate tiny.scenario --out s1");
  check(r.code == 0, "simulate exits 0: " + r.err);
  const std::string errors = slurp("s1-errors.csv");
  const std::string plot = slurp("s1-plot.csv");
  check(errors.rfind("method,d,fp_mean,fp_sd,fn_mean,fn_sd,avg_mean,avg_sd,"
                     "reps\n", 0) == 0,
        "error table header");
  check(split(errors, '\n').size() == 8, "3 methods x 2 dims + header rows");
  check(plot.rfind("method,d,metric,value\n", 0) == 0, "plot header");
  check(split(plot, '\n').size() == 38, "6 metric rows per cell");
  check(contains(plot, "rdwd,6,avg_mean,"), "plot carries every cell");

  const auto again = run("simulate tiny.scenario --out s2");
  check(again.code == 0 && slurp("s2-errors.csv") == errors &&
            slurp("s2-plot.csv") == plot,
        "simulate reruns byte-identically");

  const auto seeded = run("simulate tiny.scenario --seed 7 --out s3");
  const auto seeded2 = run("simulate tiny.scenario --seed 7 --out s4");
  check(seeded.code == 0 && seeded2.code == 0 &&
            slurp("s3-errors.csv") == slurp("s4-errors.csv"),
        "--seed reruns are byte-identical");
  check(slurp("s3-errors.csv") != errors, "--seed overrides the file seed");
}

void test_report() {
  const auto r = run("report toy.model toy.csv --seed 5 --out rep");
  check(r.code == 0, "report exits 0: " + r.err);
  const std::string metrics = slurp("rep-metrics.csv");
  check(metrics.rfind("metric,value\n", 0) == 0, "metrics header");
  check(contains(metrics, "fn_rate,0\n") && contains(metrics, "fp_rate,0\n"),
        "separated toy has zero error rates");
  check(contains(metrics, "n_pos,3\n") && contains(metrics, "n_neg,4\n"),
        "class counts reported");

  const std::string data = slurp("rep-data.csv");
  const auto lines = split(data, '\n');
  check(lines[0] == "series,id,label,x,y", "report data header");

  // jitter rows: one per sample; KDE mass per class integrates to ~1
  int jitter_rows = 0;
  double mass[2] = {0.0, 0.0};
  double prev_x[2] = {0.0, 0.0}, prev_y[2] = {0.0, 0.0};
  bool seen[2] = {false, false};
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cols = split(lines[i], ',');
    if (cols[0] == "jitter") {
      ++jitter_rows;
      const double h = std::stod(cols[4]);
      check(h >= 0.0 && h < 1.0, "jitter height in [0,1)");
      continue;
    }
    check(cols[0] == "kde", "series is jitter or kde");
    const int g = cols[2] == "+1" ? 0 : 1;
    const double x = std::stod(cols[3]), y = std::stod(cols[4]);
    if (seen[g]) mass[g] += 0.5 * (y + prev_y[g]) * (x - prev_x[g]);
    prev_x[g] = x;
    prev_y[g] = y;
    seen[g] = true;
  }
  check(jitter_rows == 7, "one jitter row per sample");
  check(seen[0] && std::abs(mass[0] - 1.0) <= 1e-3,
        "+1 kde integrates to one");
  check(seen[1] && std::abs(mass[1] - 1.0) <= 1e-3,
        "-1 kde integrates to one");

  const auto same = run("report toy.model toy.csv --seed 5 --out rep2");
  check(same.code == 0 && slurp("rep2-data.csv") == data,
        "report reruns byte-identically under one seed");
  const auto other = run("report toy.model toy.csv --seed 6 --out rep3");
  check(other.code == 0 && slurp("rep3-data.csv") != data,
        "jitter follows the seed");

  write_text("unlabeled.csv", "a,unknown,1,2\n");
  check(run("report toy.model unlabeled.csv").code == 2,
        "report needs labels");
}

void test_bundled_scenarios(const fs::path& dir) {
  using rdwd::simlab::TestClass;
  auto load = [&](const char* name) {
    std::ifstream in(dir / name);
    check(static_cast<bool>(in), std::string("bundled scenario opens: ") + name);
    return rdwd::simlab::parse_scenario(in);
  };
  const auto case1 = load("case1-desk.scenario");
  check(case1.alpha_plus == 1.0 && case1.alpha_minus == 0.1,
        "case1 concentration parameters");
  check(case1.dims == std::vector<int>({10, 100, 1000}), "case1 dims");
  check(case1.n_pos == 20 && case1.n_neg == 50 && case1.n_test == 500,
        "case1 sample sizes");
  check(case1.test_class == TestClass::Both && case1.replications == 10,
        "case1 scoring plan");

  const auto case2 = load("case2-desk.scenario");
  check(case2.alpha_plus == 1.0 && case2.alpha_minus == 0.5,
        "case2 concentration parameters");
  check(case2.dims == std::vector<int>({10, 100, 1000}), "case2 dims");

  const auto sim1 = load("sim1.scenario");
  check(sim1.alpha_plus == 5.0 && sim1.alpha_minus == 0.5,
        "sim1 concentration parameters");
  check(sim1.dims == std::vector<int>({50}) && sim1.n_pos == 20 &&
            sim1.n_neg == 20 && sim1.n_test == 200,
        "sim1 geometry");
  check(sim1.test_class == TestClass::Neg, "sim1 scores the -1 class only");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cout << "usage: test_cli <rdwd-binary> <scenarios-dir>\n";
    return 2;
  }
  g_cli = fs::absolute(argv[1]).string();
  const fs::path scenarios = fs::absolute(argv[2]);

  const fs::path work = fs::temp_directory_path() / "rdwd_cli_checks";
  fs::remove_all(work);
  fs::create_directories(work);
  fs::current_path(work);

  test_train_and_model_file();
  test_hyperplane_methods();
  test_predict_round_trip();
  test_zero_vector_rows();
  test_error_exits();
  test_simulate();
  test_report();
  test_bundled_scenarios(scenarios);

  if (failures == 0) {
    std::cout << "all cli checks passed\n";
    return 0;
  }
  std::cout << failures << " cli check(s) failed\n";
  return 1;
}
