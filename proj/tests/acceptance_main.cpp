// Acceptance gate: ten end-to-end checks over the solver, the radial fit,
// the baselines, the simulation harness, and the command-line binary.
// Prints one PASS/FAIL line per criterion and exits nonzero if any fail.
//
// argv[1] = path to the rdwd binary, argv[2] = bundled scenarios directory.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "rdwd/baselines.hpp"
#include "rdwd/core.hpp"
#include "rdwd/io.hpp"
#include "rdwd/radial.hpp"
#include "rdwd/rng.hpp"
#include "rdwd/simlab.hpp"
#include "rdwd/socp.hpp"
#include "socp_oracle.hpp"

namespace fs = std::filesystem;
using namespace rdwd;
using Clock = std::chrono::steady_clock;

namespace {

std::string g_cli;
fs::path g_scenarios;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, const char* spec = "%.3g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = "'" + g_cli + "' " + args +
                          " > acc_stdout.txt 2> acc_stderr.txt";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp("acc_stdout.txt");
  return r;
}

TrainingSet draw_set(std::uint64_t seed, int d, int npos, int nneg, double ap,
                     double an) {
  rng::Engine eng = rng::substream(seed, 0);
  std::vector<NormalizedSample> samples;
  std::vector<int> labels;
  const auto pos = simlab::DirichletParams::symmetric(ap, d);
  const auto neg = simlab::DirichletParams::symmetric(an, d);
  for (int i = 0; i < npos; ++i) {
    samples.emplace_back(simlab::sample_dirichlet(pos, eng));
    labels.push_back(+1);
  }
  for (int i = 0; i < nneg; ++i) {
    samples.emplace_back(simlab::sample_dirichlet(neg, eng));
    labels.push_back(-1);
  }
  return TrainingSet::from_samples(samples, labels);
}

TrainingSet toy_set() {
  const double raw[7][2] = {{9, 1}, {8, 2}, {7, 3}, {2, 8},
                            {1, 9}, {3, 7}, {4, 6}};
  std::vector<NormalizedSample> samples;
  std::vector<int> labels;
  for (int i = 0; i < 7; ++i) {
    FeatureVector f;
    f.entries = {raw[i][0], raw[i][1]};
    samples.push_back(l1_normalize(f));
    labels.push_back(i < 3 ? +1 : -1);
  }
  return TrainingSet::from_samples(samples, labels);
}

simlab::ExperimentScenario load_scenario(const char* name) {
  std::ifstream in(g_scenarios / name);
  if (!in)
    throw std::runtime_error(std::string("cannot open bundled scenario ") +
                             name);
  return simlab::parse_scenario(in);
}

const simlab::ErrorCell& cell_of(const simlab::ErrorTable& table,
                                 const std::string& method, int d) {
  for (const auto& cell : table.cells)
    if (cell.method == method && cell.d == d) return cell;
  throw std::runtime_error("missing table cell " + method + "/" +
                           std::to_string(d));
}

// --- criterion 1: random cone programs against the independent oracle -------------

Outcome criterion1() {
  double worst_rel = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const int nullity = seed <= 35 ? 2 : 3;
    const auto g = socp_testlib::gen::make(seed * 7919, nullity);
    const auto sol = socp::solve(g.program);
    if (sol.status != socp::SolveStatus::Optimal)
      return {false, "seed " + std::to_string(seed) + " ended " +
                         socp::to_string(sol.status)};
    if (!(sol.gap <= 1e-6 && sol.primal_residual <= 1e-6 &&
          sol.dual_residual <= 1e-6))
      return {false, "seed " + std::to_string(seed) + " residuals above 1e-6"};
    const auto orc = socp_testlib::oracle::minimize(g.program, seed * 31 + 5);
    const double rel = std::abs(sol.objective_value - orc.objective) /
                       (1.0 + std::abs(orc.objective));
    worst_rel = std::max(worst_rel, rel);
    if (rel > 1e-5)
      return {false, "seed " + std::to_string(seed) + " off the oracle by " +
                         fmt(rel)};
  }
  return {true, "50/50 solved; worst oracle deviation " + fmt(worst_rel)};
}

// --- criterion 2: analytic cases ---------------------------------------------------

Outcome criterion2() {
  using Kind = socp::ConeSpec::Kind;
  socp::ConicProgram p;
  p.c = Eigen::Vector3d(1, 0, 0);
  p.A.resize(2, 3);
  p.A << 0, 1, 0, 0, 0, 1;
  p.b = Eigen::Vector2d(3, 4);
  p.cones = socp::ConeSpec::build({{Kind::SecondOrder, 3}});
  const auto s1 = socp::solve(p);
  const double dev1 = std::abs(s1.objective_value - 5.0);
  if (s1.status != socp::SolveStatus::Optimal || dev1 > 1e-6)
    return {false, "min-norm objective off by " + fmt(dev1)};

  socp::ConicProgram lp;
  lp.c = Eigen::Vector2d(1, 2);
  lp.A.resize(1, 2);
  lp.A << 1, 1;
  lp.b = Eigen::VectorXd::Ones(1);
  lp.cones = socp::ConeSpec::build({{Kind::Nonneg, 2}});
  const auto s2 = socp::solve(lp);
  const double dev2 = std::abs(s2.objective_value - 1.0);
  if (s2.status != socp::SolveStatus::Optimal || dev2 > 1e-8 ||
      std::abs(s2.primal[0] - 1.0) > 1e-7 || std::abs(s2.primal[1]) > 1e-7)
    return {false, "LP vertex off by " + fmt(dev2)};
  return {true, "distance " + fmt(s1.objective_value, "%.9g") +
                    ", vertex objective " + fmt(s2.objective_value, "%.9g")};
}

// --- criterion 3: KKT certification on the bundled fixtures ------------------------

Outcome criterion3() {
  struct Fixture {
    const char* name;
    TrainingSet data;
  };
  std::vector<Fixture> fixtures;
  fixtures.push_back({"toy-2d", toy_set()});
  fixtures.push_back({"d10", draw_set(301, 10, 10, 12, 4.0, 0.5)});
  fixtures.push_back({"d50", draw_set(302, 50, 20, 20, 5.0, 0.5)});
  fixtures.push_back({"d100", draw_set(303, 100, 20, 50, 1.0, 0.1)});
  fixtures.push_back({"d200", draw_set(304, 200, 15, 25, 1.0, 0.5)});
  fixtures.push_back({"d1000", draw_set(305, 1000, 20, 50, 1.0, 0.1)});

  double worst = 0.0;
  for (const auto& fixture : fixtures) {
    const auto [model, cert] = radial::fit(fixture.data, RdwdConfig{});
    const auto report = radial::kkt_check(fixture.data, model, cert, 1e-4);
    worst = std::max(worst, report.worst);
    if (!report.pass)
      return {false, std::string(fixture.name) + " residual " +
                         fmt(report.worst) + " above 1e-4"};
  }
  return {true, std::to_string(fixtures.size()) +
                    " fixtures certified; worst residual " + fmt(worst)};
}

// --- criterion 4: QR reduction leaves the fit invariant ----------------------------

Outcome criterion4() {
  struct Spec {
    int d, npos, nneg;
    double ap, an;
    std::uint64_t seed;
  };
  const Spec specs[] = {
      {200, 12, 18, 5.0, 0.5, 41},  {200, 20, 25, 1.0, 0.1, 42},
      {2000, 15, 20, 5.0, 0.5, 43}, {2000, 25, 25, 2.0, 0.5, 44},
      {10000, 12, 15, 1.0, 0.1, 45},
  };
  double worst = 0.0;
  for (const auto& sp : specs) {
    const auto data = draw_set(sp.seed, sp.d, sp.npos, sp.nneg, sp.ap, sp.an);
    RdwdConfig cfg;
    // compare at a tight outer stop: the invariance is a statement about
    // the optimizer's fixed point, not about a loosely stopped iterate
    cfg.stop_eps = 1e-6;
    const Vector c0 = radial::initialize_center(data, cfg.init_mode, {});
    const auto full = radial::detail::fit_with_init(data, cfg, c0, nullptr);
    const auto reduced = radial::fit(data, cfg);
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      SimplexVector x;
      x.entries = data.X.col(i);
      worst = std::max(worst,
                       std::abs(signed_distance(full.first, x) -
                                signed_distance(reduced.first, x)));
    }
    if (worst > 1e-6)
      return {false, "d=" + std::to_string(sp.d) +
                         " signed distances diverge by " + fmt(worst)};
  }
  return {true, "5 data sets agree; worst distance gap " + fmt(worst)};
}

// --- criterion 5: the surrounding-cloud simulation ----------------------------------

Outcome criterion5() {
  double md = 0.0, ldwd = 0.0, rdwd_count = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto counts = simlab::simulation_one(seed);
    md += counts.md;
    ldwd += counts.ldwd;
    rdwd_count += counts.rdwd;
  }
  md /= 10.0;
  ldwd /= 10.0;
  rdwd_count /= 10.0;
  const bool pass = rdwd_count <= 10.0 && md >= 100.0 && ldwd >= 100.0;
  return {pass, "mean misclassified of 200: rdwd " + fmt(rdwd_count, "%.1f") +
                    ", md " + fmt(md, "%.1f") + ", ldwd " + fmt(ldwd, "%.1f")};
}

// --- criteria 6/7: the bundled desk-scale sweeps ------------------------------------

Outcome criterion6() {
  const auto table = simlab::run_scenario(load_scenario("case1-desk.scenario"));
  const auto& r10 = cell_of(table, "rdwd", 10);
  const auto& r100 = cell_of(table, "rdwd", 100);
  const auto& r1000 = cell_of(table, "rdwd", 1000);
  const auto& l1000 = cell_of(table, "ldwd", 1000);
  if (r10.reps != 10 || r100.reps != 10 || r1000.reps != 10 ||
      l1000.reps != 10)
    return {false, "missing replications in the sweep"};
  const std::string trend = fmt(r10.avg_mean, "%.4f") + " > " +
                            fmt(r100.avg_mean, "%.4f") + " > " +
                            fmt(r1000.avg_mean, "%.4f");
  if (!(r10.avg_mean > r100.avg_mean && r100.avg_mean > r1000.avg_mean))
    return {false, "radial error not strictly decreasing: " + trend};
  if (!(r1000.avg_mean < 0.02))
    return {false, "radial error at d=1000 is " + fmt(r1000.avg_mean)};
  if (!(l1000.avg_mean >= 0.40))
    return {false, "linear dwd error at d=1000 is only " + fmt(l1000.avg_mean)};
  return {true, "radial " + trend + "; linear dwd stuck at " +
                    fmt(l1000.avg_mean, "%.2f")};
}

Outcome criterion7() {
  const auto table = simlab::run_scenario(load_scenario("case2-desk.scenario"));
  const auto& rdwd_cell = cell_of(table, "rdwd", 1000);
  const auto& md_cell = cell_of(table, "md", 1000);
  const auto& ldwd_cell = cell_of(table, "ldwd", 1000);
  if (rdwd_cell.reps != 10 || md_cell.reps != 10 || ldwd_cell.reps != 10)
    return {false, "missing replications in the sweep"};
  const std::string rates = "fn at d=1000: rdwd " +
                            fmt(rdwd_cell.fn_mean, "%.3f") + ", md " +
                            fmt(md_cell.fn_mean, "%.3f") + ", ldwd " +
                            fmt(ldwd_cell.fn_mean, "%.3f");
  const bool pass = rdwd_cell.fn_mean < 0.05 && md_cell.fn_mean > 0.60 &&
                    ldwd_cell.fn_mean > 0.60;
  return {pass, rates};
}

// --- criterion 8: CLI determinism ---------------------------------------------------

Outcome criterion8() {
  std::ofstream("acc_toy.csv")
      << "a,+1,9,1\nb,+1,8,2\nc,+1,7,3\nd,-1,2,8\ne,-1,1,9\nf,-1,3,7\n"
         "g,-1,4,6\n";
  std::ofstream("acc_tiny.scenario")
      << "alpha_plus 4.0\nalpha_minus 0.5\ndims 4 6\nn_pos 6\nn_neg 8\n"
         "n_test 20\ntest_class both\nreplications 2\nseed 11\n";

  auto twice_equal = [&](const std::string& args,
                         const std::vector<std::string>& files,
                         std::string& why) {
    const auto first = run_cli(args);
    std::vector<std::string> bytes;
    for (const auto& f : files) bytes.push_back(slurp(f));
    const auto second = run_cli(args);
    if (first.code != 0 || second.code != 0) {
      why = "command failed: " + args;
      return false;
    }
    if (first.out != second.out) {
      why = "stdout drifted: " + args;
      return false;
    }
    for (std::size_t i = 0; i < files.size(); ++i)
      if (slurp(files[i]) != bytes[i]) {
        why = "file drifted: " + files[i];
        return false;
      }
    return true;
  };

  std::string why;
  if (!twice_equal("train acc_toy.csv --out acc.model", {"acc.model"}, why))
    return {false, why};
  if (!twice_equal("predict acc.model acc_toy.csv --out acc_scores.csv",
                   {"acc_scores.csv"}, why))
    return {false, why};
  if (!twice_equal("simulate acc_tiny.scenario --seed 7 --out acc_sim",
                   {"acc_sim-errors.csv", "acc_sim-plot.csv"}, why))
    return {false, why};
  if (!twice_equal("report acc.model acc_toy.csv --seed 5 --out acc_rep",
                   {"acc_rep-metrics.csv", "acc_rep-data.csv"}, why))
    return {false, why};
  return {true, "train, predict, simulate, and report all repeat bytewise"};
}

// --- criterion 9: the zero-vector contract ------------------------------------------

Outcome criterion9() {
  const auto sentinel = l1_normalize(FeatureVector{{0.0, 0.0}});
  if (!std::holds_alternative<ZeroVectorSentinel>(sentinel))
    return {false, "l1_normalize did not map zero to the sentinel"};

  const auto data = toy_set();
  const auto [sphere, cert] = radial::fit(data, RdwdConfig{});
  (void)cert;
  const auto scored = classify(sphere, sentinel);
  if (!std::isinf(scored.signed_distance) || scored.signed_distance > 0 ||
      scored.predicted_label != -1)
    return {false, "sphere scored the sentinel at " +
                       fmt(scored.signed_distance)};

  const auto hyper = baselines::md_fit(data);
  const auto hscored = classify(hyper, sentinel);
  if (!std::isinf(hscored.signed_distance) || hscored.signed_distance > 0 ||
      hscored.predicted_label != -1)
    return {false, "hyperplane scored the sentinel at " +
                       fmt(hscored.signed_distance)};

  std::ofstream("acc_zero.csv") << "z,unknown,0,0\nk,unknown,5,5\n";
  const auto cli = run_cli("predict acc.model acc_zero.csv");
  if (cli.code != 0 || cli.out.find("z,-inf,-1\n") == std::string::npos)
    return {false, "CLI predict did not emit -inf,-1 for the zero row"};
  return {true, "library and CLI both score zero rows as -inf, label -1"};
}

// --- criterion 10: the real-data exclusion is documented ----------------------------

Outcome criterion10() {
  const std::string readme = slurp(g_scenarios.parent_path() / "README.md");
  if (readme.empty()) return {false, "README.md not found beside scenarios/"};
  if (readme.find("HSV-1") == std::string::npos)
    return {false, "README does not document the HSV-1 data exclusion"};
  if (readme.find("--full") == std::string::npos)
    return {false, "README does not document the --full grid"};
  return {true, "README records the excluded real-data study and the "
                "--full grid"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::printf("usage: acceptance <rdwd-binary> <scenarios-dir>\n");
    return 2;
  }
  g_cli = fs::absolute(argv[1]).string();
  g_scenarios = fs::absolute(argv[2]);

  const fs::path work = fs::temp_directory_path() / "rdwd_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  fs::current_path(work);

  struct Entry {
    int id;
    const char* label;
    Outcome (*fn)();
    double limit_s;  // 0 = no bound
  };
  const Entry entries[] = {
      {1, "random cone programs match the oracle", criterion1, 10.0},
      {2, "analytic conic cases are exact", criterion2, 1.0},
      {3, "every fixture passes KKT certification", criterion3, 30.0},
      {4, "QR reduction leaves fits invariant", criterion4, 120.0},
      {5, "surrounded negatives defeat linear boundaries", criterion5, 300.0},
      {6, "case 1 sweep: radial error falls with d", criterion6, 600.0},
      {7, "case 2 sweep: competitors lose the +1 class", criterion7, 600.0},
      {8, "CLI outputs repeat byte for byte", criterion8, 0.0},
      {9, "zero vectors score -inf with label -1", criterion9, 0.0},
      {10, "real-data study exclusion is documented", criterion10, 0.0},
  };

  int failures = 0;
  for (const auto& entry : entries) {
    Outcome outcome;
    const auto t0 = Clock::now();
    try {
      outcome = entry.fn();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    if (outcome.pass && entry.limit_s > 0.0 && elapsed > entry.limit_s) {
      outcome.pass = false;
      outcome.detail += " [over the " + fmt(entry.limit_s, "%.0f") +
                        "s budget]";
    }
    std::printf("%s criterion %d: %s — %s (%.1fs)\n",
                outcome.pass ? "PASS" : "FAIL", entry.id, entry.label,
                outcome.detail.c_str(), elapsed);
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  if (failures == 0) {
    std::printf("acceptance: all 10 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", failures);
  return 1;
}
