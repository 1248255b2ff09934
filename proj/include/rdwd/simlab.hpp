#pragma once

// Dirichlet simulation harness: draws simplex-supported clusters with
// different concentration parameters, fits the three classifiers (Mean
// Difference, linear DWD, spherical RDWD), and tabulates false-positive /
// false-negative rates over replications.
//
// Determinism contract: replication r of a scenario with seed s draws from a
// generator seeded with s + r, consuming draws in a fixed documented order
// (per dimension, ascending: training +1, training -1, test +1, test -1).
// Replications run in parallel when allowed (RDWD_THREADS caps the worker
// count) but each owns its generator and results are reduced in replication
// order, so the output is bit-identical at any thread count.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "rdwd/baselines.hpp"
#include "rdwd/core.hpp"
#include "rdwd/radial.hpp"
#include "rdwd/rng.hpp"

namespace rdwd::simlab {

struct ScenarioError : std::runtime_error {
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

// --- sampling -------------------------------------------------------------------

struct DirichletParams {
  Vector alpha;  // every entry > 0

  static DirichletParams symmetric(double alpha, int dim) {
    if (!(alpha > 0.0) || dim < 1)
      throw std::invalid_argument("dirichlet needs alpha > 0 and dim >= 1");
    DirichletParams p;
    p.alpha = Vector::Constant(dim, alpha);
    return p;
  }
};

// Normalized independent Gamma(alpha_i, 1) draws.
inline SimplexVector sample_dirichlet(const DirichletParams& params,
                                      rng::Engine& eng) {
  const Eigen::Index d = params.alpha.size();
  if (d < 1) throw std::invalid_argument("empty dirichlet parameter");
  SimplexVector out;
  out.entries.resize(d);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(params.alpha[i] > 0.0))
      throw std::invalid_argument("dirichlet alpha entries must be positive");
    out.entries[i] = eng.gamma(params.alpha[i]);
    sum += out.entries[i];
  }
  out.entries /= sum;
  return out;
}

// --- scenario -------------------------------------------------------------------

// Which class the fresh test draws come from. Both draws n_test per class,
// so false-positive and false-negative rates are measured simultaneously;
// one-sided test sets leave the other rate at zero by convention.
enum class TestClass { Pos, Neg, Both };

struct ExperimentScenario {
  double alpha_plus = 1.0;   // symmetric concentration, +1 class
  double alpha_minus = 1.0;  // symmetric concentration, -1 class
  std::vector<int> dims;     // ascending dimensions to sweep
  int n_pos = 20;
  int n_neg = 50;
  int n_test = 500;  // test draws per sampled class
  TestClass test_class = TestClass::Both;
  int replications = 10;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(alpha_plus > 0.0) || !(alpha_minus > 0.0))
      throw ScenarioError("alpha_plus and alpha_minus must be positive");
    if (dims.empty()) throw ScenarioError("dims must be nonempty");
    for (std::size_t i = 0; i < dims.size(); ++i) {
      if (dims[i] < 1) throw ScenarioError("dims entries must be >= 1");
      if (i > 0 && dims[i] <= dims[i - 1])
        throw ScenarioError("dims must be strictly ascending");
    }
    if (n_pos < 1 || n_neg < 1) throw ScenarioError("need samples per class");
    if (n_test < 1) throw ScenarioError("n_test must be >= 1");
    if (replications < 1) throw ScenarioError("replications must be >= 1");
  }
};

// Line-oriented key-value text. All nine keys are required once each; '#'
// starts a comment line. Example:
//
//   alpha_plus 1.0
//   alpha_minus 0.1
//   dims 10 100 1000
//   n_pos 20
//   n_neg 50
//   n_test 500
//   test_class both
//   replications 10
//   seed 1
inline ExperimentScenario parse_scenario(std::istream& in) {
  ExperimentScenario sc;
  std::map<std::string, bool> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key) || key[0] == '#') continue;
    if (seen[key])
      throw ScenarioError("duplicate key '" + key + "' at line " +
                          std::to_string(line_no));
    seen[key] = true;

    const auto where = [&] { return " at line " + std::to_string(line_no); };
    auto read_double = [&](double& dst, bool positive) {
      if (!(ls >> dst) || (positive && !(dst > 0.0)))
        throw ScenarioError("bad value for '" + key + "'" + where());
    };
    auto read_int = [&](int& dst, int min) {
      if (!(ls >> dst) || dst < min)
        throw ScenarioError("bad value for '" + key + "'" + where());
    };

    if (key == "alpha_plus") {
      read_double(sc.alpha_plus, true);
    } else if (key == "alpha_minus") {
      read_double(sc.alpha_minus, true);
    } else if (key == "dims") {
      sc.dims.clear();
      int d;
      while (ls >> d) sc.dims.push_back(d);
      if (sc.dims.empty() || !ls.eof())
        throw ScenarioError("bad value for 'dims'" + where());
    } else if (key == "n_pos") {
      read_int(sc.n_pos, 1);
    } else if (key == "n_neg") {
      read_int(sc.n_neg, 1);
    } else if (key == "n_test") {
      read_int(sc.n_test, 1);
    } else if (key == "test_class") {
      std::string token;
      ls >> token;
      if (token == "pos")
        sc.test_class = TestClass::Pos;
      else if (token == "neg")
        sc.test_class = TestClass::Neg;
      else if (token == "both")
        sc.test_class = TestClass::Both;
      else
        throw ScenarioError("test_class must be pos, neg, or both" + where());
    } else if (key == "replications") {
      read_int(sc.replications, 1);
    } else if (key == "seed") {
      if (!(ls >> sc.seed))
        throw ScenarioError("bad value for 'seed'" + where());
    } else {
      throw ScenarioError("unknown key '" + key + "'" + where());
    }

    std::string extra;
    if (key != "dims" && (ls >> extra))
      throw ScenarioError("trailing tokens after '" + key + "'" + where());
  }
  static const char* required[] = {"alpha_plus",   "alpha_minus", "dims",
                                   "n_pos",        "n_neg",       "n_test",
                                   "test_class",   "replications", "seed"};
  for (const char* key : required)
    if (!seen[key])
      throw ScenarioError(std::string("missing key '") + key + "'");
  sc.validate();
  return sc;
}

// --- error table ----------------------------------------------------------------

inline constexpr std::array<const char*, 3> kMethods = {"md", "ldwd", "rdwd"};

// One (method, dimension) cell: moments of the error rates over the
// replications whose fit succeeded. reps counts those; all-failed cells
// report reps = 0 with NaN statistics.
struct ErrorCell {
  std::string method;
  int d = 0;
  double fp_mean = std::numeric_limits<double>::quiet_NaN();
  double fp_sd = std::numeric_limits<double>::quiet_NaN();
  double fn_mean = std::numeric_limits<double>::quiet_NaN();
  double fn_sd = std::numeric_limits<double>::quiet_NaN();
  double avg_mean = std::numeric_limits<double>::quiet_NaN();
  double avg_sd = std::numeric_limits<double>::quiet_NaN();
  int reps = 0;
};

struct ErrorTable {
  std::vector<ErrorCell> cells;  // method-major: md over dims, then ldwd, rdwd
  int replications = 0;          // as requested by the scenario
};

namespace detail {

struct RepRates {
  double fp = 0.0;
  double fn = 0.0;
};

// Per-replication worker: draw, fit, score every dimension of the sweep.
// Returns one optional per (dim, method); a failed fit leaves its slot empty
// without disturbing the draw sequence (all draws precede the fits).
inline std::vector<std::array<std::optional<RepRates>, 3>> run_replication(
    const ExperimentScenario& sc, int rep) {
  std::vector<std::array<std::optional<RepRates>, 3>> out(sc.dims.size());
  rng::Engine eng(sc.seed + static_cast<std::uint64_t>(rep));

  for (std::size_t di = 0; di < sc.dims.size(); ++di) {
    const int d = sc.dims[di];
    const auto plus = DirichletParams::symmetric(sc.alpha_plus, d);
    const auto minus = DirichletParams::symmetric(sc.alpha_minus, d);

    TrainingSet ts;
    ts.X.resize(d, sc.n_pos + sc.n_neg);
    int col = 0;
    for (int s = 0; s < sc.n_pos; ++s, ++col) {
      ts.X.col(col) = sample_dirichlet(plus, eng).entries;
      ts.labels.push_back(+1);
      ts.pos_index.push_back(col);
    }
    for (int s = 0; s < sc.n_neg; ++s, ++col) {
      ts.X.col(col) = sample_dirichlet(minus, eng).entries;
      ts.labels.push_back(-1);
      ts.neg_index.push_back(col);
    }

    std::vector<SimplexVector> test_pos, test_neg;
    if (sc.test_class != TestClass::Neg)
      for (int s = 0; s < sc.n_test; ++s)
        test_pos.push_back(sample_dirichlet(plus, eng));
    if (sc.test_class != TestClass::Pos)
      for (int s = 0; s < sc.n_test; ++s)
        test_neg.push_back(sample_dirichlet(minus, eng));

    // Boundary convention everywhere: signed distance >= 0 classifies +1.
    auto rates_for = [&](auto&& score) {
      RepRates r;
      int fp = 0, fn = 0;
      for (const auto& x : test_pos)
        if (score(x) < 0.0) ++fn;
      for (const auto& x : test_neg)
        if (score(x) >= 0.0) ++fp;
      if (!test_pos.empty())
        r.fn = static_cast<double>(fn) / static_cast<double>(test_pos.size());
      if (!test_neg.empty())
        r.fp = static_cast<double>(fp) / static_cast<double>(test_neg.size());
      return r;
    };

    try {
      const auto model = baselines::md_fit(ts);
      out[di][0] = rates_for(
          [&](const SimplexVector& x) { return signed_distance(model, x); });
    } catch (const std::exception&) {
    }
    try {
      const auto model = baselines::ldwd_fit(ts);
      out[di][1] = rates_for(
          [&](const SimplexVector& x) { return signed_distance(model, x); });
    } catch (const std::exception&) {
    }
    try {
      const auto [model, cert] = radial::fit(ts, RdwdConfig{});
      out[di][2] = rates_for(
          [&](const SimplexVector& x) { return signed_distance(model, x); });
    } catch (const std::exception&) {
    }
  }
  return out;
}

// Worker-thread budget: hardware concurrency, capped by RDWD_THREADS when
// that is set to a positive integer, and never more than jobs.
inline int thread_budget(int jobs) {
  int budget = static_cast<int>(std::thread::hardware_concurrency());
  if (budget < 1) budget = 1;
  if (const char* env = std::getenv("RDWD_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1)
      budget = static_cast<int>(std::min<long>(v, budget));
  }
  return std::max(1, std::min(budget, jobs));
}

}  // namespace detail

inline ErrorTable run_scenario(const ExperimentScenario& sc) {
  sc.validate();
  const int reps = sc.replications;
  std::vector<std::vector<std::array<std::optional<detail::RepRates>, 3>>>
      results(static_cast<std::size_t>(reps));

  const int workers = detail::thread_budget(reps);
  if (workers <= 1) {
    for (int r = 0; r < reps; ++r)
      results[static_cast<std::size_t>(r)] = detail::run_replication(sc, r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int r = next.fetch_add(1); r < reps; r = next.fetch_add(1))
          results[static_cast<std::size_t>(r)] =
              detail::run_replication(sc, r);
      });
    for (auto& t : pool) t.join();
  }

  // Reduce in fixed (method, dim, replication) order.
  ErrorTable table;
  table.replications = reps;
  for (std::size_t m = 0; m < kMethods.size(); ++m) {
    for (std::size_t di = 0; di < sc.dims.size(); ++di) {
      ErrorCell cell;
      cell.method = kMethods[m];
      cell.d = sc.dims[di];

      std::vector<double> fps, fns, avgs;
      for (int r = 0; r < reps; ++r) {
        const auto& slot = results[static_cast<std::size_t>(r)][di][m];
        if (!slot) continue;
        fps.push_back(slot->fp);
        fns.push_back(slot->fn);
        avgs.push_back(0.5 * (slot->fp + slot->fn));
      }
      cell.reps = static_cast<int>(fps.size());
      if (cell.reps > 0) {
        auto moments = [](const std::vector<double>& v) {
          double mean = 0.0;
          for (double x : v) mean += x;
          mean /= static_cast<double>(v.size());
          double ss = 0.0;
          for (double x : v) ss += (x - mean) * (x - mean);
          const double sd =
              v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1))
                           : 0.0;
          return std::pair<double, double>(mean, sd);
        };
        std::tie(cell.fp_mean, cell.fp_sd) = moments(fps);
        std::tie(cell.fn_mean, cell.fn_sd) = moments(fns);
        std::tie(cell.avg_mean, cell.avg_sd) = moments(avgs);
      }
      table.cells.push_back(std::move(cell));
    }
  }
  return table;
}

// The single-run layout: d = 50, 20 training samples per class with
// alpha_+ = 5 (diffuse center cluster) vs alpha_- = 0.5 (spiky), and 200
// fresh -1-class draws scored by each method.
struct MisclassCounts {
  int md = 0;
  int ldwd = 0;
  int rdwd = 0;
  int total = 200;
};

inline MisclassCounts simulation_one(std::uint64_t seed) {
  ExperimentScenario sc;
  sc.alpha_plus = 5.0;
  sc.alpha_minus = 0.5;
  sc.dims = {50};
  sc.n_pos = 20;
  sc.n_neg = 20;
  sc.n_test = 200;
  sc.test_class = TestClass::Neg;
  sc.replications = 1;
  sc.seed = seed;

  const auto rates = detail::run_replication(sc, 0);
  auto count = [&](std::size_t m) {
    if (!rates[0][m]) throw std::runtime_error("baseline fit failed");
    return static_cast<int>(std::lround(rates[0][m]->fp * sc.n_test));
  };
  MisclassCounts out;
  out.md = count(0);
  out.ldwd = count(1);
  out.rdwd = count(2);
  out.total = sc.n_test;
  return out;
}

// CSV emission: one row per (method, dimension) cell, method-major, with the
// fixed header below. NaN statistics (cells with zero usable replications)
// print as "nan".
inline void write_error_csv(const ErrorTable& table, std::ostream& os) {
  os << "method,d,fp_mean,fp_sd,fn_mean,fn_sd,avg_mean,avg_sd,reps\n";
  char buf[64];
  auto f = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& c : table.cells)
    os << c.method << ',' << c.d << ',' << f(c.fp_mean) << ',' << f(c.fp_sd)
       << ',' << f(c.fn_mean) << ',' << f(c.fn_sd) << ',' << f(c.avg_mean)
       << ',' << f(c.avg_sd) << ',' << c.reps << '\n';
}

}  // namespace rdwd::simlab
