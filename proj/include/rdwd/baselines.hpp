#pragma once

// Linear reference classifiers used alongside the spherical fit: Mean
// Difference and linear DWD. Both produce the same artifact, a hyperplane
//
//     score(x) = w' x + beta,   classify by sign,
//
// so downstream scoring, reporting, and serialization treat them uniformly.
//
// Mean Difference is closed form: w = mean_+ - mean_-, with the boundary
// through the midpoint of the class means. Linear DWD minimizes
//
//     sum_i 1 / r_i  +  C sum_i E_i,
//     r_i = y_i (x_i' w + beta) + E_i,   ||w||_2 <= 1,  E_i >= 0,
//
// solved as a second-order cone program with the same (rho, sigma, 1) in S3
// reciprocal device as the sphere step: minimizing rho + sigma subject to
// rho - sigma = r and (rho, sigma, 1) in S3 contributes exactly 1/r.
//
// When d > n, linear DWD runs through the same QR reduction as the sphere
// fit: scores x_i' w depend on w only through span(X), and the norm bound is
// preserved, so the hyperplane is fitted on the reduced columns and the
// normal maps back as w = Q w_red.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdwd/core.hpp"
#include "rdwd/radial.hpp"
#include "rdwd/rng.hpp"
#include "rdwd/socp.hpp"

namespace rdwd::baselines {

// Class means coincide (MD) or every cross-class pair coincides (default
// penalty): no direction to discriminate along.
struct ZeroDirection : std::runtime_error {
  explicit ZeroDirection(const std::string& what) : std::runtime_error(what) {}
};

// The cone solver came back without a usable optimum.
struct BaselineSolveFailure : std::runtime_error {
  explicit BaselineSolveFailure(const std::string& what)
      : std::runtime_error(what) {}
};

enum class HyperplaneFit { MeanDifference, LinearDwd };

inline const char* to_string(HyperplaneFit f) {
  return f == HyperplaneFit::MeanDifference ? "md" : "ldwd";
}

struct HyperplaneModel {
  Vector normal;           // w; ||w||_2 <= 1 + 1e-8 for linear DWD
  double intercept = 0.0;  // beta
  HyperplaneFit provenance = HyperplaneFit::MeanDifference;
};

inline double signed_distance(const HyperplaneModel& model,
                              const SimplexVector& x) {
  if (x.dim() != model.normal.size())
    throw DimensionMismatch("sample dimension " + std::to_string(x.dim()) +
                            " vs model dimension " +
                            std::to_string(model.normal.size()));
  return model.normal.dot(x.entries) + model.intercept;
}

inline double signed_distance(const HyperplaneModel&,
                              const ZeroVectorSentinel&) {
  return -std::numeric_limits<double>::infinity();
}

inline double signed_distance(const HyperplaneModel& model,
                              const NormalizedSample& x) {
  return std::visit([&](const auto& v) { return signed_distance(model, v); },
                    x);
}

template <typename Sample>
ScoredSample classify(const HyperplaneModel& model, const Sample& x,
                      std::optional<int> true_label = std::nullopt) {
  ScoredSample out;
  out.signed_distance = signed_distance(model, x);
  out.predicted_label = out.signed_distance >= 0.0 ? +1 : -1;
  if (true_label) out.residual = *true_label * out.signed_distance;
  return out;
}

// --- mean difference ------------------------------------------------------------

// w = mean_+ - mean_-; boundary through the midpoint of the class means.
inline HyperplaneModel md_fit(const TrainingSet& data) {
  Vector mean_pos = Vector::Zero(data.dim());
  Vector mean_neg = Vector::Zero(data.dim());
  for (int j : data.pos_index) mean_pos += data.X.col(j);
  for (int j : data.neg_index) mean_neg += data.X.col(j);
  mean_pos /= static_cast<double>(data.n_pos());
  mean_neg /= static_cast<double>(data.n_neg());

  HyperplaneModel model;
  model.normal = mean_pos - mean_neg;
  if (!(model.normal.norm() > 0.0))
    throw ZeroDirection("class means coincide");
  model.intercept = -0.5 * model.normal.dot(mean_pos + mean_neg);
  model.provenance = HyperplaneFit::MeanDifference;
  return model;
}

// --- linear DWD -----------------------------------------------------------------

// C = 100 / median(cross-class pairwise distance)^2: the reciprocal margin
// terms and the slack charge then trade off at the scale where the two
// classes actually sit. Even-sized medians average the middle pair.
inline double ldwd_default_penalty(const TrainingSet& data) {
  std::vector<double> dist;
  dist.reserve(data.pos_index.size() * data.neg_index.size());
  for (int i : data.pos_index)
    for (int j : data.neg_index)
      dist.push_back((data.X.col(i) - data.X.col(j)).norm());
  const std::size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + mid, dist.end());
  double med = dist[mid];
  if (dist.size() % 2 == 0) {
    const double lo =
        *std::max_element(dist.begin(), dist.begin() + mid);
    med = 0.5 * (lo + med);
  }
  if (!(med > 0.0))
    throw ZeroDirection("every cross-class pair coincides");
  return 100.0 / (med * med);
}

namespace detail {

// Variable layout of the linear DWD cone program. Per point i a reciprocal
// block (rho_i, sigma_i, u_i) in S3 with u_i pinned to 1; then the norm
// block (h, w) in S_{d+1} with h pinned to 1 (so ||w|| <= 1); then the
// intercept split beta = beta_pos - beta_neg and the slacks E, all
// nonnegative. Rows: n margin definitions, n unit pins, one h pin.
struct LdwdLayout {
  int n = 0;
  int dim = 0;

  int rho(int i) const { return 3 * i; }
  int sigma(int i) const { return 3 * i + 1; }
  int unit(int i) const { return 3 * i + 2; }
  int norm_head() const { return 3 * n; }
  int normal(int j) const { return 3 * n + 1 + j; }
  int beta_pos() const { return 3 * n + dim + 1; }
  int beta_neg() const { return 3 * n + dim + 2; }
  int slack(int i) const { return 3 * n + dim + 3 + i; }
  int total_vars() const { return 4 * n + dim + 3; }
};

inline HyperplaneModel ldwd_solve(const TrainingSet& data, double penalty) {
  if (!(penalty > 0.0))
    throw std::invalid_argument("linear DWD penalty must be positive");
  const int n = static_cast<int>(data.size());
  const int d = static_cast<int>(data.dim());
  LdwdLayout layout{n, d};

  // Solve in rescaled coordinates x' = tau x with penalty C' = C / tau^2:
  // the problems are equivalent (w unchanged, beta = beta' / tau), and
  // choosing tau so that C' = 100 keeps the cone program uniformly
  // conditioned whatever the data scale. Raw simplex data has tiny
  // cross-class gaps, which otherwise drives C into the 1e4 range and the
  // solver's achievable accuracy down with it.
  const double tau = std::sqrt(penalty) / 10.0;
  const double scaled_penalty = 100.0;

  const int nvar = layout.total_vars();
  const int m = 2 * n + 1;
  socp::ConicProgram p;
  p.c = Vector::Zero(nvar);
  p.A = Matrix::Zero(m, nvar);
  p.b = Vector::Zero(m);

  for (int i = 0; i < n; ++i) {
    const double y = data.labels[static_cast<std::size_t>(i)];
    p.c[layout.rho(i)] = 1.0;
    p.c[layout.sigma(i)] = 1.0;
    p.c[layout.slack(i)] = scaled_penalty;

    // sigma_i - rho_i + y_i x_i' w + y_i beta + E_i = 0, i.e.
    // rho_i - sigma_i = y_i (x_i' w + beta) + E_i.
    p.A(i, layout.sigma(i)) = 1.0;
    p.A(i, layout.rho(i)) = -1.0;
    for (int j = 0; j < d; ++j)
      p.A(i, layout.normal(j)) = y * tau * data.X(j, i);
    p.A(i, layout.beta_pos()) = y;
    p.A(i, layout.beta_neg()) = -y;
    p.A(i, layout.slack(i)) = 1.0;

    p.A(n + i, layout.unit(i)) = 1.0;
    p.b[n + i] = 1.0;
  }
  p.A(2 * n, layout.norm_head()) = 1.0;
  p.b[2 * n] = 1.0;

  std::vector<std::pair<socp::ConeSpec::Kind, int>> parts;
  for (int i = 0; i < n; ++i)
    parts.emplace_back(socp::ConeSpec::Kind::SecondOrder, 3);
  parts.emplace_back(socp::ConeSpec::Kind::SecondOrder, d + 1);
  parts.emplace_back(socp::ConeSpec::Kind::Nonneg, 2);
  parts.emplace_back(socp::ConeSpec::Kind::Nonneg, n);
  p.cones = socp::ConeSpec::build(parts);
  p.check_well_formed();

  socp::SolverTolerances tol;
  tol.run_presolve = false;
  const auto sol = socp::solve(p, tol);
  // Accept on achieved quality: most solves land at 1e-8..1e-7, but heavily
  // overlapping classes (or deliberately bad penalties during a grid search)
  // produce degenerate optimal faces where the solver's floor is ~1e-6. A
  // 1e-5-feasible hyperplane is still far beyond what classification needs;
  // anything worse signals an actual failure.
  const double quality = std::max(
      {sol.primal_residual, sol.dual_residual, std::abs(sol.gap)});
  if (sol.status == socp::SolveStatus::Infeasible ||
      sol.status == socp::SolveStatus::Unbounded || !(quality <= 1e-5))
    throw BaselineSolveFailure(std::string("linear DWD solve failed: ") +
                               socp::to_string(sol.status));

  HyperplaneModel model;
  model.normal.resize(d);
  for (int j = 0; j < d; ++j) model.normal[j] = sol.primal[layout.normal(j)];
  model.intercept =
      (sol.primal[layout.beta_pos()] - sol.primal[layout.beta_neg()]) / tau;
  model.provenance = HyperplaneFit::LinearDwd;
  return model;
}

}  // namespace detail

// Fit linear DWD with penalty C; omit the penalty for the data-driven
// default. Runs in QR-reduced coordinates when d > n.
inline HyperplaneModel ldwd_fit(const TrainingSet& data,
                                std::optional<double> penalty = std::nullopt) {
  const double c = penalty ? *penalty : ldwd_default_penalty(data);
  if (data.dim() <= data.size()) return detail::ldwd_solve(data, c);

  const radial::ReducedData red = radial::reduce_qr(data);
  HyperplaneModel reduced = detail::ldwd_solve(red.train, c);
  reduced.normal = red.q_basis * reduced.normal;
  return reduced;
}

// --- penalty grid search --------------------------------------------------------

struct PenaltySearch {
  double chosen = 0.0;              // grid value with the lowest mean error
  std::vector<double> grid;         // as supplied
  std::vector<double> mean_errors;  // validation error per grid value
};

namespace detail {

inline TrainingSet subset(const TrainingSet& data,
                          const std::vector<int>& keep) {
  TrainingSet out;
  out.X.resize(data.dim(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    out.X.col(static_cast<Eigen::Index>(j)) = data.X.col(keep[j]);
    const int label = data.labels[static_cast<std::size_t>(keep[j])];
    out.labels.push_back(label);
    (label == +1 ? out.pos_index : out.neg_index)
        .push_back(static_cast<int>(j));
  }
  return out;
}

}  // namespace detail

// Fixed-grid 5-fold cross-validation for the linear DWD penalty. Folds are
// stratified by class: each class's indices are shuffled deterministically
// from the seed and dealt round-robin, so every fold sees both classes when
// each class has at least `folds` members (the fold count shrinks to the
// smaller class size otherwise). Ties prefer the smaller penalty.
inline PenaltySearch ldwd_cv_penalty(const TrainingSet& data,
                                     const std::vector<double>& grid,
                                     int folds = 5, std::uint64_t seed = 0) {
  if (grid.empty()) throw std::invalid_argument("empty penalty grid");
  if (data.n_pos() < 2 || data.n_neg() < 2)
    throw std::invalid_argument("cross-validation needs 2+ samples per class");
  folds = std::min({folds, data.n_pos(), data.n_neg()});

  auto shuffled = [&](const std::vector<int>& idx, std::uint64_t tag) {
    std::vector<int> out = idx;
    rng::Engine eng = rng::substream(seed, 0, tag);
    for (std::size_t i = out.size(); i > 1; --i) {
      const std::size_t j =
          static_cast<std::size_t>(eng.bits() % static_cast<std::uint64_t>(i));
      std::swap(out[i - 1], out[j]);
    }
    return out;
  };
  const std::vector<int> pos = shuffled(data.pos_index, 1);
  const std::vector<int> neg = shuffled(data.neg_index, 2);

  std::vector<std::vector<int>> fold_of(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < pos.size(); ++i)
    fold_of[i % static_cast<std::size_t>(folds)].push_back(pos[i]);
  for (std::size_t i = 0; i < neg.size(); ++i)
    fold_of[i % static_cast<std::size_t>(folds)].push_back(neg[i]);

  PenaltySearch out;
  out.grid = grid;
  out.mean_errors.assign(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double err_sum = 0.0;
    for (int f = 0; f < folds; ++f) {
      std::vector<int> train_idx;
      for (int f2 = 0; f2 < folds; ++f2)
        if (f2 != f)
          train_idx.insert(train_idx.end(),
                           fold_of[static_cast<std::size_t>(f2)].begin(),
                           fold_of[static_cast<std::size_t>(f2)].end());
      const TrainingSet train = detail::subset(data, train_idx);
      const HyperplaneModel model = ldwd_fit(train, grid[g]);

      int wrong = 0;
      const auto& val = fold_of[static_cast<std::size_t>(f)];
      for (int j : val) {
        const double score = model.normal.dot(data.X.col(j)) + model.intercept;
        const int pred = score >= 0.0 ? +1 : -1;
        if (pred != data.labels[static_cast<std::size_t>(j)]) ++wrong;
      }
      err_sum += static_cast<double>(wrong) /
                 static_cast<double>(val.empty() ? 1 : val.size());
    }
    out.mean_errors[g] = err_sum / folds;
  }

  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    const bool better = out.mean_errors[g] < out.mean_errors[best] ||
                        (out.mean_errors[g] == out.mean_errors[best] &&
                         grid[g] < grid[best]);
    if (better) best = g;
  }
  out.chosen = grid[best];
  return out;
}

}  // namespace rdwd::baselines
