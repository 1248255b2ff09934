#pragma once

// Spherical-boundary classifier. The decision surface is a sphere (center O,
// radius R); samples inside are class +1. Training minimizes
//
//     sum_i w(y_i) / r_i  +  C sum_i w(y_i) eps_i,
//     r_i = y_i (R - ||x_i - O||_2) + eps_i,   r_i > 0,  eps_i >= 0,
//
// which rewards large positive signed residuals and charges slack for
// violations. The distance term makes the problem nonconvex in O, so the fit
// alternates: linearize each distance around the previous center, solve the
// resulting second-order cone program for a trust-region-limited center step
// plus radius and slacks, and repeat until the exact objective stabilizes.
//
// A candidate step is kept only if it does not increase the exact objective;
// a rejected step halves the trust radius and re-solves. This keeps the
// plain linearized iteration from cycling (the linearization drops the
// tangential curvature of the distance, which otherwise produces a
// bang-bang oscillation at the trust-region scale) while preserving the
// step-length contract for every accepted step.
//
// When d > n the fit runs in QR-reduced coordinates: X = QU with Q
// orthonormal, the sphere is fitted on the columns of U, and the center maps
// back as O = Q O_red. Any center component orthogonal to span(X) only
// inflates every distance equally, so fixing it to zero loses nothing.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rdwd/core.hpp"
#include "rdwd/socp.hpp"

namespace rdwd::radial {

struct EmptyPositiveClass : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateCenter : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegeneratePoint : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- loss -------------------------------------------------------------------

// Per-point loss as a function of the signed residual a = y (R - ||x - O||),
// after minimizing out the slack: 1/a where a >= 1/sqrt(C), else the tangent
// line 2 sqrt(C) - C a. Continuously differentiable, strictly positive.
inline double phi(double a, double penalty) {
  const double knee = 1.0 / std::sqrt(penalty);
  return a >= knee ? 1.0 / a : 2.0 * std::sqrt(penalty) - penalty * a;
}

// Exact (non-linearized) training objective at a given sphere.
inline double exact_objective(const TrainingSet& data, const Vector& center,
                              double radius, double penalty,
                              std::pair<double, double> weights) {
  double obj = 0.0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const double dist = (data.X.col(i) - center).norm();
    const double y = data.labels[static_cast<std::size_t>(i)];
    const double w = y > 0 ? weights.first : weights.second;
    obj += w * phi(y * (radius - dist), penalty);
  }
  return obj;
}

// --- defaults and initialization ---------------------------------------------

inline Vector initialize_center(const TrainingSet& data, RdwdConfig::Init mode,
                                const Vector& explicit_center = Vector()) {
  if (data.pos_index.empty())
    throw EmptyPositiveClass("initialization needs at least one +1 sample");
  switch (mode) {
    case RdwdConfig::Init::Explicit:
      if (explicit_center.size() != data.dim())
        throw DimensionMismatch("explicit center has wrong dimension");
      return explicit_center;
    case RdwdConfig::Init::MeanPlus: {
      Vector c = Vector::Zero(data.dim());
      for (int j : data.pos_index) c += data.X.col(j);
      return c / static_cast<double>(data.pos_index.size());
    }
    case RdwdConfig::Init::MedianPlus:
    default: {
      // Coordinate-wise median of the +1 class.
      Vector c(data.dim());
      std::vector<double> coord(data.pos_index.size());
      for (Eigen::Index r = 0; r < data.dim(); ++r) {
        for (std::size_t k = 0; k < data.pos_index.size(); ++k)
          coord[k] = data.X(r, data.pos_index[k]);
        const auto mid = coord.begin() + static_cast<long>(coord.size() / 2);
        std::nth_element(coord.begin(), mid, coord.end());
        double m = *mid;
        if (coord.size() % 2 == 0) {
          const auto lo = std::max_element(coord.begin(), mid);
          m = 0.5 * (m + *lo);
        }
        c[r] = m;
      }
      return c;
    }
  }
}

// w(+1) = n-/n, w(-1) = n+/n: each class contributes equal total weight.
inline std::pair<double, double> default_weights(const TrainingSet& data) {
  const double n = static_cast<double>(data.size());
  return {data.n_neg() / n, data.n_pos() / n};
}

// C = 10 / min over -1 samples of the squared distance to the initial
// center. The slack knee sits at 1/sqrt(C), so this keeps every -1 sample
// initially well past the knee (C d^2 >= 10 > 1) with margin to spare as the
// center moves.
inline double default_penalty(const TrainingSet& data, const Vector& center0) {
  double min_sq = std::numeric_limits<double>::infinity();
  for (int j : data.neg_index)
    min_sq = std::min(min_sq, (data.X.col(j) - center0).squaredNorm());
  if (!(min_sq > 0.0))
    throw DegenerateCenter("a -1 sample coincides with the initial center");
  return 10.0 / min_sq;
}

// --- one linearized step as a cone program -----------------------------------

// Variable layout of the per-step program, plus the frozen linearization
// data (unit directions and distances taken at the previous center).
//
//   [rho_i, sigma_i, u_i]  n second-order blocks of size 3 (u_i pinned to 1)
//   [t, step]              one second-order block of size dim+1 (t pinned)
//   [R]                    nonnegative radius
//   [eps_i]                n nonnegative slacks
struct StepProblemLayout {
  int n = 0;         // training points
  int dim = 0;       // center dimension in the fitting space
  Matrix dirs;       // dim x n unit directions (x_i - O_prev)/d_i
  Vector dists;      // n distances d_i = ||x_i - O_prev||
  double delta = 0;  // trust radius pinned into the program

  int rho(int i) const { return 3 * i; }
  int sigma(int i) const { return 3 * i + 1; }
  int unit(int i) const { return 3 * i + 2; }
  int trust_head() const { return 3 * n; }
  int center_step(int j) const { return 3 * n + 1 + j; }
  int radius() const { return 3 * n + 1 + dim; }
  int slack(int i) const { return 3 * n + 2 + dim + i; }
  int total_vars() const { return 4 * n + dim + 2; }
};

// Equality rows: for each point
//   sigma_i - rho_i + R y_i + y_i dirs_i' step + eps_i = y_i d_i
// so rho_i - sigma_i equals the linearized signed residual plus slack; then
// one pin row per point (u_i = 1) and one for the trust head (t = delta).
inline std::pair<socp::ConicProgram, StepProblemLayout> build_step_problem(
    const TrainingSet& data, const Vector& prev_center,
    const RdwdConfig& config) {
  const int n = static_cast<int>(data.size());
  const int dim = static_cast<int>(data.dim());
  if (prev_center.size() != data.dim())
    throw DimensionMismatch("previous center has wrong dimension");

  StepProblemLayout layout;
  layout.n = n;
  layout.dim = dim;
  layout.delta = config.step_length;
  layout.dirs.resize(dim, n);
  layout.dists.resize(n);
  for (int i = 0; i < n; ++i) {
    const Vector diff = data.X.col(i) - prev_center;
    const double d = diff.norm();
    if (d == 0.0)
      throw DegeneratePoint("training sample " + std::to_string(i) +
                            " coincides with the expansion center");
    layout.dists[i] = d;
    layout.dirs.col(i) = diff / d;
  }

  const auto weights =
      config.weights ? *config.weights : default_weights(data);
  const double penalty = config.penalty
                             ? *config.penalty
                             : default_penalty(data, prev_center);

  const int nvar = layout.total_vars();
  const int m = 2 * n + 1;
  socp::ConicProgram p;
  p.c = Vector::Zero(nvar);
  p.A = Matrix::Zero(m, nvar);
  p.b = Vector::Zero(m);

  for (int i = 0; i < n; ++i) {
    const double y = data.labels[static_cast<std::size_t>(i)];
    const double w = y > 0 ? weights.first : weights.second;
    p.c[layout.rho(i)] = w;
    p.c[layout.sigma(i)] = w;
    p.c[layout.slack(i)] = penalty * w;

    p.A(i, layout.rho(i)) = -1.0;
    p.A(i, layout.sigma(i)) = 1.0;
    p.A(i, layout.radius()) = y;
    for (int j = 0; j < dim; ++j)
      p.A(i, layout.center_step(j)) = y * layout.dirs(j, i);
    p.A(i, layout.slack(i)) = 1.0;
    p.b[i] = y * layout.dists[i];

    p.A(n + i, layout.unit(i)) = 1.0;
    p.b[n + i] = 1.0;
  }
  p.A(2 * n, layout.trust_head()) = 1.0;
  p.b[2 * n] = layout.delta;

  using Kind = socp::ConeSpec::Kind;
  std::vector<std::pair<Kind, int>> parts;
  parts.reserve(static_cast<std::size_t>(n) + 3);
  for (int i = 0; i < n; ++i) parts.emplace_back(Kind::SecondOrder, 3);
  parts.emplace_back(Kind::SecondOrder, dim + 1);
  parts.emplace_back(Kind::Nonneg, 1);
  parts.emplace_back(Kind::Nonneg, n);
  p.cones = socp::ConeSpec::build(parts);
  p.check_well_formed();
  return {std::move(p), std::move(layout)};
}

// --- fit products -------------------------------------------------------------

// One outer-loop iterate, for tracing and the step-length property tests.
struct OuterIterState {
  Vector center_k;
  double radius_k = 0.0;
  double obj_k = 0.0;  // exact objective of the candidate sphere
  int step_index = 0;  // 1-based count of inner solves
  bool accepted = false;
  double delta = 0.0;  // trust radius used for this solve
};

// Dual variables and the final-step context needed to re-verify optimality
// from scratch. All vectors are indexed by training point; dirs/dists/step
// live in the space the fit ran in (reduced coordinates when d > n, which
// changes none of the inner products below).
struct DualCertificate {
  Vector z;             // equality multipliers, one per point
  double eta_hat = 0;   // dual scale recovered from the stationarity formula
  Vector z_star;        // z / eta, normalized so the +1 entries sum to 1
  double separability = 0;  // -d'Yz* + delta ||W Y z*||; positive = separable
  std::map<std::string, double> kkt_residuals;

  // Final accepted step snapshot.
  Vector labels;         // y_i as +-1.0
  Vector point_weights;  // w(y_i)
  double penalty = 0;
  double delta = 0;
  Vector dists;       // d_i at the expansion center
  Matrix dirs;        // unit directions at the expansion center
  Vector rho, sigma, slack;
  double radius = 0;
  Vector center_step;  // accepted Delta_O
  bool separable = true;
};

struct KktReport {
  std::map<std::string, double> residuals;
  double worst = 0.0;
  bool pass = false;
};

namespace detail {

inline double rho_from_z(double w, double z) {
  return (w + z) / (2.0 * std::sqrt(w * z));
}
inline double sigma_from_z(double w, double z) {
  return (z - w) / (2.0 * std::sqrt(w * z));
}

}  // namespace detail

// Recompute every optimality condition of the final linearized step from the
// certificate. All residuals are absolute; `pass` requires each <= tol.
inline KktReport kkt_check(const TrainingSet& data, const SphereModel& model,
                           const DualCertificate& cert, double tol = 1e-4) {
  const int n = static_cast<int>(data.size());
  KktReport report;
  if (cert.z.size() != n || cert.dists.size() != n) {
    report.residuals["certificate_shape"] =
        std::numeric_limits<double>::infinity();
    report.worst = report.residuals["certificate_shape"];
    return report;
  }
  const double radius = model.radius;
  auto put = [&](const std::string& name, double v) {
    report.residuals[name] = v;
  };

  // Equality rows of the step program at the stored primal point.
  double eq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = cert.labels[i];
    const double lin = cert.dirs.col(i).dot(cert.center_step);
    eq = std::max(eq, std::abs(cert.sigma[i] - cert.rho[i] + radius * y +
                               y * lin + cert.slack[i] - y * cert.dists[i]));
  }
  put("primal_equality", eq);

  // 0 <= z <= C w componentwise, slack complementarity (C w - z)' eps = 0.
  double zb = 0.0, comp = 0.0;
  for (int i = 0; i < n; ++i) {
    const double cap = cert.penalty * cert.point_weights[i];
    zb = std::max({zb, -cert.z[i], cert.z[i] - cap});
    comp += (cap - cert.z[i]) * cert.slack[i];
  }
  put("multiplier_bounds", std::max(zb, 0.0));
  put("slack_complementarity", std::abs(comp));

  // Radius sign and complementarity with the aggregate multiplier y'z.
  const double ytz = cert.labels.dot(cert.z);
  put("radius_nonneg", std::max(0.0, -radius));
  put("aggregate_sign", std::max(0.0, ytz));
  put("radius_complementarity", std::abs(radius * ytz));

  // rho/sigma must match their closed forms in z.
  double rs = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = cert.point_weights[i];
    rs = std::max(rs, std::abs(cert.rho[i] - detail::rho_from_z(w, cert.z[i])));
    rs = std::max(rs,
                  std::abs(cert.sigma[i] - detail::sigma_from_z(w, cert.z[i])));
  }
  put("rho_sigma_form", rs);

  // Trust-region complementarity: either the center force W Y z vanishes and
  // the step is interior, or the step is exactly delta along the force.
  Vector force = Vector::Zero(cert.dirs.rows());
  for (int i = 0; i < n; ++i)
    force += cert.dirs.col(i) * (cert.labels[i] * cert.z[i]);
  const double fn = force.norm();
  double trust;
  if (fn <= tol) {
    trust = std::max(0.0, cert.center_step.norm() - cert.delta);
  } else {
    trust = (cert.center_step - cert.delta * force / fn).norm();
  }
  put("trust_region", trust);

  report.worst = 0.0;
  for (const auto& [name, v] : report.residuals)
    report.worst = std::max(report.worst, v);
  report.pass = report.worst <= tol;
  return report;
}

struct DualDiagnostics {
  double eta_hat = 0.0;
  double separability = 0.0;
  bool separable = true;  // false when y'z < -tol (no proper sphere)
};

// Rescale the duals so each class sums to one and recover the dual scale
// eta from its stationarity condition. Meaningful when y'z = 0 (separable
// case); otherwise flagged and the caller should ignore the numbers.
inline DualDiagnostics dual_diagnostics(const DualCertificate& cert,
                                        double tol = 1e-6) {
  DualDiagnostics out;
  const double ytz = cert.labels.dot(cert.z);
  out.separable = ytz >= -tol;
  double eta = 0.0;
  for (Eigen::Index i = 0; i < cert.z.size(); ++i)
    if (cert.labels[i] > 0) eta += cert.z[i];
  if (eta <= 0.0) {
    out.separable = false;
    return out;
  }
  const Vector z_star = cert.z / eta;
  Vector force = Vector::Zero(cert.dirs.rows());
  double dterm = 0.0, num = 0.0;
  for (Eigen::Index i = 0; i < cert.z.size(); ++i) {
    force += cert.dirs.col(i) * (cert.labels[i] * z_star[i]);
    dterm += cert.dists[i] * cert.labels[i] * z_star[i];
    num += std::sqrt(cert.point_weights[i] * z_star[i]);
  }
  out.separability = -dterm + cert.delta * force.norm();
  if (out.separability > 0.0) {
    const double root = num / out.separability;
    out.eta_hat = root * root;
  }
  return out;
}

// --- QR reduction --------------------------------------------------------------

struct ReducedData {
  Matrix q_basis;        // d x n, orthonormal columns
  Matrix reduced_points;  // n x n upper triangular factor
  bool reduced = true;
  TrainingSet train;  // same labels, points = columns of reduced_points
};

// Thin QR of the data matrix: X = QU. Distances between points and any
// center in span(Q) are preserved, so a fit on the columns of U is a fit on
// X with the center mapped back as Q O_red.
inline ReducedData reduce_qr(const TrainingSet& data) {
  const Eigen::Index d = data.dim(), n = data.size();
  Eigen::HouseholderQR<Matrix> qr(data.X);
  ReducedData out;
  out.q_basis = qr.householderQ() * Matrix::Identity(d, n);
  out.reduced_points =
      qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  out.train.X = out.reduced_points;
  out.train.labels = data.labels;
  out.train.pos_index = data.pos_index;
  out.train.neg_index = data.neg_index;
  out.train.dropped_zero_neg = data.dropped_zero_neg;
  return out;
}

// --- outer loop -----------------------------------------------------------------

namespace detail {

// Newton-polish the dual multipliers on the final step. The outer loop
// converges where the center force W Y z nearly vanishes, which is exactly
// the nonsmooth point of the dual's trust term; interior-point duals carry
// amplified noise there (~1e-6) that the dual-scale identity inherits. When
// the active structure is clean (positive radius, no slack, caps inactive)
// the dual optimum solves the smooth reduced problem
//
//     max  d'Yz + 2 sum_i sqrt(w_i z_i) - delta ||W Y z||   s.t.  y'z = 0,
//
// and a couple of Newton steps from the solver's z reach machine precision.
// Any structural surprise aborts the polish and keeps the solver duals.
inline bool polish_certificate(DualCertificate& cert, double radius) {
  const Eigen::Index n = cert.z.size();
  const Eigen::Index dim = cert.dirs.rows();
  if (radius <= 1e-8) return false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double cap = cert.penalty * cert.point_weights[i];
    if (cert.slack[i] > 1e-8) return false;
    if (cert.z[i] < 1e-10 || cert.z[i] > cap * (1.0 - 1e-8)) return false;
  }

  Vector z = cert.z;
  double lam = 0.0;
  bool ok = false;
  for (int it = 0; it < 20; ++it) {
    Vector q = Vector::Zero(dim);
    for (Eigen::Index i = 0; i < n; ++i)
      q += cert.dirs.col(i) * (cert.labels[i] * z[i]);
    const double qn = q.norm();
    if (qn < 1e-12) return false;
    const Vector qhat = q / qn;

    Vector grad(n);
    for (Eigen::Index i = 0; i < n; ++i)
      grad[i] = cert.labels[i] * cert.dists[i] +
                std::sqrt(cert.point_weights[i] / z[i]) -
                cert.delta * cert.labels[i] * qhat.dot(cert.dirs.col(i)) -
                lam * cert.labels[i];

    Matrix kkt = Matrix::Zero(n + 1, n + 1);
    const Matrix proj = Matrix::Identity(dim, dim) - qhat * qhat.transpose();
    const Matrix pw = proj * cert.dirs;  // dim x n
    for (Eigen::Index i = 0; i < n; ++i) {
      kkt(i, i) = -0.5 * std::sqrt(cert.point_weights[i]) / std::pow(z[i], 1.5);
      for (Eigen::Index j = 0; j < n; ++j)
        kkt(i, j) -= cert.delta * cert.labels[i] * cert.labels[j] *
                     cert.dirs.col(i).dot(pw.col(j)) / qn;
      kkt(i, n) = -cert.labels[i];
      kkt(n, i) = cert.labels[i];
    }
    Vector rhs(n + 1);
    rhs.head(n) = -grad;
    rhs[n] = -cert.labels.dot(z);
    if (rhs.lpNorm<Eigen::Infinity>() <= 1e-12) {
      ok = true;
      break;
    }
    const Vector step = kkt.fullPivLu().solve(rhs);
    if (!step.allFinite()) return false;
    z += step.head(n);
    lam += step[n];
    for (Eigen::Index i = 0; i < n; ++i) {
      const double cap = cert.penalty * cert.point_weights[i];
      if (!(z[i] > 0.0 && z[i] < cap)) return false;
    }
  }
  if (!ok) return false;
  cert.z = z;
  return true;
}

// Trust-region outer loop in the given coordinates, starting from center0.
// Every inner solve counts toward max_outer_iters. A candidate is accepted
// only if the exact objective does not increase; rejection (or a struggling
// inner solve) halves the trust radius. Stopping compares consecutive
// accepted exact objectives, seeded with the conventional -1 sentinel so the
// first comparison never stops.
inline std::pair<SphereModel, DualCertificate> fit_with_init(
    const TrainingSet& data, RdwdConfig config, Vector center,
    std::vector<OuterIterState>* trace) {
  const int n = static_cast<int>(data.size());
  const auto weights =
      config.weights ? *config.weights : default_weights(data);
  config.weights = weights;
  if (!config.penalty) config.penalty = default_penalty(data, center);
  const double penalty = *config.penalty;

  double delta = config.step_length;
  double radius = 0.0;
  double accept_obj = std::numeric_limits<double>::infinity();
  double stop_obj = -1.0;  // sentinel: first stopping comparison always fails
  bool converged = false;

  socp::SolverTolerances inner;
  inner.run_presolve = false;  // step rows are full-rank by construction
  // Ask for more than the solver can usually deliver: it then runs to its
  // numerical floor and reports the best iterate it saw. The certificate is
  // reported off the final step, and the dual-scale identity it is checked
  // against amplifies dual error by a few orders of magnitude, so every
  // spare digit in the duals counts.
  inner.feas_tol = 1e-12;
  inner.gap_tol = 1e-12;

  DualCertificate cert;
  int solves = 0;
  while (solves < config.max_outer_iters && delta >= 1e-15) {
    // The expansion center must not sit on a training point; nudge it off
    // deterministically if it does (measure-zero, e.g. a collapsed +1 class).
    for (int attempt = 0; attempt <= static_cast<int>(data.dim()); ++attempt) {
      bool clean = true;
      for (Eigen::Index i = 0; i < data.size(); ++i)
        clean = clean && (data.X.col(i) - center).norm() > 0.0;
      if (clean) break;
      if (attempt == static_cast<int>(data.dim()))
        throw DegeneratePoint("could not separate center from the data");
      center[attempt % center.size()] += 1e-8;
    }

    RdwdConfig step_cfg = config;
    step_cfg.step_length = delta;
    auto [program, layout] = build_step_problem(data, center, step_cfg);
    const auto sol = socp::solve(program, inner);
    ++solves;

    // Accept the solve on achieved quality, not status: with tolerances set
    // past the floor, a well-solved step usually reports SlowProgress.
    const double quality = std::max(
        {sol.primal_residual, sol.dual_residual, std::abs(sol.gap)});
    if (!(quality <= 1e-7)) {
      delta *= 0.5;  // let the next program start from easier geometry
      continue;
    }

    Vector step(layout.dim);
    for (int j = 0; j < layout.dim; ++j)
      step[j] = sol.primal[layout.center_step(j)];
    const double cand_radius = sol.primal[layout.radius()];
    const Vector cand_center = center + step;
    const double cand_obj =
        exact_objective(data, cand_center, cand_radius, penalty, weights);

    const bool accept = cand_obj <= accept_obj;
    if (trace)
      trace->push_back(
          {cand_center, cand_radius, cand_obj, solves, accept, delta});

    if (!accept) {
      delta *= 0.5;
      continue;
    }

    center = cand_center;
    radius = cand_radius;
    accept_obj = cand_obj;

    cert.z = sol.dual_eq.head(n);
    cert.labels.resize(n);
    cert.point_weights.resize(n);
    cert.rho.resize(n);
    cert.sigma.resize(n);
    cert.slack.resize(n);
    for (int i = 0; i < n; ++i) {
      cert.labels[i] = data.labels[static_cast<std::size_t>(i)];
      cert.point_weights[i] =
          cert.labels[i] > 0 ? weights.first : weights.second;
      cert.rho[i] = sol.primal[layout.rho(i)];
      cert.sigma[i] = sol.primal[layout.sigma(i)];
      cert.slack[i] = sol.primal[layout.slack(i)];
    }
    cert.penalty = penalty;
    cert.delta = delta;
    cert.dists = layout.dists;
    cert.dirs = layout.dirs;
    cert.radius = cand_radius;
    cert.center_step = step;

    if (std::abs(cand_obj - stop_obj) < config.stop_eps) {
      converged = true;
      break;
    }
    stop_obj = cand_obj;
  }

  SphereModel model;
  model.center = center;
  model.radius = radius;
  model.config_snapshot = config;
  model.iterations = solves;
  model.converged = converged;

  // Rescaled duals and diagnostics for the final accepted step.
  if (cert.z.size() == n && n > 0) {
    polish_certificate(cert, model.radius);
    const auto diag = dual_diagnostics(cert);
    cert.eta_hat = diag.eta_hat;
    cert.separability = diag.separability;
    cert.separable = diag.separable;
    double eta = 0.0;
    for (int i = 0; i < n; ++i)
      if (cert.labels[i] > 0) eta += cert.z[i];
    cert.z_star = eta > 0.0 ? Vector(cert.z / eta) : Vector::Zero(n);
    cert.kkt_residuals = kkt_check(data, model, cert).residuals;
  }
  return {std::move(model), std::move(cert)};
}

}  // namespace detail

// Fit the sphere. Reduces to QR coordinates automatically when d > n (the
// optimum is unchanged; see reduce_qr) and maps the center — and any traced
// iterates — back to the input space.
inline std::pair<SphereModel, DualCertificate> fit(
    const TrainingSet& data, const RdwdConfig& config,
    std::vector<OuterIterState>* trace = nullptr) {
  if (data.pos_index.empty())
    throw EmptyPositiveClass("fit needs at least one +1 sample");
  const Vector center0 =
      initialize_center(data, config.init_mode, config.init_center);
  if (data.dim() <= data.size())
    return detail::fit_with_init(data, config, center0, trace);

  const ReducedData red = reduce_qr(data);
  auto fitted = detail::fit_with_init(
      red.train, config, red.q_basis.transpose() * center0, trace);
  fitted.first.center = red.q_basis * fitted.first.center;
  if (trace)
    for (auto& state : *trace) state.center_k = red.q_basis * state.center_k;
  return fitted;
}

}  // namespace rdwd::radial
