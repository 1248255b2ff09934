#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

// Self-contained primal-dual interior-point solver for standard-form cone
// programs
//
//     min c'x   s.t.  Ax = b,  x in K,
//
// where K is a product of nonnegative orthants and second-order cones
// S_k = {(h; u) : h >= ||u||_2}. Path-following with Nesterov-Todd scaling
// and a Mehrotra predictor-corrector step; the KKT systems are reduced to
// dense normal equations M = A W^2 A' and factored by Cholesky. Everything
// is deterministic: fixed iteration order, no randomized pivoting.

namespace rdwd::socp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct InconsistentEqualities : std::runtime_error {
  explicit InconsistentEqualities(const std::string& what)
      : std::runtime_error(what) {}
};

struct BadProgram : std::runtime_error {
  explicit BadProgram(const std::string& what) : std::runtime_error(what) {}
};

struct ConeSpec {
  enum class Kind { Nonneg, SecondOrder };
  struct Block {
    Kind kind;
    int offset = 0;  // first variable index
    int size = 0;    // number of variables
  };
  std::vector<Block> blocks;

  int total_dim() const {
    int n = 0;
    for (const auto& b : blocks) n += b.size;
    return n;
  }
  // Barrier degree: 1 per orthant entry, 1 per second-order block.
  int degree() const {
    int nu = 0;
    for (const auto& b : blocks)
      nu += b.kind == Kind::Nonneg ? b.size : 1;
    return nu;
  }

  static ConeSpec build(const std::vector<std::pair<Kind, int>>& parts) {
    ConeSpec spec;
    int off = 0;
    for (auto [kind, size] : parts) {
      if (size < 1 || (kind == Kind::SecondOrder && size < 2))
        throw BadProgram("cone block of size " + std::to_string(size));
      spec.blocks.push_back({kind, off, size});
      off += size;
    }
    return spec;
  }
};

struct ConicProgram {
  Vector c;
  Matrix A;  // m x nvar
  Vector b;
  ConeSpec cones;

  void check_well_formed() const {
    const auto nvar = c.size();
    if (A.cols() != nvar || A.rows() != b.size())
      throw BadProgram("A/b/c dimensions disagree");
    if (cones.total_dim() != nvar)
      throw BadProgram("cone blocks cover " +
                       std::to_string(cones.total_dim()) + " of " +
                       std::to_string(nvar) + " variables");
  }
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, SlowProgress };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    default: return "SlowProgress";
  }
}

struct ConicSolution {
  Vector primal;     // x
  Vector dual_eq;    // multipliers on Ax = b
  Vector dual_cone;  // s, with A'y + s = c
  double objective_value = 0.0;
  double gap = 0.0;  // absolute duality gap <x, s>
  SolveStatus status = SolveStatus::SlowProgress;
  int iterations = 0;
  double primal_residual = 0.0;  // ||Ax-b||_inf / (1+||b||_inf)
  double dual_residual = 0.0;    // ||A'y+s-c||_inf / (1+||c||_inf)
};

struct SolverTolerances {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iters = 100;
  bool run_presolve = true;  // callers that build full-rank rows may skip
  std::ostream* trace = nullptr;  // per-iteration diagnostics when set
};

// --- Jordan-algebra helpers on one second-order block -----------------------
// u = (u0; u1) with det(u) = u0^2 - ||u1||^2; eigenvalues u0 +- ||u1||.

namespace detail {

inline double soc_det(const Eigen::Ref<const Vector>& u) {
  return u[0] * u[0] - u.tail(u.size() - 1).squaredNorm();
}

inline double soc_min_eig(const Eigen::Ref<const Vector>& u) {
  return u[0] - u.tail(u.size() - 1).norm();
}

// Quadratic representation applied to a vector:
// Q_u r = 2 u (u'r) - det(u) J r, with J = diag(1, -I).
inline void soc_quad_apply(const Eigen::Ref<const Vector>& u,
                           const Eigen::Ref<const Vector>& r, Vector& out) {
  const auto k = u.size();
  const double det = soc_det(u);
  const double ur = u.dot(r);
  out.resize(k);
  out[0] = 2.0 * u[0] * ur - det * r[0];
  out.tail(k - 1) = 2.0 * ur * u.tail(k - 1) + det * r.tail(k - 1);
}

// Jordan square root of u (requires u interior).
inline void soc_sqrt(const Eigen::Ref<const Vector>& u, Vector& out) {
  const auto k = u.size();
  const double eta = std::sqrt(soc_det(u));
  out.resize(k);
  out[0] = std::sqrt((u[0] + eta) / 2.0);
  out.tail(k - 1) = u.tail(k - 1) / (2.0 * out[0]);
}

// Solve Arw(u) g = r:  Arw(u) = [[u0, u1'], [u1, u0 I]].
inline void soc_arrow_solve(const Eigen::Ref<const Vector>& u,
                            const Eigen::Ref<const Vector>& r, Vector& out) {
  const auto k = u.size();
  const double det = soc_det(u);
  const auto u1 = u.tail(k - 1);
  const auto r1 = r.tail(k - 1);
  out.resize(k);
  const double g0 = (u[0] * r[0] - u1.dot(r1)) / det;
  out[0] = g0;
  out.tail(k - 1) = (r1 - g0 * u1) / u[0];
}

// Jordan product u o v = (u'v; u0 v1 + v0 u1).
inline void soc_prod(const Eigen::Ref<const Vector>& u,
                     const Eigen::Ref<const Vector>& v, Vector& out) {
  const auto k = u.size();
  out.resize(k);
  out[0] = u.dot(v);
  out.tail(k - 1) = u[0] * v.tail(k - 1) + v[0] * u.tail(k - 1);
}

}  // namespace detail

// Remove linearly dependent equality rows (sequential Gram-Schmidt with
// re-orthogonalization, rhs tracked alongside). A dependent row whose
// transformed rhs is nonzero is a contradiction.
inline ConicProgram presolve(const ConicProgram& p, double tol = 1e-10) {
  p.check_well_formed();
  const auto m = p.A.rows();
  std::vector<Eigen::Index> keep;
  Matrix q(m, p.A.cols());  // orthonormalized kept rows
  Vector qb(m);             // rhs transformed identically
  Eigen::Index nkept = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    Vector r = p.A.row(i).transpose();
    double br = p.b[i];
    const double scale = std::max(1.0, r.lpNorm<Eigen::Infinity>());
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < nkept; ++j) {
        const double proj = q.row(j).dot(r);
        r -= proj * q.row(j).transpose();
        br -= proj * qb[j];
      }
    }
    const double nr = r.norm();
    if (nr <= tol * scale) {
      if (std::abs(br) > tol * (1.0 + std::abs(p.b[i])))
        throw InconsistentEqualities("row " + std::to_string(i) +
                                     " contradicts earlier rows");
      continue;  // redundant
    }
    q.row(nkept) = r.transpose() / nr;
    qb[nkept] = br / nr;
    ++nkept;
    keep.push_back(i);
  }
  if (keep.size() == static_cast<std::size_t>(m)) return p;
  ConicProgram out;
  out.c = p.c;
  out.cones = p.cones;
  out.A.resize(static_cast<Eigen::Index>(keep.size()), p.A.cols());
  out.b.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.A.row(static_cast<Eigen::Index>(i)) = p.A.row(keep[i]);
    out.b[static_cast<Eigen::Index>(i)] = p.b[keep[i]];
  }
  return out;
}

namespace detail {

// Nesterov-Todd scaling for the full cone product. For each block the
// scaling point w satisfies Q_w s = x; W = Q_{sqrt(w)} maps the scaled
// variable lambda = W^{-1} x = W s.
class NTScaling {
 public:
  explicit NTScaling(const ConeSpec& cones) : cones_(cones) {
    w_.resize(cones.total_dim());
    sq_.resize(cones.total_dim());
    sqinv_.resize(cones.total_dim());
    eta2_.assign(cones.blocks.size(), 0.0);
  }

  void compute(const Vector& x, const Vector& s) {
    for (std::size_t bi = 0; bi < cones_.blocks.size(); ++bi) {
      const auto& blk = cones_.blocks[bi];
      auto xb = x.segment(blk.offset, blk.size);
      auto sb = s.segment(blk.offset, blk.size);
      if (blk.kind == ConeSpec::Kind::Nonneg) {
        w_.segment(blk.offset, blk.size) =
            (xb.array() / sb.array()).sqrt().matrix();
      } else {
        const double dx = soc_det(xb), ds = soc_det(sb);
        const double eta = std::sqrt(std::sqrt(dx / ds));  // (dx/ds)^(1/4)
        Vector xhat = xb / std::sqrt(dx);
        Vector shat = sb / std::sqrt(ds);
        const double gamma = std::sqrt((1.0 + xhat.dot(shat)) / 2.0);
        Vector wbar(blk.size);
        wbar[0] = (xhat[0] + shat[0]) / (2.0 * gamma);
        wbar.tail(blk.size - 1) =
            (xhat.tail(blk.size - 1) - shat.tail(blk.size - 1)) / (2.0 * gamma);
        Vector w = eta * wbar;
        w_.segment(blk.offset, blk.size) = w;
        Vector sq;
        soc_sqrt(w, sq);
        sq_.segment(blk.offset, blk.size) = sq;
        // (sqrt w)^{-1} = J sqrt(w) / eta
        sqinv_(blk.offset) = sq[0] / eta;
        sqinv_.segment(blk.offset + 1, blk.size - 1) =
            -sq.tail(blk.size - 1) / eta;
        eta2_[bi] = eta * eta;  // det(w)
      }
    }
  }

  // out = W v (orthant: diag(w) v; SOC: Q_{sqrt w} v).
  void apply_W(const Vector& v, Vector& out) const { apply(sq_, v, out, false); }
  // out = W^{-1} v.
  void apply_Winv(const Vector& v, Vector& out) const {
    apply(sqinv_, v, out, true);
  }

  const Vector& w() const { return w_; }
  double soc_det_w(std::size_t block_index) const { return eta2_[block_index]; }

 private:
  void apply(const Vector& pt, const Vector& v, Vector& out, bool inv) const {
    out.resize(v.size());
    for (std::size_t bi = 0; bi < cones_.blocks.size(); ++bi) {
      const auto& blk = cones_.blocks[bi];
      auto vb = v.segment(blk.offset, blk.size);
      if (blk.kind == ConeSpec::Kind::Nonneg) {
        auto wb = w_.segment(blk.offset, blk.size);
        if (inv)
          out.segment(blk.offset, blk.size) = vb.cwiseQuotient(wb);
        else
          out.segment(blk.offset, blk.size) = vb.cwiseProduct(wb);
      } else {
        Vector r;
        soc_quad_apply(pt.segment(blk.offset, blk.size), vb, r);
        out.segment(blk.offset, blk.size) = r;
      }
    }
  }

  const ConeSpec& cones_;
  Vector w_, sq_, sqinv_;
  std::vector<double> eta2_;
};

// Largest t >= 0 with x + t dx in K, via Jordan eigenvalues of the scaled
// direction; infinity-free (capped by the caller).
inline double max_step(const ConeSpec& cones, const Vector& x,
                       const Vector& dx) {
  double tmax = std::numeric_limits<double>::infinity();
  for (const auto& blk : cones.blocks) {
    if (blk.kind == ConeSpec::Kind::Nonneg) {
      for (int j = 0; j < blk.size; ++j) {
        const double d = dx[blk.offset + j];
        if (d < 0.0) tmax = std::min(tmax, -x[blk.offset + j] / d);
      }
    } else {
      auto xb = x.segment(blk.offset, blk.size);
      auto db = dx.segment(blk.offset, blk.size);
      // v = Q_{x^{-1/2}} dx; x + t dx in S iff min eig of e + t v >= 0.
      Vector sq, sqi(blk.size), v;
      soc_sqrt(xb, sq);
      const double eta = std::sqrt(soc_det(xb));
      sqi[0] = sq[0] / eta;
      sqi.tail(blk.size - 1) = -sq.tail(blk.size - 1) / eta;
      soc_quad_apply(sqi, db, v);
      const double lo = soc_min_eig(v);
      if (lo < 0.0) tmax = std::min(tmax, -1.0 / lo);
    }
  }
  return tmax;
}

// Identity element of the cone product: 1 on orthant entries, (1;0) per SOC.
inline Vector cone_identity(const ConeSpec& cones) {
  Vector e = Vector::Zero(cones.total_dim());
  for (const auto& blk : cones.blocks) {
    if (blk.kind == ConeSpec::Kind::Nonneg)
      e.segment(blk.offset, blk.size).setOnes();
    else
      e[blk.offset] = 1.0;
  }
  return e;
}

inline double cone_min_eig(const ConeSpec& cones, const Vector& u) {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& blk : cones.blocks) {
    if (blk.kind == ConeSpec::Kind::Nonneg)
      lo = std::min(lo, u.segment(blk.offset, blk.size).minCoeff());
    else
      lo = std::min(lo, soc_min_eig(u.segment(blk.offset, blk.size)));
  }
  return lo;
}

// Blockwise Jordan product / arrow solve over the whole cone product.
inline void cone_prod(const ConeSpec& cones, const Vector& u, const Vector& v,
                      Vector& out) {
  out.resize(u.size());
  for (const auto& blk : cones.blocks) {
    if (blk.kind == ConeSpec::Kind::Nonneg) {
      out.segment(blk.offset, blk.size) =
          u.segment(blk.offset, blk.size).cwiseProduct(
              v.segment(blk.offset, blk.size));
    } else {
      Vector r;
      soc_prod(u.segment(blk.offset, blk.size), v.segment(blk.offset, blk.size),
               r);
      out.segment(blk.offset, blk.size) = r;
    }
  }
}

inline void cone_arrow_solve(const ConeSpec& cones, const Vector& lam,
                             const Vector& r, Vector& out) {
  out.resize(r.size());
  for (const auto& blk : cones.blocks) {
    if (blk.kind == ConeSpec::Kind::Nonneg) {
      out.segment(blk.offset, blk.size) =
          r.segment(blk.offset, blk.size).cwiseQuotient(
              lam.segment(blk.offset, blk.size));
    } else {
      Vector g;
      soc_arrow_solve(lam.segment(blk.offset, blk.size),
                      r.segment(blk.offset, blk.size), g);
      out.segment(blk.offset, blk.size) = g;
    }
  }
}

// Cached per-block structure for assembling M = A W^2 A' each iteration.
// Second-order blocks contribute 2 (A_B w)(A_B w)' - det(w) A_B J A_B';
// the J-term matrix is constant across iterations, so it is built once on
// the rows where A_B is nonzero.
struct BlockCache {
  std::vector<Eigen::Index> active_rows;  // rows of A touching this block
  Matrix a_active;                        // active_rows x size slice of A
  Matrix jterm;                           // a_active J a_active'
};

}  // namespace detail

inline ConicSolution solve(const ConicProgram& program_in,
                           const SolverTolerances& tol = {}) {
  using namespace detail;
  const ConicProgram program =
      tol.run_presolve ? presolve(program_in) : program_in;
  program.check_well_formed();

  const auto& A = program.A;
  const auto& b = program.b;
  const auto& c = program.c;
  const auto& cones = program.cones;
  const Eigen::Index m = A.rows();
  const Eigen::Index nvar = A.cols();
  const double nu = cones.degree();
  const Vector e = cone_identity(cones);

  // Per-block caches for the normal-equations assembly.
  std::vector<BlockCache> caches(cones.blocks.size());
  for (std::size_t bi = 0; bi < cones.blocks.size(); ++bi) {
    const auto& blk = cones.blocks[bi];
    if (blk.kind == ConeSpec::Kind::Nonneg) continue;
    auto& cache = caches[bi];
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!A.row(i).segment(blk.offset, blk.size).isZero(0.0))
        cache.active_rows.push_back(i);
    }
    const auto na = static_cast<Eigen::Index>(cache.active_rows.size());
    cache.a_active.resize(na, blk.size);
    for (Eigen::Index r = 0; r < na; ++r)
      cache.a_active.row(r) = A.row(cache.active_rows[r]).segment(blk.offset,
                                                                  blk.size);
    Matrix aj = cache.a_active;  // A_B J: negate all but the head column
    aj.rightCols(blk.size - 1) *= -1.0;
    cache.jterm.noalias() = aj * cache.a_active.transpose();
  }

  // Interior start: cone identity pushed onto the affine subspaces by one
  // least-squares step, then shifted back inside the cone if needed.
  Vector x = e, s = e, y = Vector::Zero(m);
  Eigen::LLT<Matrix> aat_llt;
  if (m > 0) {
    Matrix aat = A * A.transpose();
    aat_llt.compute(aat);
    if (aat_llt.info() == Eigen::Success) {
      x = e + A.transpose() * aat_llt.solve(b - A * e);
      y = aat_llt.solve(A * c);
      s = c - A.transpose() * y;
      const double shift_p = std::max(0.0, 1.0 - cone_min_eig(cones, x));
      const double shift_d = std::max(0.0, 1.0 - cone_min_eig(cones, s));
      x += shift_p * e;
      s += shift_d * e;
    } else {
      x = e;
      s = e;
      y.setZero();
    }
  }

  ConicSolution sol;
  sol.primal = x;
  sol.dual_eq = y;
  sol.dual_cone = s;

  NTScaling scaling(cones);
  Vector lam, dx(nvar), ds(nvar), dy(m), g, corr, tmp, tmp2;
  Matrix M(m, m), Msym(m, m), Mfact(m, m);
  const double bnorm = m > 0 ? b.lpNorm<Eigen::Infinity>() : 0.0;
  const double cnorm = c.lpNorm<Eigen::Infinity>();

  auto finish = [&](SolveStatus st, int iter) {
    sol.status = st;
    sol.iterations = iter;
    sol.primal = x;
    sol.dual_eq = y;
    sol.dual_cone = s;
    sol.objective_value = c.dot(x);
    sol.gap = x.dot(s);
    sol.primal_residual =
        m > 0 ? (A * x - b).lpNorm<Eigen::Infinity>() / (1.0 + bnorm) : 0.0;
    sol.dual_residual = (A.transpose() * y + s - c).lpNorm<Eigen::Infinity>() /
                        (1.0 + cnorm);
    return sol;
  };

  // Snapshot of the best iterate seen. Near machine precision the primal
  // residual can bounce upward again, and one step past the floor the
  // scaling arithmetic turns the iterate into NaNs; both cases roll back,
  // as does a stretch of iterations with no new best (stagnation).
  Vector best_x = x, best_y = y, best_s = s;
  double best_score = std::numeric_limits<double>::infinity();
  int stalled = 0;

  for (int iter = 0; iter < tol.max_iters; ++iter) {
    const Vector rp = b - A * x;
    const Vector rd = c - A.transpose() * y - s;
    const double gap = x.dot(s);
    const double mu = gap / nu;
    const double pinf = m > 0 ? rp.lpNorm<Eigen::Infinity>() / (1.0 + bnorm) : 0.0;
    const double dinf = rd.lpNorm<Eigen::Infinity>() / (1.0 + cnorm);
    if (tol.trace)
      *tol.trace << "iter " << iter << " pinf " << pinf << " dinf " << dinf
                 << " gap " << gap << " mu " << mu << '\n';

    const double score = std::max({pinf, dinf, std::abs(gap)});
    if (!std::isfinite(score) || (score >= best_score && ++stalled >= 8)) {
      x = best_x;
      y = best_y;
      s = best_s;
      return finish(SolveStatus::SlowProgress, iter);
    }
    if (score < best_score) {
      best_score = score;
      best_x = x;
      best_y = y;
      best_s = s;
      stalled = 0;
    }

    if (pinf <= tol.feas_tol && dinf <= tol.feas_tol && gap <= tol.gap_tol)
      return finish(SolveStatus::Optimal, iter);

    // Certificate heuristics: a diverging dual ray with A'y + s ~ 0 and
    // b'y > 0 proves primal infeasibility; a primal ray with Ax ~ 0 and
    // c'x < 0 proves unboundedness.
    if (m > 0) {
      const double by = b.dot(y);
      if (by > 1e-8 * (1.0 + y.lpNorm<Eigen::Infinity>())) {
        const double ray = (A.transpose() * y + s).lpNorm<Eigen::Infinity>();
        if (ray <= 1e-6 * by) return finish(SolveStatus::Infeasible, iter);
      }
    }
    {
      const double cx = c.dot(x);
      if (cx < -1e-8 * (1.0 + x.lpNorm<Eigen::Infinity>())) {
        const double ray = m > 0 ? (A * x).lpNorm<Eigen::Infinity>() : 0.0;
        if (ray <= 1e-6 * (-cx)) return finish(SolveStatus::Unbounded, iter);
      }
    }

    scaling.compute(x, s);
    scaling.apply_W(s, lam);  // lambda = W s = W^{-1} x

    // M = A W^2 A', assembled blockwise.
    if (m > 0) {
      M.setZero();
      for (std::size_t bi = 0; bi < cones.blocks.size(); ++bi) {
        const auto& blk = cones.blocks[bi];
        if (blk.kind == ConeSpec::Kind::Nonneg) {
          // sum_j w_j^2 a_j a_j'
          Matrix scaled =
              A.middleCols(blk.offset, blk.size) *
              scaling.w().segment(blk.offset, blk.size).asDiagonal();
          M.selfadjointView<Eigen::Lower>().rankUpdate(scaled, 1.0);
        } else {
          const auto& cache = caches[bi];
          const auto na = static_cast<Eigen::Index>(cache.active_rows.size());
          if (na == 0) continue;
          Vector u = cache.a_active * scaling.w().segment(blk.offset, blk.size);
          const double detw = scaling.soc_det_w(bi);
          for (Eigen::Index r = 0; r < na; ++r) {
            const auto gr = cache.active_rows[r];
            for (Eigen::Index q = 0; q <= r; ++q) {
              const auto gq = cache.active_rows[q];
              const double val = 2.0 * u[r] * u[q] - detw * cache.jterm(r, q);
              if (gr >= gq)
                M(gr, gq) += val;
              else
                M(gq, gr) += val;
            }
          }
        }
      }
    }
    Eigen::LLT<Matrix> llt;
    if (m > 0) {
      Msym.triangularView<Eigen::Lower>() = M.triangularView<Eigen::Lower>();
      Msym.triangularView<Eigen::StrictlyUpper>() =
          M.triangularView<Eigen::StrictlyLower>().transpose();
      llt.compute(Msym);
      if (llt.info() != Eigen::Success) {
        // Near convergence the scaled normal matrix goes numerically
        // semidefinite; a hair of diagonal regularization keeps the
        // factorization alive. Msym itself stays pristine so the refinement
        // below corrects against the true matrix.
        const double base = Msym.diagonal().cwiseAbs().maxCoeff() + 1.0;
        for (double reg = 1e-14; reg <= 1e-7; reg *= 100.0) {
          Mfact = Msym;
          Mfact.diagonal().array() += reg * base;
          llt.compute(Mfact);
          if (llt.info() == Eigen::Success) break;
        }
        if (llt.info() != Eigen::Success)
          return finish(SolveStatus::SlowProgress, iter);
      }
    }

    auto kkt_solve = [&](const Vector& rhs_comp) {
      // rhs_comp is the complementarity target in scaled space:
      //   W^{-1}dx + W ds = Arw(lam)^{-1} rhs_comp =: g
      cone_arrow_solve(cones, lam, rhs_comp, g);
      // dy from (A W^2 A') dy = rp - A W g + A W^2 rd
      scaling.apply_W(g, tmp);  // W g
      if (m > 0) {
        Vector rhs = rp - A * tmp;
        scaling.apply_W(rd, tmp2);
        scaling.apply_W(tmp2, tmp2);  // W^2 rd
        rhs.noalias() += A * tmp2;
        dy = llt.solve(rhs);
        // One refinement step against the unregularized normal matrix,
        // recovering the digits the diagonal regularization (when it was
        // needed to factorize at all) would otherwise bias away.
        dy += llt.solve(Vector(rhs - Msym * dy));
        ds = rd - A.transpose() * dy;
      } else {
        dy.resize(0);
        ds = rd;
      }
      scaling.apply_W(ds, tmp2);  // W ds
      tmp2 = g - tmp2;
      scaling.apply_W(tmp2, dx);  // dx = W(g - W ds)
    };

    // Predictor (affine) direction: target -lam o lam.
    cone_prod(cones, lam, lam, corr);
    kkt_solve(-corr);
    const double ap = std::min(1.0, max_step(cones, x, dx));
    const double ad = std::min(1.0, max_step(cones, s, ds));
    const double alpha_aff = std::min(ap, ad);
    const double mu_aff =
        (x + alpha_aff * dx).dot(s + alpha_aff * ds) / nu;
    double sigma = std::pow(std::max(0.0, mu_aff / mu), 3.0);
    sigma = std::min(1.0, sigma);

    // Corrector: sigma mu e - lam o lam - (W^{-1}dx_aff) o (W ds_aff).
    scaling.apply_Winv(dx, tmp);
    scaling.apply_W(ds, tmp2);
    Vector cross;
    cone_prod(cones, tmp, tmp2, cross);
    Vector target = sigma * mu * e - corr - cross;
    kkt_solve(target);

    const double bp = max_step(cones, x, dx);
    const double bd = max_step(cones, s, ds);
    const double alpha = std::min(1.0, 0.99 * std::min(bp, bd));
    if (tol.trace)
      *tol.trace << "  sigma " << sigma << " alpha_aff " << alpha_aff
                 << " alpha " << alpha << '\n';
    if (!std::isfinite(alpha) || alpha < 1e-11)
      return finish(SolveStatus::SlowProgress, iter);

    x += alpha * dx;
    y += alpha * dy;
    s += alpha * ds;
  }
  x = best_x;
  y = best_y;
  s = best_s;
  return finish(SolveStatus::SlowProgress, tol.max_iters);
}

// Line-oriented debug dump (one record per line):
//   obj <j> <value>
//   row <i> <j> <value>      nonzero A entries
//   rhs <i> <value>
//   cone <nonneg|soc> <len>  in variable order
inline void dump_program(const ConicProgram& p, std::ostream& os) {
  os.precision(17);
  for (Eigen::Index j = 0; j < p.c.size(); ++j)
    if (p.c[j] != 0.0) os << "obj " << j << ' ' << p.c[j] << '\n';
  for (Eigen::Index i = 0; i < p.A.rows(); ++i)
    for (Eigen::Index j = 0; j < p.A.cols(); ++j)
      if (p.A(i, j) != 0.0) os << "row " << i << ' ' << j << ' ' << p.A(i, j) << '\n';
  for (Eigen::Index i = 0; i < p.b.size(); ++i)
    if (p.b[i] != 0.0) os << "rhs " << i << ' ' << p.b[i] << '\n';
  for (const auto& blk : p.cones.blocks)
    os << "cone " << (blk.kind == ConeSpec::Kind::Nonneg ? "nonneg" : "soc")
       << ' ' << blk.size << '\n';
}

}  // namespace rdwd::socp
