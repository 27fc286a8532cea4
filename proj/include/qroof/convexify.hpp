#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "qroof/ensemble.hpp"
#include "qroof/functional.hpp"
#include "qroof/optim.hpp"
#include "qroof/random.hpp"

namespace qroof {

struct HullResult {
  double value;
  Ensemble witness;
  int iterations_used;
  bool converged;
};

struct DualOperator {
  Matrix A;
  double norm_cap;

  DualOperator(Matrix a, double cap) : A(std::move(a)), norm_cap(cap) {
    if (cap <= 0) throw DomainError("norm cap must be positive");
    if ((A - A.adjoint()).cwiseAbs().maxCoeff() > tol::herm)
      throw DomainError("dual operator must be Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol::psd ||
        es.eigenvalues().maxCoeff() > cap + tol::psd)
      throw DomainError("dual operator outside [0, cap*I]");
  }
};

// Function defined on pure states, taking a normalized amplitude vector.
using PureFn = std::function<double(const Vector&)>;

namespace detail {

inline Matrix qr_retract(const Matrix& v) {
  Eigen::HouseholderQR<Matrix> qr(v);
  return qr.householderQ() * Matrix::Identity(v.rows(), v.cols());
}

// Ensemble average of f over the pure decomposition generated by isometry V,
// without materializing Ensemble objects.
inline double roof_objective(const Matrix& B, const Matrix& V, const PureFn& f) {
  const Matrix psi = B * V.transpose();
  double acc = 0;
  for (int i = 0; i < psi.cols(); ++i) {
    const double w = psi.col(i).squaredNorm();
    if (w < tol::weight_floor) continue;
    acc += w * f(psi.col(i) / std::sqrt(w));
  }
  return acc;
}

}  // namespace detail

/// Convex roof: infimum of ensemble averages of f over pure decompositions of
/// rho, searched over the isometry parameterization. The returned value is
/// recomputed from the witness, so it is always a feasible upper bound.
inline HullResult convex_roof(const PureFn& f, const DensityMatrix& rho,
                              const OptimizerConfig& cfg) {
  const Support s = support_of(rho);
  const int r = s.rank();
  if (r == 1) {
    PureStateVector psi(s.basis.col(0));
    return {f(psi.amplitudes()), Ensemble::single(psi), 0, true};
  }
  const int m = std::max(cfg.ensemble_size_override.value_or(r * r), r);
  const Matrix B = s.basis * s.eigenvalues.cwiseSqrt().asDiagonal();

  auto objective = [&](const Matrix& V) { return detail::roof_objective(B, V, f); };
  auto perturb = [&](const Matrix& V, double sigma, Rng& rng) {
    return detail::qr_retract(V + sigma * random_gaussian_matrix(m, r, rng));
  };

  auto run = [&](int idx) {
    Rng rng(cfg.seed + static_cast<std::uint64_t>(idx));
    Matrix v0;
    if (idx == 0) {
      v0 = Matrix::Zero(m, r);
      v0.topRows(r) = Matrix::Identity(r, r);
    } else {
      v0 = random_isometry(m, r, rng).V;
    }
    return detail::local_search(v0, objective(v0), perturb, objective, cfg.max_iters,
                                cfg.tol, rng);
  };

  auto best = detail::multistart<Matrix>(cfg.restarts, run);
  Ensemble witness = pure_decomposition(rho, {best.param});
  double value = 0;
  for (const auto& a : witness.atoms())
    value += a.weight * f(std::get<PureStateVector>(a.state).amplitudes());
  return {value, std::move(witness), best.iterations, best.converged};
}

namespace detail {

struct PovmParam {
  std::vector<Matrix> blocks;  // B_i; POVM element M_i = T^-1/2 B_i^+ B_i T^-1/2
};

inline std::vector<Matrix> povm_from_blocks(const std::vector<Matrix>& blocks) {
  const int r = static_cast<int>(blocks.front().cols());
  Matrix T = Matrix::Zero(r, r);
  for (const auto& b : blocks) T += b.adjoint() * b;
  T += 1e-14 * Matrix::Identity(r, r);
  Eigen::SelfAdjointEigenSolver<Matrix> es(T);
  const Matrix tinv_sqrt = es.eigenvectors() *
                           es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                           es.eigenvectors().adjoint();
  std::vector<Matrix> povm;
  povm.reserve(blocks.size());
  for (const auto& b : blocks) {
    const Matrix bt = b * tinv_sqrt;
    povm.push_back(bt.adjoint() * bt);
  }
  return povm;
}

inline double hull_objective(const Support& s, const std::vector<Matrix>& blocks,
                             const StateFunction& f) {
  const std::vector<Matrix> povm = povm_from_blocks(blocks);
  const Matrix sq = s.eigenvalues.cwiseSqrt().asDiagonal();
  double acc = 0;
  for (const auto& M : povm) {
    const Matrix sig = sq * M * sq;
    const double w = sig.trace().real();
    if (w < tol::weight_floor) continue;
    Matrix full = s.basis * (sig / w) * s.basis.adjoint();
    acc += w * f(DensityMatrix::trusted(std::move(full)));
  }
  return acc;
}

}  // namespace detail

/// Convex hull: infimum of ensemble averages of f over finite mixed-state
/// decompositions of rho, parameterized through POVMs on the support. The
/// trivial one-atom decomposition is always a candidate, so value <= f(rho).
inline HullResult convex_hull(const StateFunction& f, const DensityMatrix& rho,
                              const OptimizerConfig& cfg) {
  const double f_at_rho = f(rho);
  if (!std::isfinite(f_at_rho))
    throw DomainError("convex_hull requires a finite-valued function");
  const Support s = support_of(rho);
  const int r = s.rank();
  if (r == 1)
    return {f_at_rho, Ensemble::single(rho), 0, true};
  const int k = std::max(cfg.ensemble_size_override.value_or(r * r), 2);

  auto objective = [&](const detail::PovmParam& p) {
    return detail::hull_objective(s, p.blocks, f);
  };
  auto perturb = [&](const detail::PovmParam& p, double sigma, Rng& rng) {
    detail::PovmParam q = p;
    for (auto& b : q.blocks)
      b += sigma * random_gaussian_matrix(static_cast<int>(b.rows()), r, rng);
    return q;
  };

  // Blocks of height 1 generate rank-1 POVM elements, so those restarts search
  // the pure-atom decompositions exactly (optimal whenever f is concave);
  // full-height blocks cover genuinely mixed decompositions.
  auto run = [&](int idx) {
    Rng rng(cfg.seed + static_cast<std::uint64_t>(idx));
    detail::PovmParam p0;
    p0.blocks.resize(k);
    if (idx == 0) {
      // Near-trivial start: one dominant element.
      p0.blocks[0] = Matrix::Identity(r, r);
      for (int i = 1; i < k; ++i)
        p0.blocks[i] = 0.05 * random_gaussian_matrix(r, r, rng);
    } else if (idx == 1) {
      // Spectral start: rank-1 elements along the eigenbasis.
      for (int i = 0; i < k; ++i) {
        p0.blocks[i] = Matrix::Zero(1, r);
        p0.blocks[i](0, i % r) = 1.0;
      }
    } else if (idx % 2 == 1) {
      for (int i = 0; i < k; ++i) p0.blocks[i] = random_gaussian_matrix(1, r, rng);
    } else {
      for (int i = 0; i < k; ++i) p0.blocks[i] = random_gaussian_matrix(r, r, rng);
    }
    return detail::local_search(p0, objective(p0), perturb, objective, cfg.max_iters,
                                cfg.tol, rng);
  };

  auto best = detail::multistart<detail::PovmParam>(cfg.restarts, run);
  if (f_at_rho <= best.value) {
    return {f_at_rho, Ensemble::single(rho), best.iterations, best.converged};
  }
  Ensemble witness = mixed_decomposition(rho, {detail::povm_from_blocks(best.param.blocks)});
  double value = 0;
  for (const auto& a : witness.atoms()) value += a.weight * f(a.as_density());
  return {value, std::move(witness), best.iterations, best.converged};
}

struct ConjugateResult {
  double value;
  DensityMatrix maximizer;
  bool converged;
};

/// f*(A) = sup_rho [Tr A rho - f(rho)], estimated by multistart ascent. For
/// concave f the supremum sits on pure states and the search runs on the
/// sphere; otherwise the full state space is searched through a square-root
/// parameterization. Always a lower bound on the true conjugate.
inline ConjugateResult fenchel_conjugate(const StateFunction& f, const DualOperator& dual,
                                         const OptimizerConfig& cfg) {
  const int d = static_cast<int>(dual.A.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> ades(dual.A);

  double best_value;
  DensityMatrix best_state = DensityMatrix::trusted(Matrix::Identity(d, d) / d);
  bool converged = true;

  auto neg_gain_pure = [&](const Vector& v) {
    const DensityMatrix rho = DensityMatrix::trusted(v * v.adjoint());
    return -((v.adjoint() * dual.A * v)(0, 0).real() - f(rho));
  };

  if (f.concave) {
    auto perturb = [&](const Vector& v, double sigma, Rng& rng) {
      Vector w = v + sigma * random_gaussian_vector(d, rng);
      return Vector(w / w.norm());
    };
    auto run = [&](int idx) {
      Rng rng(cfg.seed + static_cast<std::uint64_t>(idx));
      Vector v0;
      if (idx < d)
        v0 = ades.eigenvectors().col(d - 1 - idx);
      else if (idx == d && f.special_pure_point)
        v0 = *f.special_pure_point;
      else {
        v0 = random_gaussian_vector(d, rng);
        v0 /= v0.norm();
      }
      return detail::local_search(v0, neg_gain_pure(v0), perturb, neg_gain_pure,
                                  cfg.max_iters, cfg.tol, rng);
    };
    auto best = detail::multistart<Vector>(std::max(cfg.restarts, d + 1), run);
    best_value = -best.value;
    best_state = DensityMatrix::trusted(best.param * best.param.adjoint());
    converged = best.converged;
  } else {
    auto neg_gain = [&](const Matrix& w) {
      Matrix m = w * w.adjoint();
      const double tr = m.trace().real();
      const DensityMatrix rho = DensityMatrix::trusted(m / tr);
      return -((dual.A * rho.matrix()).trace().real() - f(rho));
    };
    auto perturb = [&](const Matrix& w, double sigma, Rng& rng) {
      return Matrix(w + sigma * random_gaussian_matrix(d, d, rng));
    };
    auto run = [&](int idx) {
      Rng rng(cfg.seed + static_cast<std::uint64_t>(idx));
      Matrix w0;
      if (idx == 0)
        w0 = Matrix::Identity(d, d);
      else if (idx == 1) {
        w0 = 1e-3 * Matrix::Identity(d, d);
        w0.col(0) += ades.eigenvectors().col(d - 1);
      } else
        w0 = random_gaussian_matrix(d, d, rng);
      return detail::local_search(w0, neg_gain(w0), perturb, neg_gain, cfg.max_iters,
                                  cfg.tol, rng);
    };
    auto best = detail::multistart<Matrix>(cfg.restarts, run);
    Matrix m = best.param * best.param.adjoint();
    best_value = -best.value;
    best_state = DensityMatrix::trusted(m / m.trace().real());
    converged = best.converged;
    // Discontinuous functionals can hide a better pure point; probe it.
    if (f.special_pure_point) {
      const double v = -neg_gain_pure(*f.special_pure_point);
      if (v > best_value) {
        best_value = v;
        best_state = DensityMatrix::trusted(*f.special_pure_point *
                                            f.special_pure_point->adjoint());
      }
    }
  }
  return {best_value, best_state, converged};
}

struct BiconjugateResult {
  double value;
  Matrix best_dual;
  double hull_value;  // sandwich partner computed alongside
  bool converged;
};

inline double default_norm_cap(const StateFunction& f, int dim) {
  const double scale =
      std::max(1.0, std::abs(f(DensityMatrix::trusted(Matrix::Identity(dim, dim) / dim))));
  return 64.0 * scale;
}

/// Double Fenchel transform sup_A [Tr A rho - f*(A)] over 0 <= A <= cap*I.
/// The outer problem is concave in A; each evaluation calls the inner
/// conjugate estimator. A sandwich check against convex_hull flags optimizer
/// failure (the closure can never exceed the hull).
inline BiconjugateResult fenchel_biconjugate(const StateFunction& f,
                                             const DensityMatrix& rho,
                                             const OptimizerConfig& cfg,
                                             double norm_cap = 0,
                                             double sandwich_tol = 2e-3) {
  const int d = rho.dim();
  if (norm_cap <= 0) norm_cap = default_norm_cap(f, d);

  OptimizerConfig inner = cfg;
  inner.restarts = std::max(4, cfg.restarts / 8);
  inner.max_iters = std::max(200, cfg.max_iters / 4);

  auto clamp_psd = [&](const Matrix& x) {
    Matrix h = 0.5 * (x + x.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    RealVector ev = es.eigenvalues();
    for (int i = 0; i < ev.size(); ++i) ev(i) = std::clamp(ev(i), 0.0, norm_cap);
    return Matrix(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint());
  };

  auto neg_gain = [&](const Matrix& a) {
    const DualOperator dual(a, norm_cap);
    OptimizerConfig ic = inner;
    ic.seed = cfg.seed ^ 0x9e3779b97f4a7c15ull;
    const ConjugateResult conj = fenchel_conjugate(f, dual, ic);
    return -((a * rho.matrix()).trace().real() - conj.value);
  };
  auto perturb = [&](const Matrix& a, double sigma, Rng& rng) {
    Matrix g = random_gaussian_matrix(d, d, rng);
    return clamp_psd(a + sigma * 0.5 * (g + g.adjoint()));
  };

  const int outer_restarts = std::max(3, cfg.restarts / 8);
  auto run = [&](int idx) {
    Rng rng(cfg.seed + 1000 + static_cast<std::uint64_t>(idx));
    Matrix a0;
    if (idx == 0)
      a0 = Matrix::Zero(d, d);
    else if (idx == 1)
      a0 = 0.5 * Matrix::Identity(d, d);
    else {
      Matrix g = random_gaussian_matrix(d, d, rng);
      a0 = clamp_psd(0.5 * (g + g.adjoint()));
    }
    return detail::local_search(a0, neg_gain(a0), perturb, neg_gain, cfg.max_iters,
                                cfg.tol, rng, 1.0);
  };
  auto best = detail::multistart<Matrix>(outer_restarts, run);

  const HullResult hull = convex_hull(f, rho, cfg);
  const double value = -best.value;
  if (value > hull.value + sandwich_tol)
    throw DomainError("biconjugate estimate " + std::to_string(value) +
                      " exceeds hull " + std::to_string(hull.value) +
                      " beyond the sandwich tolerance (optimizer failure)");
  return {value, best.param, hull.value, best.converged};
}

struct JensenReport {
  double lhs;  // f at the barycenter
  double rhs;  // ensemble average of f
  bool satisfied;
};

enum class JensenDirection { convex, concave };

inline JensenReport jensen_check(const StateFunction& f, const Ensemble& e,
                                 JensenDirection direction, double tolerance = 1e-9) {
  const double lhs = f(barycenter(e));
  double rhs = 0;
  for (const auto& a : e.atoms()) rhs += a.weight * f(a.as_density());
  const bool ok = direction == JensenDirection::convex ? lhs <= rhs + tolerance
                                                       : lhs >= rhs - tolerance;
  return {lhs, rhs, ok};
}

struct ConvergenceRow {
  int family_index;
  int state_id;
  double value;
  double deficit;  // c_0 - c_n
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  bool values_monotone;  // c_n non-decreasing in n per state, up to 2*tol
};

/// Closure estimates c_n for an increasing family f_n -> f_0 on the given
/// states (Dini-style convergence probe). Family monotonicity is spot-checked
/// on the probe states themselves.
inline ConvergenceTable monotone_limit_probe(const std::vector<StateFunction>& family,
                                             const StateFunction& limit,
                                             const std::vector<DensityMatrix>& states,
                                             const OptimizerConfig& cfg,
                                             double monotone_tol = 2e-3) {
  for (const auto& rho : states) {
    double prev = family.front()(rho);
    for (std::size_t n = 1; n < family.size(); ++n) {
      const double cur = family[n](rho);
      if (cur < prev - 1e-9)
        throw DomainError("family is not pointwise increasing on a probe state");
      prev = cur;
    }
    if (limit(rho) < prev - 1e-9)
      throw DomainError("family exceeds its declared limit on a probe state");
  }

  ConvergenceTable table;
  table.values_monotone = true;
  for (std::size_t sid = 0; sid < states.size(); ++sid) {
    OptimizerConfig c = cfg;
    c.seed = cfg.seed + 7919 * sid;
    const double c0 = convex_hull(limit, states[sid], c).value;
    double prev = -1e300;
    for (std::size_t n = 0; n < family.size(); ++n) {
      const double cn = convex_hull(family[n], states[sid], c).value;
      table.rows.push_back({static_cast<int>(n), static_cast<int>(sid), cn, c0 - cn});
      if (cn < prev - monotone_tol) table.values_monotone = false;
      prev = std::max(prev, cn);
    }
  }
  return table;
}

struct GrowthRow {
  double c;
  double sup_estimate;
  double ratio;
};

/// Multistart maximization of f over {Tr H rho <= c}; infeasible iterates are
/// pulled back onto the boundary by mixing toward the ground state. Estimates
/// are lower bounds on the true suprema; diagnostic only.
inline std::vector<GrowthRow> growth_ratio_estimate(const StateFunction& f,
                                                    const ConstraintOperator& hop,
                                                    const std::vector<double>& c_grid,
                                                    const OptimizerConfig& cfg) {
  const int d = hop.dim();
  for (std::size_t i = 1; i < c_grid.size(); ++i)
    if (c_grid[i] <= c_grid[i - 1]) throw DomainError("c grid must be increasing");
  if (!c_grid.empty() && c_grid.front() < hop.min_eigenvalue())
    throw ConstraintError("infeasible energy level in grid");

  std::vector<GrowthRow> rows;
  for (std::size_t gi = 0; gi < c_grid.size(); ++gi) {
    const double c = c_grid[gi];
    auto project = [&](const Matrix& w) {
      Matrix m = w * w.adjoint();
      m /= m.trace().real();
      const double e = (hop.matrix() * m).trace().real();
      if (e > c) {
        const double e0 = hop.min_eigenvalue();
        const double t = (c - e0) / (e - e0);
        const Vector& g = hop.ground_state();
        m = t * m + (1.0 - t) * (g * g.adjoint());
      }
      return DensityMatrix::trusted(std::move(m));
    };
    auto neg = [&](const Matrix& w) { return -f(project(w)); };
    auto perturb = [&](const Matrix& w, double sigma, Rng& rng) {
      return Matrix(w + sigma * random_gaussian_matrix(d, d, rng));
    };
    auto run = [&](int idx) {
      Rng rng(cfg.seed + 31 * gi + static_cast<std::uint64_t>(idx));
      Matrix w0 = idx == 0 ? Matrix::Identity(d, d) : random_gaussian_matrix(d, d, rng);
      return detail::local_search(w0, neg(w0), perturb, neg, cfg.max_iters, cfg.tol, rng);
    };
    auto best = detail::multistart<Matrix>(cfg.restarts, run);
    rows.push_back({c, -best.value, -best.value / c});
  }
  return rows;
}

}  // namespace qroof
