#pragma once

#include <cstdint>
#include <random>

#include "qroof/ensemble.hpp"
#include "qroof/types.hpp"

namespace qroof {

using Rng = std::mt19937_64;

inline Vector random_gaussian_vector(int d, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = cxd(g(rng), g(rng));
  return v;
}

inline Matrix random_gaussian_matrix(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = cxd(g(rng), g(rng));
  return m;
}

inline PureStateVector sample_haar_pure(int dim, std::uint64_t seed) {
  Rng rng(seed);
  Vector v = random_gaussian_vector(dim, rng);
  return PureStateVector(v / v.norm());
}

inline Matrix random_unitary(int dim, Rng& rng) {
  Matrix g = random_gaussian_matrix(dim, dim, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i) {
    cxd d = r(i, i);
    q.col(i) *= d / std::abs(d);
  }
  return q;
}

inline DensityMatrix sample_induced_mixed(int dim, int rank, std::uint64_t seed) {
  if (rank < 1 || rank > dim) throw DomainError("invalid rank for induced sampling");
  Rng rng(seed);
  Matrix w = random_gaussian_matrix(dim, rank, rng);
  Matrix m = w * w.adjoint();
  return DensityMatrix::trusted(m / m.trace().real());
}

struct SeparableSample {
  DensityMatrix state;
  Ensemble generating_ensemble;  // product pure atoms whose barycenter is `state`
};

inline SeparableSample sample_separable_mixture(const BipartiteShape& shape, int k_terms,
                                                std::uint64_t seed) {
  if (k_terms < 1) throw DomainError("need at least one term");
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> w(k_terms);
  double total = 0;
  for (auto& x : w) {
    x = u(rng);
    total += x;
  }
  std::vector<EnsembleAtom> atoms;
  for (int t = 0; t < k_terms; ++t) {
    Vector a = random_gaussian_vector(shape.dim_A, rng);
    Vector b = random_gaussian_vector(shape.dim_B, rng);
    a /= a.norm();
    b /= b.norm();
    Vector prod(shape.composite_dim());
    for (int i = 0; i < shape.dim_A; ++i)
      for (int j = 0; j < shape.dim_B; ++j) prod(i * shape.dim_B + j) = a(i) * b(j);
    atoms.push_back({w[t] / total, PureStateVector(prod)});
  }
  Ensemble e(std::move(atoms));
  return {barycenter(e), e};
}

// Rejection with a projection fallback: mix toward the ground state of H until
// the mean-energy bound holds.
inline DensityMatrix sample_energy_constrained(int dim, const ConstraintOperator& hop,
                                               double h, std::uint64_t seed) {
  if (hop.dim() != dim) throw ShapeError("constraint dimension mismatch");
  if (h < hop.min_eigenvalue())
    throw ConstraintError("energy bound below the ground level of H");
  Rng rng(seed);
  DensityMatrix rho = sample_induced_mixed(dim, dim, seed + 1);
  const double e = mean_energy(rho, hop);
  if (e <= h) return rho;
  const Vector& g = hop.ground_state();
  const double e0 = hop.min_eigenvalue();
  // t rho + (1-t) |g><g| has energy t*e + (1-t)*e0 = h at:
  const double t = (h - e0) / (e - e0);
  Matrix m = t * rho.matrix() + (1.0 - t) * (g * g.adjoint());
  return DensityMatrix::trusted(std::move(m));
}

inline Ensemble sample_random_ensemble(int dim, int n_atoms, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<EnsembleAtom> atoms;
  double total = 0;
  std::vector<double> w(n_atoms);
  for (auto& x : w) {
    x = u(rng);
    total += x;
  }
  for (int i = 0; i < n_atoms; ++i) {
    std::uniform_int_distribution<int> rk(1, dim);
    atoms.push_back({w[i] / total, sample_induced_mixed(dim, rk(rng), rng())});
  }
  return Ensemble(std::move(atoms));
}

inline PureDecompositionParam random_isometry(int m, int r, Rng& rng) {
  Matrix g = random_gaussian_matrix(m, r, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  PureDecompositionParam p;
  p.V = qr.householderQ() * Matrix::Identity(m, r);
  return p;
}

}  // namespace qroof
