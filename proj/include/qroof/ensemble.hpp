#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "qroof/types.hpp"

namespace qroof {

struct EnsembleAtom {
  double weight;
  std::variant<DensityMatrix, PureStateVector> state;

  DensityMatrix as_density() const {
    if (std::holds_alternative<DensityMatrix>(state))
      return std::get<DensityMatrix>(state);
    return DensityMatrix(std::get<PureStateVector>(state));
  }
  bool is_pure() const { return std::holds_alternative<PureStateVector>(state); }
  int dim() const {
    if (std::holds_alternative<DensityMatrix>(state))
      return std::get<DensityMatrix>(state).dim();
    return std::get<PureStateVector>(state).dim();
  }
};

class Ensemble {
 public:
  explicit Ensemble(std::vector<EnsembleAtom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw DomainError("ensemble must be non-empty");
    double total = 0;
    const int d = atoms_.front().dim();
    for (const auto& a : atoms_) {
      if (a.weight <= 0) throw DomainError("ensemble weights must be positive");
      if (a.dim() != d) throw ShapeError("ensemble atoms of mixed dimension");
      total += a.weight;
    }
    if (std::abs(total - 1.0) > 1e-10)
      throw DomainError("ensemble weights must sum to 1");
  }

  static Ensemble single(const DensityMatrix& rho) {
    return Ensemble({EnsembleAtom{1.0, rho}});
  }
  static Ensemble single(const PureStateVector& psi) {
    return Ensemble({EnsembleAtom{1.0, psi}});
  }

  const std::vector<EnsembleAtom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  int dim() const { return atoms_.front().dim(); }

 private:
  std::vector<EnsembleAtom> atoms_;
};

inline DensityMatrix barycenter(const Ensemble& e) {
  const int d = e.dim();
  Matrix m = Matrix::Zero(d, d);
  for (const auto& a : e.atoms()) m += a.weight * a.as_density().matrix();
  return DensityMatrix::trusted(std::move(m));
}

// Support data of a state: eigenvalues above the rank threshold and the
// matching eigenvectors, descending order.
struct Support {
  RealVector eigenvalues;  // size r
  Matrix basis;            // d x r, columns orthonormal
  int rank() const { return static_cast<int>(eigenvalues.size()); }
};

inline Support support_of(const DensityMatrix& rho, double threshold = tol::rank) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
  const RealVector ev = es.eigenvalues();
  std::vector<int> keep;
  for (int i = static_cast<int>(ev.size()) - 1; i >= 0; --i)
    if (ev(i) > threshold) keep.push_back(i);
  Support s;
  s.eigenvalues.resize(static_cast<int>(keep.size()));
  s.basis.resize(rho.dim(), static_cast<int>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    s.eigenvalues(static_cast<int>(k)) = ev(keep[k]);
    s.basis.col(static_cast<int>(k)) = es.eigenvectors().col(keep[k]);
  }
  return s;
}

struct PureDecompositionParam {
  // m x r complex matrix with orthonormal columns.
  Matrix V;

  void check(int rank) const {
    if (V.cols() != rank) throw ShapeError("isometry column count != rank");
    if (V.rows() < rank) throw ShapeError("need m >= rank");
    const Matrix g = V.adjoint() * V - Matrix::Identity(rank, rank);
    if (g.cwiseAbs().maxCoeff() > 1e-8)
      throw DomainError("decomposition parameter is not an isometry");
  }
};

// All m-element pure decompositions of rho arise as psi_i = sum_j V_ij
// sqrt(lambda_j) |e_j>, with V running over isometries.
inline Ensemble pure_decomposition(const DensityMatrix& rho,
                                   const PureDecompositionParam& p) {
  const Support s = support_of(rho);
  p.check(s.rank());
  const Matrix B = s.basis * s.eigenvalues.cwiseSqrt().asDiagonal();  // d x r
  const Matrix Psi = B * p.V.transpose();                             // d x m
  std::vector<EnsembleAtom> atoms;
  double kept = 0;
  for (int i = 0; i < Psi.cols(); ++i) {
    const double w = Psi.col(i).squaredNorm();
    if (w < tol::weight_floor) continue;
    kept += w;
    atoms.push_back({w, PureStateVector(Psi.col(i) / std::sqrt(w))});
  }
  for (auto& a : atoms) a.weight /= kept;
  return Ensemble(std::move(atoms));
}

struct MixedDecompositionParam {
  // PSD matrices on the support of the target, summing to the support identity.
  std::vector<Matrix> povm;

  void check(int support_dim) const {
    if (povm.empty()) throw DomainError("empty POVM");
    Matrix sum = Matrix::Zero(support_dim, support_dim);
    for (const auto& m : povm) {
      if (m.rows() != support_dim || m.cols() != support_dim)
        throw ShapeError("POVM element dimension mismatch");
      Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -1e-9)
        throw DomainError("POVM element not PSD");
      sum += m;
    }
    if ((sum - Matrix::Identity(support_dim, support_dim)).cwiseAbs().maxCoeff() > 1e-8)
      throw DomainError("POVM does not sum to the support identity");
  }
};

// w_i = Tr sqrt(rho) M_i sqrt(rho), rho_i = sqrt(rho) M_i sqrt(rho) / w_i.
inline Ensemble mixed_decomposition(const DensityMatrix& rho,
                                    const MixedDecompositionParam& p) {
  const Support s = support_of(rho);
  p.check(s.rank());
  const Matrix sq = s.eigenvalues.cwiseSqrt().asDiagonal();  // r x r in support basis
  std::vector<EnsembleAtom> atoms;
  double kept = 0;
  for (const auto& M : p.povm) {
    Matrix sig = sq * M * sq;
    const double w = sig.trace().real();
    if (w < tol::weight_floor) continue;
    kept += w;
    Matrix full = s.basis * (sig / w) * s.basis.adjoint();
    atoms.push_back({w, DensityMatrix::trusted(std::move(full))});
  }
  for (auto& a : atoms) a.weight /= kept;
  return Ensemble(std::move(atoms));
}

struct SplitConstraint {
  ConstraintOperator hop;
  double threshold;
};

// Greedy clustering of atoms into trace-norm cells of the given diameter; each
// cell collapses to its weighted mean, so the barycenter is preserved exactly.
// With a splitter no cell mixes atoms from the two sides of {Tr H rho <= c}.
inline Ensemble coarse_grain(const Ensemble& e, double cell_diameter,
                             const std::optional<SplitConstraint>& splitter = std::nullopt) {
  if (cell_diameter <= 0) throw DomainError("cell diameter must be positive");
  struct Cluster {
    double weight;
    Matrix sum;                       // weighted sum of states
    std::vector<Matrix> members;      // representatives for the diameter test
    bool low_side;
  };
  std::vector<Cluster> clusters;
  for (const auto& a : e.atoms()) {
    const Matrix m = a.as_density().matrix();
    bool low = true;
    if (splitter)
      low = (splitter->hop.matrix() * m).trace().real() <= splitter->threshold;
    bool placed = false;
    for (auto& c : clusters) {
      if (splitter && c.low_side != low) continue;
      bool fits = true;
      for (const auto& other : c.members)
        if (trace_norm_herm(m - other) > cell_diameter) {
          fits = false;
          break;
        }
      if (!fits) continue;
      c.weight += a.weight;
      c.sum += a.weight * m;
      c.members.push_back(m);
      placed = true;
      break;
    }
    if (!placed) clusters.push_back({a.weight, a.weight * m, {m}, low});
  }
  std::vector<EnsembleAtom> atoms;
  for (auto& c : clusters)
    atoms.push_back({c.weight, DensityMatrix::trusted(c.sum / c.weight)});
  return Ensemble(std::move(atoms));
}

}  // namespace qroof
