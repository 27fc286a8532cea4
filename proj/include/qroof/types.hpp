#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qroof {

using cxd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

namespace tol {
inline constexpr double herm = 1e-8;
inline constexpr double trace = 1e-8;
inline constexpr double psd = 1e-8;
inline constexpr double norm = 1e-8;
inline constexpr double eig_floor = 1e-12;
inline constexpr double rank = 1e-10;
inline constexpr double weight_floor = 1e-12;
inline constexpr double prob_floor = 1e-10;
inline constexpr double match = 1e-6;
}  // namespace tol

struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& m) : std::runtime_error(m) {}
};
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& m) : std::runtime_error(m) {}
};
struct ConstraintError : std::runtime_error {
  explicit ConstraintError(const std::string& m) : std::runtime_error(m) {}
};

inline double trace_norm(const Matrix& a) {
  return a.jacobiSvd().singularValues().sum();
}

// Trace norm for Hermitian arguments via eigenvalues.
inline double trace_norm_herm(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

class PureStateVector {
 public:
  explicit PureStateVector(Vector amplitudes) : amp_(std::move(amplitudes)) {
    if (amp_.size() == 0) throw DomainError("empty state vector");
    const double n = amp_.norm();
    if (std::abs(n - 1.0) > 1e-6)
      throw DomainError("state vector not normalized: norm=" + std::to_string(n));
    amp_ /= n;
  }

  int dim() const { return static_cast<int>(amp_.size()); }
  const Vector& amplitudes() const { return amp_; }
  cxd operator[](int i) const { return amp_(i); }

 private:
  Vector amp_;
};

class DensityMatrix {
 public:
  explicit DensityMatrix(const Matrix& entries) {
    if (entries.rows() != entries.cols() || entries.rows() == 0)
      throw ShapeError("density matrix must be square and non-empty");
    const double herm_dev = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
    if (herm_dev > tol::herm)
      throw DomainError("matrix not Hermitian: deviation=" + std::to_string(herm_dev));
    m_ = 0.5 * (entries + entries.adjoint());
    const double tr = m_.trace().real();
    if (std::abs(tr - 1.0) > 1e-6)
      throw DomainError("trace != 1: " + std::to_string(tr));
    m_ /= tr;
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol::psd)
      throw DomainError("matrix not positive semidefinite");
  }

  explicit DensityMatrix(const PureStateVector& psi)
      : m_(psi.amplitudes() * psi.amplitudes().adjoint()) {}

  // Fast path for matrices produced by operations that preserve validity.
  static DensityMatrix trusted(Matrix m) {
    DensityMatrix d;
    d.m_ = std::move(m);
    return d;
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }

  RealVector eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }

  int rank(double threshold = tol::rank) const {
    const RealVector ev = eigenvalues();
    int r = 0;
    for (int i = 0; i < ev.size(); ++i)
      if (ev(i) > threshold) ++r;
    return r;
  }

 private:
  DensityMatrix() = default;
  Matrix m_;
};

inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return trace_norm_herm(a.matrix() - b.matrix());
}

struct BipartiteShape {
  int dim_A;
  int dim_B;

  BipartiteShape(int a, int b) : dim_A(a), dim_B(b) {
    if (a < 1 || b < 1) throw ShapeError("factor dimensions must be positive");
  }
  int composite_dim() const { return dim_A * dim_B; }
  void check(const DensityMatrix& w) const {
    if (w.dim() != composite_dim())
      throw ShapeError("state dimension " + std::to_string(w.dim()) +
                       " != " + std::to_string(dim_A) + "x" + std::to_string(dim_B));
  }
};

enum class Side { keep_A, keep_B };

// Composite basis |i>_A |j>_B <-> row i*dim_B + j.
inline DensityMatrix partial_trace(const DensityMatrix& w, const BipartiteShape& shape,
                                   Side side) {
  shape.check(w);
  const Matrix& m = w.matrix();
  const int dA = shape.dim_A, dB = shape.dim_B;
  if (side == Side::keep_A) {
    Matrix out = Matrix::Zero(dA, dA);
    for (int i = 0; i < dA; ++i)
      for (int k = 0; k < dA; ++k)
        for (int j = 0; j < dB; ++j) out(i, k) += m(i * dB + j, k * dB + j);
    return DensityMatrix::trusted(std::move(out));
  }
  Matrix out = Matrix::Zero(dB, dB);
  for (int j = 0; j < dB; ++j)
    for (int l = 0; l < dB; ++l)
      for (int i = 0; i < dA; ++i) out(j, l) += m(i * dB + j, i * dB + l);
  return DensityMatrix::trusted(std::move(out));
}

// Schmidt coefficients (squared singular values) of a bipartite pure state;
// these are the eigenvalues of either reduced state.
inline RealVector schmidt_squared(const Vector& psi, const BipartiteShape& shape) {
  if (psi.size() != shape.composite_dim())
    throw ShapeError("vector dimension mismatch for bipartite shape");
  Eigen::Map<const Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> M(
      psi.data(), shape.dim_A, shape.dim_B);
  Eigen::JacobiSVD<Matrix> svd(M);
  RealVector s = svd.singularValues();
  return s.cwiseProduct(s);
}

class ConstraintOperator {
 public:
  explicit ConstraintOperator(const Matrix& h) {
    if (h.rows() != h.cols() || h.rows() == 0)
      throw ShapeError("constraint operator must be square");
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > tol::herm)
      throw DomainError("constraint operator not Hermitian");
    m_ = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_);
    if (es.eigenvalues().minCoeff() < -tol::psd)
      throw DomainError("constraint operator must be positive semidefinite");
    min_eig_ = std::max(0.0, es.eigenvalues().minCoeff());
    ground_ = es.eigenvectors().col(0);
  }

  static ConstraintOperator diagonal(const RealVector& diag) {
    Matrix m = Matrix::Zero(diag.size(), diag.size());
    for (int i = 0; i < diag.size(); ++i) m(i, i) = diag(i);
    return ConstraintOperator(m);
  }

  // Number operator diag(0..d-1).
  static ConstraintOperator number(int d) {
    RealVector v(d);
    for (int i = 0; i < d; ++i) v(i) = i;
    return ConstraintOperator::diagonal(v);
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  double min_eigenvalue() const { return min_eig_; }
  const Vector& ground_state() const { return ground_; }

 private:
  Matrix m_;
  double min_eig_;
  Vector ground_;
};

inline double mean_energy(const DensityMatrix& rho, const ConstraintOperator& hop) {
  if (rho.dim() != hop.dim()) throw ShapeError("mean_energy: dimension mismatch");
  return (hop.matrix() * rho.matrix()).trace().real();
}

// Reorders tensor factors of a multipartite state. dims are the factor
// dimensions in the current order, perm[k] gives the old index of the factor
// placed at new position k. Row-major composite indexing throughout.
inline DensityMatrix permute_systems(const DensityMatrix& w, const std::vector<int>& dims,
                                     const std::vector<int>& perm) {
  const int n = static_cast<int>(dims.size());
  int total = 1;
  for (int d : dims) total *= d;
  if (w.dim() != total) throw ShapeError("permute_systems: dimension mismatch");
  std::vector<int> strides(n, 1);
  for (int k = n - 2; k >= 0; --k) strides[k] = strides[k + 1] * dims[k + 1];
  std::vector<int> new_dims(n);
  for (int k = 0; k < n; ++k) new_dims[k] = dims[perm[k]];
  std::vector<int> new_strides(n, 1);
  for (int k = n - 2; k >= 0; --k) new_strides[k] = new_strides[k + 1] * new_dims[k + 1];

  auto map_index = [&](int idx) {
    std::vector<int> digits(n);
    for (int k = 0; k < n; ++k) {
      digits[k] = idx / strides[k];
      idx %= strides[k];
    }
    int out = 0;
    for (int k = 0; k < n; ++k) out += digits[perm[k]] * new_strides[k];
    return out;
  };

  Matrix out(total, total);
  std::vector<int> mapped(total);
  for (int i = 0; i < total; ++i) mapped[i] = map_index(i);
  const Matrix& m = w.matrix();
  for (int i = 0; i < total; ++i)
    for (int j = 0; j < total; ++j) out(mapped[i], mapped[j]) = m(i, j);
  return DensityMatrix::trusted(std::move(out));
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace qroof
