#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "qroof/types.hpp"

namespace qroof {

/// Completely positive trace-preserving map in Kraus form.
class QuantumChannel {
 public:
  explicit QuantumChannel(std::vector<Matrix> kraus) : kraus_(std::move(kraus)) {
    if (kraus_.empty()) throw DomainError("channel needs at least one Kraus operator");
    const auto rows = kraus_.front().rows();
    const auto cols = kraus_.front().cols();
    Matrix sum = Matrix::Zero(cols, cols);
    for (const auto& k : kraus_) {
      if (k.rows() != rows || k.cols() != cols)
        throw ShapeError("Kraus operators of mixed shape");
      sum += k.adjoint() * k;
    }
    if ((sum - Matrix::Identity(cols, cols)).cwiseAbs().maxCoeff() > 1e-9)
      throw DomainError("Kraus operators do not satisfy the completeness relation");
  }

  const std::vector<Matrix>& kraus() const { return kraus_; }
  int input_dim() const { return static_cast<int>(kraus_.front().cols()); }
  int output_dim() const { return static_cast<int>(kraus_.front().rows()); }

 private:
  std::vector<Matrix> kraus_;
};

inline DensityMatrix apply_channel(const QuantumChannel& phi, const DensityMatrix& rho) {
  if (rho.dim() != phi.input_dim()) throw ShapeError("apply_channel: dimension mismatch");
  Matrix out = Matrix::Zero(phi.output_dim(), phi.output_dim());
  for (const auto& k : phi.kraus()) out += k * rho.matrix() * k.adjoint();
  return DensityMatrix::trusted(std::move(out));
}

/// Instrument: a list of outcomes, each a set of Kraus operators; the union of
/// all outcome operators must satisfy the completeness relation.
class Instrument {
 public:
  explicit Instrument(std::vector<std::vector<Matrix>> outcomes)
      : outcomes_(std::move(outcomes)) {
    if (outcomes_.empty()) throw DomainError("instrument needs at least one outcome");
    std::vector<Matrix> all;
    for (const auto& o : outcomes_) {
      if (o.empty()) throw DomainError("instrument outcome with no Kraus operators");
      for (const auto& k : o) all.push_back(k);
    }
    QuantumChannel check(std::move(all));  // validates shapes + completeness
    in_ = check.input_dim();
    out_ = check.output_dim();
  }

  const std::vector<std::vector<Matrix>>& outcomes() const { return outcomes_; }
  int n_outcomes() const { return static_cast<int>(outcomes_.size()); }
  int input_dim() const { return in_; }
  int output_dim() const { return out_; }

 private:
  std::vector<std::vector<Matrix>> outcomes_;
  int in_, out_;
};

struct InstrumentOutcome {
  double probability;
  DensityMatrix state;
};

/// Outcome probabilities and post-measurement states; outcomes below the
/// probability floor are dropped and the rest renormalized to sum to 1.
inline std::vector<InstrumentOutcome> apply_instrument(const Instrument& inst,
                                                       const DensityMatrix& rho) {
  if (rho.dim() != inst.input_dim())
    throw ShapeError("apply_instrument: dimension mismatch");
  std::vector<InstrumentOutcome> result;
  double kept = 0;
  for (const auto& o : inst.outcomes()) {
    Matrix m = Matrix::Zero(inst.output_dim(), inst.output_dim());
    for (const auto& k : o) m += k * rho.matrix() * k.adjoint();
    const double p = m.trace().real();
    if (p < tol::prob_floor) continue;
    kept += p;
    result.push_back({p, DensityMatrix::trusted(m / p)});
  }
  if (result.empty()) throw DomainError("all instrument outcomes below probability floor");
  for (auto& r : result) r.probability /= kept;
  return result;
}

/// Tensors each Kraus operator with the identity on the untouched factor,
/// producing an operation local to the chosen side.
inline Instrument lift_local(const Instrument& inst, const BipartiteShape& shape,
                             Side side) {
  const int local = side == Side::keep_A ? shape.dim_A : shape.dim_B;
  if (inst.input_dim() != local || inst.output_dim() != local)
    throw ShapeError("lift_local: instrument does not act on the chosen factor");
  const Matrix idA = Matrix::Identity(shape.dim_A, shape.dim_A);
  const Matrix idB = Matrix::Identity(shape.dim_B, shape.dim_B);
  std::vector<std::vector<Matrix>> lifted;
  for (const auto& o : inst.outcomes()) {
    std::vector<Matrix> ops;
    for (const auto& k : o)
      ops.push_back(side == Side::keep_A ? kron(k, idB) : kron(idA, k));
    lifted.push_back(std::move(ops));
  }
  return Instrument(std::move(lifted));
}

namespace detail {

// An operator on A x B is a tensor product X (x) Y iff the reshuffled matrix
// R[(i,i'),(j,j')] = K[(i,j),(i',j')] has rank 1.
inline bool is_product_operator(const Matrix& k, const BipartiteShape& shape,
                                double tolerance = 1e-7) {
  const int dA = shape.dim_A, dB = shape.dim_B;
  if (k.rows() != shape.composite_dim() || k.cols() != shape.composite_dim())
    return false;
  Matrix r(dA * dA, dB * dB);
  for (int i = 0; i < dA; ++i)
    for (int ip = 0; ip < dA; ++ip)
      for (int j = 0; j < dB; ++j)
        for (int jp = 0; jp < dB; ++jp)
          r(i * dA + ip, j * dB + jp) = k(i * dB + j, ip * dB + jp);
  const RealVector s = r.jacobiSvd().singularValues();
  if (s.size() < 2) return true;
  return s(1) <= tolerance * std::max(1.0, s(0));
}

}  // namespace detail

/// Checks that every Kraus operator of every outcome acts as X (x) Y on the
/// given bipartition.
inline bool is_local_instrument(const Instrument& inst, const BipartiteShape& shape) {
  if (inst.input_dim() != shape.composite_dim() ||
      inst.output_dim() != shape.composite_dim())
    return false;
  for (const auto& o : inst.outcomes())
    for (const auto& k : o)
      if (!detail::is_product_operator(k, shape)) return false;
  return true;
}

/// Measurement that keeps the lowest n levels of the A factor coherently
/// (outcome 0) and resolves the remaining levels one by one, grouping levels
/// past `k_max` extra outcomes into the last one so the relation stays exact.
inline Instrument truncation_instrument(int n, const BipartiteShape& shape,
                                        int k_max = -1) {
  const int dA = shape.dim_A;
  if (n < 1 || n > dA) throw DomainError("truncation level out of range");
  const Matrix idB = Matrix::Identity(shape.dim_B, shape.dim_B);
  const int tail = dA - n;
  if (k_max < 0 || k_max > tail) k_max = tail;

  std::vector<std::vector<Matrix>> outcomes;
  Matrix p = Matrix::Zero(dA, dA);
  for (int i = 0; i < n; ++i) p(i, i) = 1.0;
  outcomes.push_back({kron(p, idB)});
  for (int k = 0; k < k_max; ++k) {
    std::vector<Matrix> ops;
    if (k == k_max - 1) {
      for (int level = n + k; level < dA; ++level) {
        Matrix q = Matrix::Zero(dA, dA);
        q(level, level) = 1.0;
        ops.push_back(kron(q, idB));
      }
    } else {
      Matrix q = Matrix::Zero(dA, dA);
      q(n + k, n + k) = 1.0;
      ops.push_back(kron(q, idB));
    }
    if (!ops.empty()) outcomes.push_back(std::move(ops));
  }
  return Instrument(std::move(outcomes));
}

}  // namespace qroof
