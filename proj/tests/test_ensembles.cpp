#include <catch2/catch_amalgamated.hpp>

#include "qroof/ensemble.hpp"
#include "qroof/random.hpp"

using namespace qroof;

TEST_CASE("ensemble validation") {
  const DensityMatrix rho = sample_induced_mixed(2, 2, 1);
  CHECK_THROWS_AS(Ensemble({}), DomainError);
  CHECK_THROWS_AS(Ensemble({{0.5, rho}, {0.4, rho}}), DomainError);  // sums to 0.9
  CHECK_THROWS_AS(Ensemble({{-0.5, rho}, {1.5, rho}}), DomainError);
  REQUIRE_NOTHROW(Ensemble({{0.5, rho}, {0.5, rho}}));
}

TEST_CASE("barycenter basics") {
  const DensityMatrix rho = sample_induced_mixed(3, 3, 2);
  CHECK(trace_distance(barycenter(Ensemble::single(rho)), rho) < 1e-14);

  Vector e0 = Vector::Zero(2), e1 = Vector::Zero(2);
  e0(0) = 1.0;
  e1(1) = 1.0;
  const Ensemble mix({{0.5, PureStateVector(e0)}, {0.5, PureStateVector(e1)}});
  CHECK((barycenter(mix).matrix() - Matrix::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff() <
        1e-14);
}

TEST_CASE("pure decomposition with identity parameter is the eigendecomposition") {
  const DensityMatrix rho = sample_induced_mixed(3, 3, 3);
  const Support s = support_of(rho);
  PureDecompositionParam p;
  p.V = Matrix::Identity(s.rank(), s.rank());
  const Ensemble e = pure_decomposition(rho, p);
  REQUIRE(e.size() == static_cast<std::size_t>(s.rank()));
  std::vector<double> w;
  for (const auto& a : e.atoms()) w.push_back(a.weight);
  std::sort(w.begin(), w.end(), std::greater<>());
  for (int i = 0; i < s.rank(); ++i) CHECK(std::abs(w[i] - s.eigenvalues(i)) < 1e-10);
}

TEST_CASE("hadamard isometry on the maximally mixed qubit gives the +/- ensemble") {
  const DensityMatrix rho = DensityMatrix::trusted(Matrix::Identity(2, 2) / 2.0);
  PureDecompositionParam p;
  p.V.resize(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  p.V << s, s, s, -s;
  const Ensemble e = pure_decomposition(rho, p);
  REQUIRE(e.size() == 2);
  for (const auto& a : e.atoms()) {
    CHECK(a.weight == Catch::Approx(0.5).margin(1e-12));
    const Vector v = std::get<PureStateVector>(a.state).amplitudes();
    CHECK(std::abs(std::abs(v(0)) - s) < 1e-10);
    CHECK(std::abs(std::abs(v(1)) - s) < 1e-10);
  }
}

TEST_CASE("pure decomposition preserves the barycenter") {
  for (int t = 0; t < 200; ++t) {
    Rng rng(700 + t);
    const DensityMatrix rho = sample_induced_mixed(4, 1 + t % 4, 800 + t);
    const int r = support_of(rho).rank();
    const int m = r + t % 5;
    const Ensemble e = pure_decomposition(rho, random_isometry(m, r, rng));
    CHECK(trace_distance(barycenter(e), rho) < 1e-10);
  }
}

TEST_CASE("pure decomposition rejects bad parameters") {
  const DensityMatrix rho = sample_induced_mixed(3, 3, 4);
  PureDecompositionParam bad;
  bad.V = Matrix::Ones(3, 3);
  CHECK_THROWS_AS(pure_decomposition(rho, bad), DomainError);
  PureDecompositionParam wrong;
  wrong.V = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(pure_decomposition(rho, wrong), ShapeError);
}

TEST_CASE("mixed decomposition with trivial and spectral POVMs") {
  const DensityMatrix rho = sample_induced_mixed(3, 3, 5);
  const int r = support_of(rho).rank();

  MixedDecompositionParam trivial;
  trivial.povm = {Matrix::Identity(r, r)};
  const Ensemble single = mixed_decomposition(rho, trivial);
  REQUIRE(single.size() == 1);
  CHECK(trace_distance(single.atoms()[0].as_density(), rho) < 1e-10);

  MixedDecompositionParam spectral;
  for (int i = 0; i < r; ++i) {
    Matrix proj = Matrix::Zero(r, r);
    proj(i, i) = 1.0;
    spectral.povm.push_back(proj);
  }
  const Ensemble eigen = mixed_decomposition(rho, spectral);
  CHECK(eigen.size() == static_cast<std::size_t>(r));
  CHECK(trace_distance(barycenter(eigen), rho) < 1e-10);
}

TEST_CASE("random POVM decompositions: PSD atoms, exact barycenter") {
  for (int t = 0; t < 100; ++t) {
    Rng rng(900 + t);
    const DensityMatrix rho = sample_induced_mixed(4, 2 + t % 3, 1000 + t);
    const int r = support_of(rho).rank();
    const int k = 3;
    std::vector<Matrix> blocks(k);
    for (auto& b : blocks) b = random_gaussian_matrix(r, r, rng);
    Matrix total = Matrix::Zero(r, r);
    for (const auto& b : blocks) total += b.adjoint() * b;
    Eigen::SelfAdjointEigenSolver<Matrix> es(total);
    const Matrix tinv = es.eigenvectors() *
                        es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                        es.eigenvectors().adjoint();
    MixedDecompositionParam p;
    for (const auto& b : blocks) {
      const Matrix bt = b * tinv;
      p.povm.push_back(bt.adjoint() * bt);
    }
    const Ensemble e = mixed_decomposition(rho, p);
    CHECK(trace_distance(barycenter(e), rho) < 1e-10);
    for (const auto& a : e.atoms())
      CHECK(a.as_density().eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("mixed decomposition rejects incomplete POVMs") {
  const DensityMatrix rho = sample_induced_mixed(3, 3, 6);
  const int r = support_of(rho).rank();
  MixedDecompositionParam p;
  p.povm = {0.5 * Matrix::Identity(r, r)};
  CHECK_THROWS_AS(mixed_decomposition(rho, p), DomainError);
}

TEST_CASE("coarse graining limits") {
  std::vector<EnsembleAtom> atoms;
  for (int i = 0; i < 8; ++i) atoms.push_back({0.125, sample_induced_mixed(3, 2, 40 + i)});
  const Ensemble e(std::move(atoms));

  const Ensemble whole = coarse_grain(e, 2.5);
  REQUIRE(whole.size() == 1);
  CHECK(trace_distance(whole.atoms()[0].as_density(), barycenter(e)) < 1e-12);

  const Ensemble fine = coarse_grain(e, 1e-9);
  CHECK(fine.size() == e.size());

  const Ensemble mid = coarse_grain(e, 0.5);
  CHECK(mid.size() <= e.size());
  CHECK(trace_distance(barycenter(mid), barycenter(e)) < 1e-12);
}

TEST_CASE("coarse graining with a splitter preserves side weights") {
  const ConstraintOperator hop = ConstraintOperator::number(4);
  for (int t = 0; t < 30; ++t) {
    const Ensemble e = sample_random_ensemble(4, 20, 1200 + t);
    const SplitConstraint split{hop, 1.0};
    const Ensemble g = coarse_grain(e, 0.8, split);
    auto low_weight = [&](const Ensemble& x) {
      double w = 0;
      for (const auto& a : x.atoms())
        if (mean_energy(a.as_density(), hop) <= 1.0 + 1e-12) w += a.weight;
      return w;
    };
    CHECK(std::abs(low_weight(g) - low_weight(e)) < 1e-12);
    CHECK(trace_distance(barycenter(g), barycenter(e)) < 1e-12);
    CHECK(g.size() <= e.size());
  }
}
