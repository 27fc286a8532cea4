#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qroof/io.hpp"
#include "qroof/random.hpp"

using namespace qroof;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("state JSON round trip") {
  const DensityMatrix rho = sample_induced_mixed(4, 3, 1);
  const json j = state_to_json(rho, BipartiteShape(2, 2));
  const LoadedState back = parse_state(j);
  CHECK(trace_distance(back.state, rho) < 1e-12);
  REQUIRE(back.shape.has_value());
  CHECK(back.shape->dim_A == 2);
  CHECK(back.shape->dim_B == 2);
  CHECK_FALSE(back.pure.has_value());
}

TEST_CASE("vector-form states load as pure states") {
  const PureStateVector psi = sample_haar_pure(3, 2);
  json j;
  j["dims"] = {3};
  json v = json::array();
  for (int i = 0; i < 3; ++i) v.push_back({psi[i].real(), psi[i].imag()});
  j["vector"] = v;
  const LoadedState s = parse_state(j);
  REQUIRE(s.pure.has_value());
  CHECK((s.pure->amplitudes() - psi.amplitudes()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(trace_distance(s.state, DensityMatrix(psi)) < 1e-12);
}

TEST_CASE("readers reject malformed input") {
  json j;
  j["dims"] = {2};
  j["matrix"] = {{{1.0, 0.0}, {0.5, 0.0}}, {{0.0, 0.0}, {0.0, 0.0}}};
  CHECK_THROWS_AS(parse_state(j), DomainError);  // not Hermitian / trace 1

  json missing;
  missing["matrix"] = json::array();
  CHECK_THROWS_AS(parse_state(missing), DomainError);

  json baddims;
  baddims["dims"] = {2, 2};
  baddims["matrix"] = {{{1.0, 0.0}}};
  CHECK_THROWS_AS(parse_state(baddims), ShapeError);

  json unnorm;
  unnorm["dims"] = {2};
  unnorm["vector"] = {{1.0, 0.0}, {1.0, 0.0}};
  CHECK_THROWS_AS(parse_state(unnorm), DomainError);
}

TEST_CASE("ensemble JSON round trip") {
  const SeparableSample s = sample_separable_mixture({2, 2}, 3, 3);
  const json j = ensemble_to_json(s.generating_ensemble);
  const Ensemble back = ensemble_from_json(j);
  CHECK(back.size() == s.generating_ensemble.size());
  CHECK(trace_distance(barycenter(back), s.state) < 1e-8);
  for (const auto& a : back.atoms()) CHECK(a.is_pure());
}

TEST_CASE("channel and instrument JSON round trip") {
  Rng rng(4);
  PureDecompositionParam iso = random_isometry(4, 2, rng);
  const QuantumChannel phi({iso.V.block(0, 0, 2, 2), iso.V.block(2, 0, 2, 2)});
  const Instrument inst({{phi.kraus()[0]}, {phi.kraus()[1]}});
  const json ij = instrument_to_json(inst);
  const Instrument back = instrument_from_json(ij);
  REQUIRE(back.n_outcomes() == 2);
  for (int o = 0; o < 2; ++o)
    CHECK((back.outcomes()[o][0] - inst.outcomes()[o][0]).cwiseAbs().maxCoeff() <
          1e-12);

  json chan;
  chan["kraus"] = {ij["outcomes"][0][0], ij["outcomes"][1][0]};
  const QuantumChannel cback = channel_from_json(chan);
  CHECK((cback.kraus()[0] - phi.kraus()[0]).cwiseAbs().maxCoeff() < 1e-12);

  json incomplete;
  incomplete["kraus"] = {ij["outcomes"][0][0]};
  CHECK_THROWS_AS(channel_from_json(incomplete), DomainError);
}

TEST_CASE("files round trip through disk") {
  const DensityMatrix rho = sample_induced_mixed(3, 2, 5);
  const auto path = temp_file("qroof_state_test.json");
  write_text(path.string(), state_to_json(rho).dump(2));
  const LoadedState s = load_state(path.string());
  CHECK(trace_distance(s.state, rho) < 1e-12);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_state(path.string()), DomainError);
}

TEST_CASE("hull result JSON carries the contract fields") {
  const DensityMatrix rho = sample_induced_mixed(2, 2, 6);
  const Ensemble witness = Ensemble::single(rho);
  const HullResult r{0.123456789123, witness, 42, true};
  const json j = hull_result_to_json(r);
  CHECK(j["value"].get<double>() == Catch::Approx(0.123456789).margin(1e-9));
  CHECK(j["converged"].get<bool>());
  CHECK(j["iterations"].get<int>() == 42);
  CHECK(j["witness"]["atoms"].size() == 1);
}

TEST_CASE("formatting uses nine significant digits") {
  CHECK(format_value(1.0) == "1");
  CHECK(format_value(0.5) == "0.5");
  CHECK(format_value(1.0 / 3.0) == "0.333333333");
  CHECK(format_value(123456789.123) == "123456789");
  CHECK(round9(1.0 / 3.0) == 0.333333333);
}

TEST_CASE("CSV writers emit the pinned headers") {
  ConvergenceTable t;
  t.rows.push_back({1, 0, 0.5, 0.25});
  t.values_monotone = true;
  const std::string csv = convergence_table_csv(t);
  CHECK(csv.rfind("n,state_id,value,deficit\n", 0) == 0);
  CHECK(csv.find("1,0,0.5,0.25") != std::string::npos);

  const std::string sweep = sweep_csv({{1.5, 0.75, true, 0.0}});
  CHECK(sweep.rfind("param,value,converged,gap\n", 0) == 0);
  CHECK(sweep.find("1.5,0.75,1,0") != std::string::npos);
}
