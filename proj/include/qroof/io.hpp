#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qroof/channels.hpp"
#include "qroof/convexify.hpp"
#include "qroof/ensemble.hpp"

namespace qroof {

using json = nlohmann::json;

inline constexpr int schema_version = 1;

/// All floating output is printed with 9 significant digits.
inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline double round9(double v) { return std::stod(format_value(v)); }

namespace io_detail {

inline json complex_to_json(const cxd& z) { return json::array({z.real(), z.imag()}); }

inline cxd complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2)
    throw DomainError("complex entries must be [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw DomainError("matrix must be a non-empty array");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols) throw DomainError("ragged matrix rows");
    for (int c = 0; c < cols; ++c) m(i, c) = complex_from_json(j[i][c]);
  }
  return m;
}

inline json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open file: " + path);
  json j;
  in >> j;
  return j;
}

}  // namespace io_detail

struct LoadedState {
  DensityMatrix state;
  std::optional<BipartiteShape> shape;  // present when dims has two entries
  std::optional<PureStateVector> pure;  // present for vector-form input
};

/// Reads {"dims":[dA,dB] or [d], "matrix": ...} or {"dims":[d],"vector": ...};
/// vector input is promoted to its projector. Validation (hermiticity, trace,
/// positivity, normalization) happens in the type constructors.
inline LoadedState parse_state(const json& j) {
  if (!j.contains("dims")) throw DomainError("state JSON needs a dims field");
  std::vector<int> dims = j["dims"].get<std::vector<int>>();
  if (dims.empty() || dims.size() > 2) throw DomainError("dims must have 1 or 2 entries");
  int total = 1;
  for (int d : dims) total *= d;
  std::optional<BipartiteShape> shape;
  if (dims.size() == 2) shape.emplace(dims[0], dims[1]);

  if (j.contains("vector")) {
    const json& arr = j["vector"];
    Vector v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i)
      v(static_cast<int>(i)) = io_detail::complex_from_json(arr[i]);
    if (v.size() != total) throw ShapeError("vector length does not match dims");
    PureStateVector psi(v);
    return {DensityMatrix(psi), shape, psi};
  }
  if (!j.contains("matrix")) throw DomainError("state JSON needs matrix or vector");
  Matrix m = io_detail::matrix_from_json(j["matrix"]);
  if (m.rows() != total) throw ShapeError("matrix size does not match dims");
  return {DensityMatrix(m), shape, std::nullopt};
}

inline LoadedState load_state(const std::string& path) {
  return parse_state(io_detail::read_file(path));
}

inline json state_to_json(const DensityMatrix& rho,
                          const std::optional<BipartiteShape>& shape = std::nullopt) {
  json j;
  if (shape)
    j["dims"] = {shape->dim_A, shape->dim_B};
  else
    j["dims"] = {rho.dim()};
  j["matrix"] = io_detail::matrix_to_json(rho.matrix());
  return j;
}

inline json ensemble_to_json(const Ensemble& e) {
  json atoms = json::array();
  for (const auto& a : e.atoms()) {
    json entry;
    entry["weight"] = a.weight;  // full precision so the weight sum revalidates
    if (a.is_pure()) {
      const auto& psi = std::get<PureStateVector>(a.state);
      json st;
      st["dims"] = {psi.dim()};
      json v = json::array();
      for (int i = 0; i < psi.dim(); ++i) v.push_back(io_detail::complex_to_json(psi[i]));
      st["vector"] = std::move(v);
      entry["state"] = std::move(st);
    } else {
      entry["state"] = state_to_json(std::get<DensityMatrix>(a.state));
    }
    atoms.push_back(std::move(entry));
  }
  return json{{"atoms", std::move(atoms)}};
}

inline Ensemble ensemble_from_json(const json& j) {
  if (!j.contains("atoms")) throw DomainError("ensemble JSON needs an atoms field");
  std::vector<EnsembleAtom> atoms;
  for (const auto& entry : j["atoms"]) {
    const double w = entry.at("weight").get<double>();
    LoadedState s = parse_state(entry.at("state"));
    if (s.pure)
      atoms.push_back({w, *s.pure});
    else
      atoms.push_back({w, s.state});
  }
  return Ensemble(std::move(atoms));
}

inline Ensemble load_ensemble(const std::string& path) {
  return ensemble_from_json(io_detail::read_file(path));
}

inline QuantumChannel channel_from_json(const json& j) {
  if (!j.contains("kraus")) throw DomainError("channel JSON needs a kraus field");
  std::vector<Matrix> kraus;
  for (const auto& k : j["kraus"]) kraus.push_back(io_detail::matrix_from_json(k));
  return QuantumChannel(std::move(kraus));
}

inline QuantumChannel load_channel(const std::string& path) {
  return channel_from_json(io_detail::read_file(path));
}

inline Instrument instrument_from_json(const json& j) {
  if (!j.contains("outcomes")) throw DomainError("instrument JSON needs outcomes");
  std::vector<std::vector<Matrix>> outcomes;
  for (const auto& o : j["outcomes"]) {
    std::vector<Matrix> ops;
    for (const auto& k : o) ops.push_back(io_detail::matrix_from_json(k));
    outcomes.push_back(std::move(ops));
  }
  return Instrument(std::move(outcomes));
}

inline Instrument load_instrument(const std::string& path) {
  return instrument_from_json(io_detail::read_file(path));
}

inline json hull_result_to_json(const HullResult& r) {
  json j;
  j["value"] = round9(r.value);
  j["converged"] = r.converged;
  j["iterations"] = r.iterations_used;
  j["witness"] = ensemble_to_json(r.witness);
  return j;
}

inline json instrument_to_json(const Instrument& inst) {
  json outcomes = json::array();
  for (const auto& o : inst.outcomes()) {
    json ops = json::array();
    for (const auto& k : o) ops.push_back(io_detail::matrix_to_json(k));
    outcomes.push_back(std::move(ops));
  }
  return json{{"outcomes", std::move(outcomes)}};
}

inline std::string convergence_table_csv(const ConvergenceTable& t) {
  std::ostringstream out;
  out << "n,state_id,value,deficit\n";
  for (const auto& r : t.rows)
    out << r.family_index << ',' << r.state_id << ',' << format_value(r.value) << ','
        << format_value(r.deficit) << '\n';
  return out.str();
}

struct SweepRow {
  double param;
  double value;
  bool converged;
  double gap;  // value minus previous row's value (0 for the first row)
};

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "param,value,converged,gap\n";
  for (const auto& r : rows)
    out << format_value(r.param) << ',' << format_value(r.value) << ','
        << (r.converged ? 1 : 0) << ',' << format_value(r.gap) << '\n';
  return out.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write file: " + path);
  out << text;
}

}  // namespace qroof
