#include "ecp/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ecp {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json gsf_to_json(const GridStepFunction& f) {
  nlohmann::json j;
  j["dim"] = f.dim();
  j["axis_breaks"] = f.axis_breaks();
  j["cell_values"] = f.cell_values();
  return j;
}

GridStepFunction gsf_from_json(const nlohmann::json& j) {
  if (!j.contains("dim") || !j.contains("axis_breaks") || !j.contains("cell_values"))
    throw std::invalid_argument(
        "gsf_from_json: expected fields dim, axis_breaks, cell_values");
  const auto breaks = j.at("axis_breaks").get<std::vector<std::vector<double>>>();
  if (j.at("dim").get<int>() != static_cast<int>(breaks.size()))
    throw std::invalid_argument("gsf_from_json: dim does not match axis_breaks");
  return GridStepFunction(breaks, j.at("cell_values").get<std::vector<double>>());
}

nlohmann::json measure_to_json(const SignedMeasure& mu) {
  nlohmann::json j;
  j["dim"] = mu.dim;
  auto& atoms = j["atoms"] = nlohmann::json::array();
  for (const auto& a : mu.atoms) atoms.push_back({{"loc", a.loc}, {"w", a.weight}});
  return j;
}

SignedMeasure measure_from_json(const nlohmann::json& j) {
  SignedMeasure mu;
  mu.dim = j.at("dim").get<int>();
  for (const auto& a : j.at("atoms")) {
    SignedMeasure::Atom atom;
    atom.loc = a.at("loc").get<std::vector<double>>();
    atom.weight = a.at("w").get<double>();
    if (static_cast<int>(atom.loc.size()) != mu.dim)
      throw std::invalid_argument("measure_from_json: atom dimension mismatch");
    mu.atoms.push_back(std::move(atom));
  }
  return mu;
}

std::string sample_to_csv(const SampleMatrix& s, const std::string& preamble) {
  std::string out = preamble;
  if (!preamble.empty() && preamble.back() != '\n') out += '\n';
  for (int j = 0; j < s.dim; ++j) {
    if (j) out += ',';
    out += 'x';
    out += std::to_string(j + 1);
  }
  out += '\n';
  for (std::size_t i = 0; i < s.n; ++i) {
    for (int j = 0; j < s.dim; ++j) {
      if (j) out += ',';
      out += format_double(s.at(i, j));
    }
    out += '\n';
  }
  return out;
}

SampleMatrix sample_from_csv(std::istream& in) {
  std::string line;
  // skip comments, find the header
  int dim = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    dim = 1;
    for (char c : line) dim += c == ',';
    break;
  }
  if (dim == 0) throw std::invalid_argument("sample_from_csv: missing header");
  SampleMatrix s;
  s.dim = dim;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string cell;
    int got = 0;
    while (std::getline(row, cell, ',')) {
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &pos);
      } catch (...) {
        throw std::invalid_argument("sample_from_csv: bad value '" + cell + "'");
      }
      if (pos != cell.size())
        throw std::invalid_argument("sample_from_csv: bad value '" + cell + "'");
      s.values.push_back(v);
      ++got;
    }
    if (got != dim)
      throw std::invalid_argument("sample_from_csv: inconsistent column count");
    ++s.n;
  }
  return s;
}

SampleMatrix sample_from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open input file: " + path);
  return sample_from_csv(in);
}

}  // namespace ecp
