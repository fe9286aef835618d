#include "mro/dataset_io.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <vector>

namespace mro {
namespace {

bool parse_row(const std::string& line, std::vector<double>& out) {
  out.clear();
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      size_t pos = 0;
      const double v = std::stod(cell, &pos);
      while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
      if (pos != cell.size()) return false;
      out.push_back(v);
    } catch (const std::exception&) {
      return false;
    }
  }
  return !out.empty();
}

}  // namespace

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  std::vector<double> row;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (!parse_row(line, row)) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw std::runtime_error("bad CSV row in " + path + ": " + line);
    }
    first = false;
    if (!rows.empty() && rows.front().size() != row.size()) {
      throw std::runtime_error("ragged CSV rows in " + path);
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw std::runtime_error("no samples in " + path);
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(rows.size()),
                          static_cast<Eigen::Index>(rows.front().size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) {
      samples(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return Dataset(std::move(samples));
}

void save_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.m(); ++j) {
      if (j) out << ',';
      out << data.samples(i, j);
    }
    out << '\n';
  }
}

Dataset load_dataset_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  const auto& rows = j.at("samples");
  const Eigen::Index m = j.at("m").get<Eigen::Index>();
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(rows.size()), m);
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const auto& r = rows[static_cast<size_t>(i)];
    if (static_cast<Eigen::Index>(r.size()) != m) {
      throw std::runtime_error("sample row does not match m in " + path);
    }
    for (Eigen::Index c = 0; c < m; ++c) samples(i, c) = r[static_cast<size_t>(c)].get<double>();
  }
  return Dataset(std::move(samples));
}

void save_dataset_json(const Dataset& data, const std::string& path) {
  nlohmann::json j;
  j["m"] = data.m();
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    auto r = nlohmann::json::array();
    for (Eigen::Index c = 0; c < data.m(); ++c) r.push_back(data.samples(i, c));
    rows.push_back(std::move(r));
  }
  j["samples"] = std::move(rows);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

Dataset load_dataset(const std::string& path) {
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") return load_dataset_json(path);
  return load_dataset_csv(path);
}

}  // namespace mro
