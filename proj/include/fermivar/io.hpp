#pragma once

// Serialization helpers: complex matrices as row-major [re, im] pairs in JSON,
// a CSV writer (comma separator, '.' decimal point, LF endings, UTF-8), and a
// stable content hash for configuration echoes.

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "fermivar/gaussian.hpp"

namespace fermivar {

using nlohmann::json;

inline json matrix_to_json(const Eigen::MatrixXcd& m) {
  json data = json::array();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      data.push_back({m(i, j).real(), m(i, j).imag()});
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline Eigen::MatrixXcd matrix_from_json(const json& j) {
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  const auto& data = j.at("data");
  if (static_cast<int>(data.size()) != rows * cols)
    throw std::invalid_argument("matrix_from_json: element count mismatch");
  Eigen::MatrixXcd m(rows, cols);
  int k = 0;
  for (int i = 0; i < rows; ++i)
    for (int jj = 0; jj < cols; ++jj, ++k)
      m(i, jj) = cplx(data[k][0].get<double>(), data[k][1].get<double>());
  return m;
}

inline json covariance_to_json(const Covariance& c) {
  return json{{"lambda", c.lambda}, {"omega", matrix_to_json(c.omega)}};
}

inline Covariance covariance_from_json(const json& j) {
  return Covariance(matrix_from_json(j.at("omega")), j.at("lambda").get<double>());
}

inline json bogoliubov_to_json(const BogoliubovData& b) {
  return json{{"alpha", matrix_to_json(b.alpha)},
              {"beta", matrix_to_json(b.beta)},
              {"normal_defect", b.normal_defect()}};
}

inline BogoliubovData bogoliubov_from_json(const json& j) {
  return BogoliubovData{matrix_from_json(j.at("alpha")), matrix_from_json(j.at("beta"))};
}

// FNV-1a 64-bit content hash, hex-encoded.
inline std::string content_hash(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(const std::vector<json>& cells) {
    if (cells.size() != header_.size()) throw std::invalid_argument("CsvTable: column count mismatch");
    std::string row;
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) row += ',';
      row += format_cell(cells[i]);
    }
    rows_.push_back(std::move(row));
  }

  std::string to_string() const {
    std::string out;
    for (size_t i = 0; i < header_.size(); ++i) {
      if (i) out += ',';
      out += header_[i];
    }
    out += '\n';
    for (const auto& r : rows_) {
      out += r;
      out += '\n';
    }
    return out;
  }

  void write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);  // binary: LF endings everywhere
    if (!f) throw std::runtime_error("CsvTable: cannot open " + path);
    f << to_string();
  }

  size_t n_rows() const { return rows_.size(); }
  const std::vector<std::string>& header() const { return header_; }

 private:
  static std::string format_cell(const json& v) {
    if (v.is_number_float()) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", v.get<double>());
      return buf;
    }
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  }

  std::vector<std::string> header_;
  std::vector<std::string> rows_;
};

}  // namespace fermivar
