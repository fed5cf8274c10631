// Dataset CSV format: UTF-8, comma delimiter, '.' decimal, header row
// x1,...,xp,y. Optional sidecar file with the true coefficients, one value
// per line. Doubles are written in shortest round-trip form.
#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hdglm/dataset.hpp"
#include "hdglm/errors.hpp"

namespace hdglm {

inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const char* context) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc())
    throw ParseError(std::string(context) + ": cannot parse number '" + s + "'");
  if (!std::isfinite(v))
    throw ParseError(std::string(context) + ": non-finite value '" + s + "'");
  return v;
}

inline void write_dataset_csv(std::ostream& out, const Dataset& ds) {
  const Eigen::Index n = ds.n(), p = ds.p();
  for (Eigen::Index j = 0; j < p; ++j) out << 'x' << (j + 1) << ',';
  out << "y\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) out << format_double(ds.X(i, j)) << ',';
    out << format_double(ds.y[i]) << '\n';
  }
}

inline void write_dataset_csv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot open '" + path + "' for writing");
  write_dataset_csv(out, ds);
}

inline void write_vector(const std::string& path, const Eigen::VectorXd& v) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot open '" + path + "' for writing");
  for (Eigen::Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << '\n';
}

inline Eigen::VectorXd read_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::vector<double> vals;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    vals.push_back(parse_double(line, path.c_str()));
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

inline Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  // header x1,...,xp,y
  Eigen::Index p = 0;
  {
    std::stringstream hs(line);
    std::string cell;
    std::vector<std::string> cols;
    while (std::getline(hs, cell, ',')) cols.push_back(cell);
    if (cols.empty() || cols.back() != "y")
      throw ParseError(path + ": header must end with 'y'");
    p = static_cast<Eigen::Index>(cols.size()) - 1;
    if (p < 1) throw ParseError(path + ": no feature columns");
  }
  std::vector<double> flat;
  Eigen::Index n = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    Eigen::Index got = 0;
    while (std::getline(ls, cell, ',')) {
      flat.push_back(parse_double(cell, path.c_str()));
      ++got;
    }
    if (got != p + 1)
      throw ParseError(path + ": row " + std::to_string(n + 2) + " has " +
                       std::to_string(got) + " fields, expected " + std::to_string(p + 1));
    ++n;
  }
  if (n == 0) throw ParseError(path + ": no data rows");
  Dataset ds;
  ds.X.resize(n, p);
  ds.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) ds.X(i, j) = flat[i * (p + 1) + j];
    ds.y[i] = flat[i * (p + 1) + p];
  }
  return ds;
}

}  // namespace hdglm
