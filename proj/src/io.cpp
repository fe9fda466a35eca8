#include "prox/io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "prox/errors.hpp"

namespace prox {

namespace {

bool parse_double(const std::string& tok, double& v) {
  const char* s = tok.c_str();
  char* end = nullptr;
  v = std::strtod(s, &end);
  return end != s && *end == '\0' && std::isfinite(v);
}

}  // namespace

RawPoints read_points(std::istream& in) {
  std::vector<double> flat;
  std::vector<double> weights;
  bool any_weight = false;
  long dim = -1, line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string tok;
    std::vector<double> row;
    double w = 1.0;
    bool has_w = false;
    while (ls >> tok) {
      if (tok.rfind("w=", 0) == 0) {
        if (has_w) throw ParseError("duplicate weight token", line_no);
        if (!parse_double(tok.substr(2), w) || w < 0) throw ParseError("bad weight '" + tok + "'", line_no);
        has_w = true;
        continue;
      }
      if (has_w) throw ParseError("weight token must be last", line_no);
      double v;
      if (!parse_double(tok, v)) throw ParseError("bad coordinate '" + tok + "'", line_no);
      row.push_back(v);
    }
    if (row.empty()) throw ParseError("no coordinates", line_no);
    if (dim < 0) dim = static_cast<long>(row.size());
    if (static_cast<long>(row.size()) != dim)
      throw ParseError("expected " + std::to_string(dim) + " coordinates, got " + std::to_string(row.size()), line_no);
    flat.insert(flat.end(), row.begin(), row.end());
    weights.push_back(w);
    any_weight |= has_w;
  }
  RawPoints out;
  if (dim < 0) return out;
  const long n = static_cast<long>(weights.size());
  out.coords = Eigen::Map<Eigen::MatrixXd>(flat.data(), dim, n);
  out.weights = Eigen::Map<Eigen::VectorXd>(weights.data(), n);
  out.has_weights = any_weight;
  return out;
}

RawPoints read_points_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_points(in);
}

void write_points(std::ostream& out, const Eigen::MatrixXd& coords, const Eigen::VectorXd* weights) {
  out << std::setprecision(17);
  for (Eigen::Index j = 0; j < coords.cols(); ++j) {
    for (Eigen::Index i = 0; i < coords.rows(); ++i) out << (i ? " " : "") << coords(i, j);
    if (weights) out << " w=" << (*weights)(j);
    out << '\n';
  }
}

}  // namespace prox
