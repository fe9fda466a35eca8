#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <string>

namespace prox {

// Point text format: one point per line, whitespace separated coordinates,
// optional trailing `w=<weight>`, `#` starts a comment line.
struct RawPoints {
  Eigen::MatrixXd coords;  // d x n
  Eigen::VectorXd weights;
  bool has_weights = false;
};

RawPoints read_points(std::istream& in);
RawPoints read_points_file(const std::string& path);
void write_points(std::ostream& out, const Eigen::MatrixXd& coords, const Eigen::VectorXd* weights = nullptr);

}  // namespace prox
