#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "prox/core.hpp"

namespace testing_support {

inline Eigen::MatrixXd uniform_points(int d, int n, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(d, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < d; ++i) m(i, j) = u(rng);
  return m;
}

// two well separated isotropic gaussian blobs
inline Eigen::MatrixXd two_gaussians(int d, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 0.05);
  Eigen::MatrixXd m(d, n);
  for (int j = 0; j < n; ++j) {
    const double c = (j % 2 == 0) ? 0.25 : 0.75;
    for (int i = 0; i < d; ++i) m(i, j) = c + g(rng);
  }
  return m;
}

inline Eigen::VectorXd random_query(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd q(d);
  for (int i = 0; i < d; ++i) q(i) = u(rng);
  return q;
}

// query drawn near the data box [1/2, 1/2 + 1/n]^d (half the time) or anywhere in [0,1]^d
inline Eigen::VectorXd mixed_query(int d, int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd q(d);
  if (u(rng) < 0.5) {
    const double w = 1.0 / n;
    for (int i = 0; i < d; ++i) q(i) = 0.5 - w + 3 * w * u(rng);
  } else {
    for (int i = 0; i < d; ++i) q(i) = u(rng);
  }
  for (int i = 0; i < d; ++i) q(i) = std::clamp(q(i), 0.0, 1.0);
  return q;
}

}  // namespace testing_support
