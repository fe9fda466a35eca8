#pragma once

#include <functional>
#include <vector>

#include "prox/core.hpp"

// Brute-force reference values. Deliberately shares no distance code with
// the approximate modules.
namespace prox::oracle {

// ascending distances from q to every real (non-synthetic) point
std::vector<double> sorted_distances(const PointSet& ps, const Eigen::Ref<const Eigen::VectorXd>& q);

double exact_knn_distance(const PointSet& ps, const Eigen::Ref<const Eigen::VectorXd>& q, long k);
// same value through nth_element; used to cross-check the sort path
double exact_knn_distance_select(const PointSet& ps, const Eigen::Ref<const Eigen::VectorXd>& q, long k);
double exact_weighted_distance(const PointSet& ps, const Eigen::Ref<const Eigen::VectorXd>& q, double tau);

struct DensityValues {
  double D = 0;   // sum_{i=1..k} f(d_i)
  double aD = 0;  // sum_{i=ceil(k eps/8)..k} f(d_i)
  double F = 0;   // D / k
  std::vector<double> d;  // d_1..d_k
};

DensityValues exact_density(const PointSet& ps, const Eigen::Ref<const Eigen::VectorXd>& q, long k,
                            const std::function<double(double)>& f, double eps = 1.0);

// min over p in `remaining` of the distance to its k-th nearest point in `remaining`
double centered_kball_radius(const PointSet& ps, const std::vector<Eigen::Index>& remaining, long k);
// weighted version: smallest radius around some remaining point holding weight >= tau
double centered_weighted_radius(const PointSet& ps, const std::vector<Eigen::Index>& remaining, double tau,
                                const std::vector<double>* extra_weights = nullptr);

}  // namespace prox::oracle
