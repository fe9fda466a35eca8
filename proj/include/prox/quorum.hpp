#pragma once

#include <iosfwd>
#include <vector>

#include "prox/core.hpp"

namespace prox {

struct Cluster {
  Vector center;
  double radius = 0.0;
  std::vector<Eigen::Index> members;  // may contain QuorumClustering::pad_index
  double weight = 0.0;                // member weight, pad included
  double rho = 0.0;                   // exact smallest centered radius of this round
  bool jittered = false;
};

struct QuorumClustering {
  std::vector<Cluster> balls;
  long k = 0;
  double tau = 0.0;
  bool weighted = false;
  // weighted only: when the leftover weight is below tau, a pad point at the
  // synthetic location tops the last cluster up to tau
  Eigen::Index pad_index = -1;
  double pad_weight = 0.0;
};

enum class QuorumMethod { Fast, Reference };

// ps.size() must be a multiple of k (pad first)
QuorumClustering quorum_cluster(const PointSet& ps, long k, QuorumMethod method = QuorumMethod::Fast);
QuorumClustering quorum_cluster_weighted(const PointSet& ps, double tau, QuorumMethod method = QuorumMethod::Fast);

// round,center...,radius,member_indices (members separated by ';')
void write_clustering_csv(std::ostream& out, const QuorumClustering& qc);

// empty when members partition the points, balls cover members and centers are distinct
std::vector<std::string> audit_clustering(const PointSet& ps, const QuorumClustering& qc);

}  // namespace prox
