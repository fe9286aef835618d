#pragma once

#include "mro/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mro {

/// Result of partitioning a dataset into K clusters. D is the mean squared
/// L2 distance to the assigned centroid (the k-means objective); eta is the
/// maximum distance of any point to its assigned centroid in the inner norm
/// used by the uncertainty set.
struct ClusteredSet {
  Eigen::MatrixXd centroids;         // K x m
  Eigen::VectorXd weights;           // K, sums to 1, all > 0
  std::vector<Eigen::Index> assignments;  // N cluster ids
  double D = 0.0;
  double eta = 0.0;
  Eigen::Index K = 0;
  Eigen::Index source_N = 0;

  std::string to_json() const;
  static ClusteredSet from_json(const std::string& text);
};

struct KMeansConfig {
  uint64_t seed = 0;
  int restarts = 10;
  int max_iter = 300;
  double tol = 1e-10;
  NormSpec eta_norm;  // norm used for eta only; D is always squared L2
};

/// Trivial clustering where every point is its own cluster (K = N) or all
/// points share one cluster (K = 1); kmeans handles these without iterating.
ClusteredSet kmeans(const Dataset& data, Eigen::Index K, const KMeansConfig& cfg = {});

/// Recomputes (centroids, weights, D, eta) from assignments. Used by tests
/// and by the monotone-profile enforcement.
ClusteredSet clustered_from_assignments(const Dataset& data,
                                        const std::vector<Eigen::Index>& assignments,
                                        Eigen::Index K, const NormSpec& eta_norm = {});

struct ProfileEntry {
  Eigen::Index K;
  double D;
  double eta;
};

/// Per-K clustering metrics with D(K) nonincreasing in K. If the fresh run at
/// K+1 is worse than at K, the K-solution with its worst cluster split in two
/// seeds an extra run.
std::vector<ProfileEntry> d_profile(const Dataset& data, const std::vector<Eigen::Index>& K_list,
                                    const KMeansConfig& cfg = {});

/// Smallest K whose drop to the next entry falls below drop_ratio of D(1);
/// the last K if the rule never fires.
Eigen::Index elbow_select(const std::vector<ProfileEntry>& profile, double drop_ratio = 0.1);

}  // namespace mro
