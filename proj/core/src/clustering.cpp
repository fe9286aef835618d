#include "mro/clustering.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace mro {
namespace {

std::mt19937_64 restart_rng(uint64_t seed, uint64_t restart) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(restart), static_cast<uint32_t>(restart >> 32)};
  return std::mt19937_64(seq);
}

// k-means++ seeding.
Eigen::MatrixXd seed_centroids(const Eigen::MatrixXd& X, Eigen::Index K, std::mt19937_64& rng) {
  const Eigen::Index N = X.rows();
  Eigen::MatrixXd centroids(K, X.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, N - 1);
  centroids.row(0) = X.row(first(rng));
  Eigen::VectorXd dist2 = (X.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (Eigen::Index k = 1; k < K; ++k) {
    const double total = dist2.sum();
    Eigen::Index pick = 0;
    if (total <= 0) {
      std::uniform_int_distribution<Eigen::Index> any(0, N - 1);
      pick = any(rng);
    } else {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng);
      for (; pick < N - 1; ++pick) {
        r -= dist2[pick];
        if (r <= 0) break;
      }
    }
    centroids.row(k) = X.row(pick);
    dist2 = dist2.cwiseMin((X.rowwise() - centroids.row(k)).rowwise().squaredNorm());
  }
  return centroids;
}

struct LloydResult {
  std::vector<Eigen::Index> assignments;
  Eigen::MatrixXd centroids;
  double D;
};

LloydResult lloyd(const Eigen::MatrixXd& X, Eigen::MatrixXd centroids, int max_iter, double tol) {
  const Eigen::Index N = X.rows();
  const Eigen::Index K = centroids.rows();
  std::vector<Eigen::Index> assign(static_cast<size_t>(N), 0);
  double prev_D = kInf;
  double D = kInf;
  for (int iter = 0; iter < max_iter; ++iter) {
    D = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
      Eigen::Index best = 0;
      double best_d = (X.row(i) - centroids.row(0)).squaredNorm();
      for (Eigen::Index k = 1; k < K; ++k) {
        const double d = (X.row(i) - centroids.row(k)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      assign[static_cast<size_t>(i)] = best;
      D += best_d;
    }
    D /= static_cast<double>(N);

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(K, X.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(K);
    for (Eigen::Index i = 0; i < N; ++i) {
      sums.row(assign[static_cast<size_t>(i)]) += X.row(i);
      counts[assign[static_cast<size_t>(i)]] += 1.0;
    }
    // Re-seed an emptied cluster with the point farthest from its centroid.
    for (Eigen::Index k = 0; k < K; ++k) {
      if (counts[k] > 0) {
        centroids.row(k) = sums.row(k) / counts[k];
        continue;
      }
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < N; ++i) {
        const double d = (X.row(i) - centroids.row(assign[static_cast<size_t>(i)])).squaredNorm();
        if (d > far_d && counts[assign[static_cast<size_t>(i)]] > 1) {
          far_d = d;
          far = i;
        }
      }
      counts[assign[static_cast<size_t>(far)]] -= 1.0;
      sums.row(assign[static_cast<size_t>(far)]) -= X.row(far);
      centroids.row(assign[static_cast<size_t>(far)]) =
          sums.row(assign[static_cast<size_t>(far)]) / counts[assign[static_cast<size_t>(far)]];
      assign[static_cast<size_t>(far)] = k;
      centroids.row(k) = X.row(far);
      counts[k] = 1.0;
      prev_D = kInf;  // force another sweep
    }
    if (prev_D - D < tol) break;
    prev_D = D;
  }
  return {std::move(assign), std::move(centroids), D};
}

}  // namespace

ClusteredSet clustered_from_assignments(const Dataset& data,
                                        const std::vector<Eigen::Index>& assignments,
                                        Eigen::Index K, const NormSpec& eta_norm) {
  const Eigen::Index N = data.n();
  if (static_cast<Eigen::Index>(assignments.size()) != N) {
    throw std::invalid_argument("clustered_from_assignments: assignment size mismatch");
  }
  ClusteredSet cs;
  cs.K = K;
  cs.source_N = N;
  cs.assignments = assignments;
  cs.centroids = Eigen::MatrixXd::Zero(K, data.m());
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(K);
  for (Eigen::Index i = 0; i < N; ++i) {
    const Eigen::Index k = assignments[static_cast<size_t>(i)];
    if (k < 0 || k >= K) throw std::invalid_argument("assignment out of range");
    cs.centroids.row(k) += data.samples.row(i);
    counts[k] += 1.0;
  }
  if ((counts.array() <= 0).any()) throw std::invalid_argument("empty cluster");
  for (Eigen::Index k = 0; k < K; ++k) cs.centroids.row(k) /= counts[k];
  cs.weights = counts / static_cast<double>(N);
  cs.D = 0.0;
  cs.eta = 0.0;
  for (Eigen::Index i = 0; i < N; ++i) {
    const Eigen::Index k = assignments[static_cast<size_t>(i)];
    const Eigen::VectorXd diff = (data.samples.row(i) - cs.centroids.row(k)).transpose();
    cs.D += diff.squaredNorm();
    cs.eta = std::max(cs.eta, eta_norm.value(diff));
  }
  cs.D /= static_cast<double>(N);
  return cs;
}

ClusteredSet kmeans(const Dataset& data, Eigen::Index K, const KMeansConfig& cfg) {
  const Eigen::Index N = data.n();
  if (K < 1) throw std::invalid_argument("kmeans: K < 1");
  if (K > N) throw std::invalid_argument("kmeans: K > N");

  if (K == 1) {
    return clustered_from_assignments(data, std::vector<Eigen::Index>(static_cast<size_t>(N), 0),
                                      1, cfg.eta_norm);
  }
  if (K == N) {
    std::vector<Eigen::Index> assign(static_cast<size_t>(N));
    for (Eigen::Index i = 0; i < N; ++i) assign[static_cast<size_t>(i)] = i;
    return clustered_from_assignments(data, assign, N, cfg.eta_norm);
  }

  std::optional<LloydResult> best;
  for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
    auto rng = restart_rng(cfg.seed, static_cast<uint64_t>(r));
    auto result = lloyd(data.samples, seed_centroids(data.samples, K, rng), cfg.max_iter, cfg.tol);
    if (!best || result.D < best->D) best = std::move(result);  // ties keep earliest restart
  }
  return clustered_from_assignments(data, best->assignments, K, cfg.eta_norm);
}

namespace {

// Splits the cluster with the largest within-cluster scatter by promoting its
// farthest point to a centroid, then re-runs Lloyd from the enlarged set.
ClusteredSet split_refine(const Dataset& data, const ClusteredSet& prev, Eigen::Index target_K,
                          const KMeansConfig& cfg) {
  Eigen::MatrixXd centroids = prev.centroids;
  std::vector<Eigen::Index> assign = prev.assignments;
  while (centroids.rows() < target_K) {
    const Eigen::Index K_now = centroids.rows();
    Eigen::VectorXd scatter = Eigen::VectorXd::Zero(K_now);
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      scatter[assign[static_cast<size_t>(i)]] +=
          (data.samples.row(i) - centroids.row(assign[static_cast<size_t>(i)])).squaredNorm();
    }
    Eigen::Index worst;
    scatter.maxCoeff(&worst);
    Eigen::Index far = -1;
    double far_d = -1.0;
    Eigen::Index members = 0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      if (assign[static_cast<size_t>(i)] != worst) continue;
      ++members;
      const double d = (data.samples.row(i) - centroids.row(worst)).squaredNorm();
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (members < 2) break;  // nothing left to split
    centroids.conservativeResize(K_now + 1, Eigen::NoChange);
    centroids.row(K_now) = data.samples.row(far);
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      Eigen::Index k_best = 0;
      double d_best = (data.samples.row(i) - centroids.row(0)).squaredNorm();
      for (Eigen::Index k = 1; k <= K_now; ++k) {
        const double d = (data.samples.row(i) - centroids.row(k)).squaredNorm();
        if (d < d_best) {
          d_best = d;
          k_best = k;
        }
      }
      assign[static_cast<size_t>(i)] = k_best;
    }
  }
  auto refined = lloyd(data.samples, centroids, cfg.max_iter, cfg.tol);
  return clustered_from_assignments(data, refined.assignments, centroids.rows(), cfg.eta_norm);
}

}  // namespace

std::vector<ProfileEntry> d_profile(const Dataset& data, const std::vector<Eigen::Index>& K_list,
                                    const KMeansConfig& cfg) {
  if (!std::is_sorted(K_list.begin(), K_list.end())) {
    throw std::invalid_argument("d_profile: K_list must be sorted ascending");
  }
  std::vector<ProfileEntry> profile;
  std::optional<ClusteredSet> prev;
  for (Eigen::Index K : K_list) {
    ClusteredSet cs = kmeans(data, K, cfg);
    if (prev && cs.D > prev->D) {
      ClusteredSet alt = split_refine(data, *prev, K, cfg);
      if (alt.K == K && alt.D < cs.D) cs = std::move(alt);
    }
    profile.push_back({K, cs.D, cs.eta});
    prev = std::move(cs);
  }
  return profile;
}

Eigen::Index elbow_select(const std::vector<ProfileEntry>& profile, double drop_ratio) {
  if (profile.empty()) throw std::invalid_argument("elbow_select: empty profile");
  const double scale = std::max(profile.front().D, std::numeric_limits<double>::epsilon());
  for (size_t i = 0; i + 1 < profile.size(); ++i) {
    if ((profile[i].D - profile[i + 1].D) / scale < drop_ratio) return profile[i].K;
  }
  return profile.back().K;
}

std::string ClusteredSet::to_json() const {
  nlohmann::json j;
  auto rows = nlohmann::json::array();
  for (Eigen::Index k = 0; k < K; ++k) {
    rows.push_back(std::vector<double>(centroids.row(k).begin(), centroids.row(k).end()));
  }
  j["centroids"] = std::move(rows);
  j["weights"] = std::vector<double>(weights.begin(), weights.end());
  j["assignments"] = assignments;
  j["D"] = D;
  j["eta"] = eta;
  j["K"] = K;
  j["source_N"] = source_N;
  return j.dump(2);
}

ClusteredSet ClusteredSet::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ClusteredSet cs;
  cs.K = j.at("K").get<Eigen::Index>();
  cs.source_N = j.at("source_N").get<Eigen::Index>();
  cs.D = j.at("D").get<double>();
  cs.eta = j.at("eta").get<double>();
  cs.assignments = j.at("assignments").get<std::vector<Eigen::Index>>();
  const auto w = j.at("weights").get<std::vector<double>>();
  cs.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  const auto& rows = j.at("centroids");
  if (rows.empty()) throw std::invalid_argument("ClusteredSet: no centroids");
  cs.centroids.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows[0].size()));
  for (Eigen::Index k = 0; k < cs.centroids.rows(); ++k) {
    for (Eigen::Index c = 0; c < cs.centroids.cols(); ++c) {
      cs.centroids(k, c) = rows[static_cast<size_t>(k)][static_cast<size_t>(c)].get<double>();
    }
  }
  return cs;
}

}  // namespace mro
