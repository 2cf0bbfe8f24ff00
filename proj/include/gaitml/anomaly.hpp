#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gaitml/features.hpp"

namespace gait {

/// K-means anomaly model over normalized feature vectors.
///
/// A point's score is min_j(dist(x, c_j) / r_j) - 1: negative inside the
/// typical radius of some cluster, positive outside all of them.
struct AnomalyModel {
  std::vector<FeatureVector> centroids;
  std::vector<double> radii;

  std::size_t k() const { return centroids.size(); }
  std::size_t dimension() const { return centroids.empty() ? 0 : centroids.front().size(); }
  void validate() const;

  bool operator==(const AnomalyModel&) const = default;
};

inline constexpr double kRadiusFloor = 1e-6;

/// How a cluster's radius is derived from its members' distances to the
/// centroid.
enum class RadiusRule {
  Mean,         // mean member distance
  MeanPlus3Sd,  // mean + 3 * population std of member distances
};

struct KMeansConfig {
  std::size_t k = 8;
  std::size_t max_iterations = 100;
  double tolerance = 1e-6;  // stop once no centroid moves further than this
  RadiusRule radius_rule = RadiusRule::MeanPlus3Sd;
};

struct KMeansFit {
  AnomalyModel model;
  std::vector<double> inertia;  // after each Lloyd iteration
  std::size_t iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding. Deterministic per seed.
KMeansFit fit_kmeans_detailed(std::span<const FeatureVector> train, const KMeansConfig& cfg,
                              std::uint64_t seed);
AnomalyModel fit_kmeans(std::span<const FeatureVector> train, std::size_t k, std::uint64_t seed);

double anomaly_score(const AnomalyModel& m, std::span<const double> x);

double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace gait
