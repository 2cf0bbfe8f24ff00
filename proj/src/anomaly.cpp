#include "gaitml/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "gaitml/error.hpp"
#include "gaitml/rng.hpp"

namespace gait {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void AnomalyModel::validate() const {
  if (centroids.empty()) throw Error(ErrorCode::InvalidValue, "anomaly model has no clusters");
  if (radii.size() != centroids.size()) {
    throw Error(ErrorCode::DimensionMismatch, "centroid and radius counts differ");
  }
  for (const auto& c : centroids) {
    if (c.size() != centroids.front().size()) {
      throw Error(ErrorCode::DimensionMismatch, "centroids differ in dimension");
    }
  }
  for (double r : radii) {
    if (!(r >= kRadiusFloor)) throw Error(ErrorCode::InvalidValue, "cluster radius below floor");
  }
}

namespace {

struct Nearest {
  std::size_t index = 0;
  double dist2 = 0.0;
};

Nearest nearest(std::span<const FeatureVector> centroids, std::span<const double> x) {
  Nearest best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t j = 0; j < centroids.size(); ++j) {
    const double d = squared_distance(centroids[j], x);
    if (d < best.dist2) best = {j, d};
  }
  return best;
}

std::vector<FeatureVector> seed_plus_plus(std::span<const FeatureVector> pts, std::size_t k,
                                          Rng& rng) {
  std::vector<FeatureVector> centers;
  centers.push_back(pts[rng.index(pts.size())]);
  std::vector<double> d2(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) d2[i] = squared_distance(pts[i], centers[0]);
  while (centers.size() < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = pts.size() - 1;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        acc += d2[i];
        if (acc > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.index(pts.size());
    }
    centers.push_back(pts[pick]);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      d2[i] = std::min(d2[i], squared_distance(pts[i], centers.back()));
    }
  }
  return centers;
}

}  // namespace

KMeansFit fit_kmeans_detailed(std::span<const FeatureVector> train, const KMeansConfig& cfg,
                              std::uint64_t seed) {
  if (cfg.k < 1) throw Error(ErrorCode::InvalidValue, "k must be >= 1");
  if (train.size() < cfg.k) {
    throw Error(ErrorCode::TooFewPoints,
                fmt::format("{} points cannot form {} clusters", train.size(), cfg.k));
  }
  const std::size_t dim = train.front().size();
  for (const auto& p : train) {
    if (p.size() != dim) throw Error(ErrorCode::DimensionMismatch, "ragged training points");
  }

  Rng rng(seed);
  KMeansFit fit;
  std::vector<FeatureVector> centers = seed_plus_plus(train, cfg.k, rng);
  std::vector<std::size_t> assign(train.size(), 0);

  auto assign_all = [&] {
    double inertia = 0.0;
    for (std::size_t i = 0; i < train.size(); ++i) {
      const Nearest n = nearest(centers, train[i]);
      assign[i] = n.index;
      inertia += n.dist2;
    }
    return inertia;
  };

  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    fit.inertia.push_back(assign_all());
    ++fit.iterations;

    std::vector<FeatureVector> sums(cfg.k, FeatureVector(dim, 0.0));
    std::vector<std::size_t> counts(cfg.k, 0);
    for (std::size_t i = 0; i < train.size(); ++i) {
      ++counts[assign[i]];
      for (std::size_t d = 0; d < dim; ++d) sums[assign[i]][d] += train[i][d];
    }
    double max_move = 0.0;
    for (std::size_t j = 0; j < cfg.k; ++j) {
      if (counts[j] == 0) continue;  // empty cluster keeps its centroid
      for (double& v : sums[j]) v /= static_cast<double>(counts[j]);
      max_move = std::max(max_move, std::sqrt(squared_distance(sums[j], centers[j])));
      centers[j] = std::move(sums[j]);
    }
    if (max_move < cfg.tolerance) break;
  }
  assign_all();

  std::vector<double> sum(cfg.k, 0.0), sum2(cfg.k, 0.0);
  std::vector<std::size_t> counts(cfg.k, 0);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const double d = std::sqrt(squared_distance(train[i], centers[assign[i]]));
    sum[assign[i]] += d;
    sum2[assign[i]] += d * d;
    ++counts[assign[i]];
  }
  fit.model.radii.assign(cfg.k, kRadiusFloor);
  for (std::size_t j = 0; j < cfg.k; ++j) {
    if (counts[j] == 0) continue;
    const double n = static_cast<double>(counts[j]);
    const double mu = sum[j] / n;
    double r = mu;
    if (cfg.radius_rule == RadiusRule::MeanPlus3Sd) {
      r += 3.0 * std::sqrt(std::max(0.0, sum2[j] / n - mu * mu));
    }
    fit.model.radii[j] = std::max(r, kRadiusFloor);
  }
  fit.model.centroids = std::move(centers);
  return fit;
}

AnomalyModel fit_kmeans(std::span<const FeatureVector> train, std::size_t k, std::uint64_t seed) {
  KMeansConfig cfg;
  cfg.k = k;
  return fit_kmeans_detailed(train, cfg, seed).model;
}

double anomaly_score(const AnomalyModel& m, std::span<const double> x) {
  if (m.centroids.empty() || x.size() != m.dimension()) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("point has {} values, anomaly model expects {}", x.size(), m.dimension()));
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m.centroids.size(); ++j) {
    best = std::min(best, std::sqrt(squared_distance(x, m.centroids[j])) / m.radii[j]);
  }
  return best - 1.0;
}

}  // namespace gait
