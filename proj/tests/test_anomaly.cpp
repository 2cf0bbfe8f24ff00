#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gaitml/anomaly.hpp"
#include "gaitml/error.hpp"

using namespace gait;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

std::vector<FeatureVector> clusters(std::size_t n, std::size_t dim, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> nd(0.0, 0.5);
  std::vector<FeatureVector> pts;
  for (std::size_t i = 0; i < n; ++i) {
    FeatureVector p(dim);
    for (std::size_t d = 0; d < dim; ++d) p[d] = nd(gen) + 6.0 * static_cast<double>((i % 3) == d % 3);
    pts.push_back(std::move(p));
  }
  return pts;
}

}  // namespace

TEST_CASE("k = 1 on identical points") {
  const std::vector<FeatureVector> pts(10, FeatureVector{1.0, -2.0, 0.5});
  const AnomalyModel m = fit_kmeans(pts, 1, 3);
  REQUIRE(m.k() == 1);
  CHECK(m.centroids[0] == pts[0]);
  CHECK(m.radii[0] == kRadiusFloor);
  CHECK(anomaly_score(m, pts[0]) == -1.0);
}

TEST_CASE("k = 1 centroid is the mean") {
  const auto pts = clusters(60, 4, 2);
  const AnomalyModel m = fit_kmeans(pts, 1, 0);
  for (std::size_t d = 0; d < 4; ++d) {
    double s = 0.0;
    for (const auto& p : pts) s += p[d];
    CHECK(m.centroids[0][d] == doctest::Approx(s / 60.0).epsilon(1e-12));
  }
}

TEST_CASE("hand-built score geometry") {
  const AnomalyModel m{{{0.0, 0.0}, {10.0, 0.0}}, {2.0, 1.0}};
  CHECK(anomaly_score(m, std::vector<double>{0.0, 0.0}) == -1.0);
  CHECK(anomaly_score(m, std::vector<double>{2.0, 0.0}) == doctest::Approx(0.0));
  CHECK(anomaly_score(m, std::vector<double>{0.0, -4.0}) == doctest::Approx(1.0));
  CHECK(anomaly_score(m, std::vector<double>{10.0, 0.5}) == doctest::Approx(-0.5));
  // 6 from the first (6/2) and 4 from the second (4/1): the first wins.
  CHECK(anomaly_score(m, std::vector<double>{6.0, 0.0}) == doctest::Approx(2.0));
}

TEST_CASE("inertia never increases") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto pts = clusters(200, 5, static_cast<std::uint32_t>(seed));
    KMeansConfig cfg;
    cfg.k = 6;
    const KMeansFit fit = fit_kmeans_detailed(pts, cfg, seed);
    REQUIRE(!fit.inertia.empty());
    CHECK(fit.iterations == fit.inertia.size());
    CHECK(fit.iterations <= cfg.max_iterations);
    for (std::size_t i = 1; i < fit.inertia.size(); ++i) {
      CHECK(fit.inertia[i] <= fit.inertia[i - 1] * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("fit is deterministic per seed") {
  const auto pts = clusters(150, 4, 5);
  CHECK(fit_kmeans(pts, 8, 11) == fit_kmeans(pts, 8, 11));
}

TEST_CASE("scores are translation invariant") {
  const auto pts = clusters(120, 3, 6);
  auto shifted = pts;
  for (auto& p : shifted)
    for (double& v : p) v += 10.0;
  const AnomalyModel a = fit_kmeans(pts, 3, 4);
  const AnomalyModel b = fit_kmeans(shifted, 3, 4);
  for (std::size_t i = 0; i < pts.size(); i += 7) {
    CHECK(anomaly_score(b, shifted[i]) == doctest::Approx(anomaly_score(a, pts[i])).epsilon(1e-9));
  }
}

TEST_CASE("score grows along a ray away from every centroid") {
  const auto pts = clusters(120, 3, 7);
  const AnomalyModel m = fit_kmeans(pts, 3, 1);
  const FeatureVector dir = {-1.0, -0.5, -0.25};
  double prev = -2.0;
  for (double t = 1.0; t < 200.0; t *= 1.5) {
    const FeatureVector x = {t * dir[0], t * dir[1], t * dir[2]};
    const double s = anomaly_score(m, x);
    CHECK(s > prev);
    prev = s;
  }
  CHECK(prev > 0.0);
}

TEST_CASE("mean training score is not positive") {
  const auto pts = clusters(300, 6, 8);
  for (RadiusRule rule : {RadiusRule::Mean, RadiusRule::MeanPlus3Sd}) {
    KMeansConfig cfg;
    cfg.radius_rule = rule;
    const AnomalyModel m = fit_kmeans_detailed(pts, cfg, 2).model;
    double sum = 0.0;
    for (const auto& p : pts) sum += anomaly_score(m, p);
    CHECK(sum / static_cast<double>(pts.size()) <= 1e-12);
  }
}

TEST_CASE("wider radius rule scores every training point lower") {
  const auto pts = clusters(300, 6, 9);
  KMeansConfig mean_cfg;
  mean_cfg.radius_rule = RadiusRule::Mean;
  const AnomalyModel narrow = fit_kmeans_detailed(pts, mean_cfg, 2).model;
  const AnomalyModel wide = fit_kmeans_detailed(pts, KMeansConfig{}, 2).model;
  CHECK(narrow.centroids == wide.centroids);
  for (std::size_t j = 0; j < narrow.k(); ++j) CHECK(wide.radii[j] >= narrow.radii[j]);
}

TEST_CASE("anomaly errors") {
  const auto pts = clusters(5, 3, 1);
  CHECK(code_of([&] { fit_kmeans(pts, 8, 0); }) == ErrorCode::TooFewPoints);
  const AnomalyModel m = fit_kmeans(pts, 2, 0);
  CHECK(code_of([&] { anomaly_score(m, std::vector<double>{1.0, 2.0}); }) == ErrorCode::DimensionMismatch);
  std::vector<FeatureVector> ragged = pts;
  ragged[2].push_back(0.0);
  CHECK(code_of([&] { fit_kmeans(ragged, 2, 0); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { AnomalyModel{{{0.0}}, {0.0}}.validate(); }) == ErrorCode::InvalidValue);
}
