#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "gaitml/error.hpp"
#include "gaitml/metrics.hpp"
#include "oracles.hpp"

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

}  // namespace

TEST_CASE("small confusion matrix") {
  const std::vector<std::size_t> preds = {0, 1, 1};
  const std::vector<std::size_t> labels = {0, 0, 1};
  const ConfusionMatrix cm = confusion_matrix(preds, labels);
  CHECK(cm.at(0, 0) == 1);
  CHECK(cm.at(0, 1) == 1);
  CHECK(cm.at(1, 1) == 1);
  CHECK(cm.total() == 3);
  CHECK(cm.trace() == 2);
  CHECK(cm.accuracy() == doctest::Approx(2.0 / 3.0));
  const auto s = prf1(cm);
  CHECK(s[0].precision == 1.0);
  CHECK(s[0].recall == 0.5);
  CHECK(s[1].precision == 0.5);
  CHECK(s[1].recall == 1.0);
}

TEST_CASE("precision, recall and F1 from counts") {
  // Class 0: tp 8, fp 2, fn 1.
  ConfusionMatrix cm(4);
  for (int i = 0; i < 8; ++i) cm.add(0, 0);
  cm.add(1, 0);
  cm.add(2, 0);
  cm.add(0, 3);
  const auto s = prf1(cm);
  CHECK(s[0].precision == doctest::Approx(0.8));
  CHECK(s[0].recall == doctest::Approx(8.0 / 9.0));
  CHECK(s[0].f1 == doctest::Approx(16.0 / 19.0));
  CHECK_FALSE(s[0].precision_undefined);
}

TEST_CASE("0/0 ratios are flagged") {
  ConfusionMatrix cm(4);
  cm.add(0, 0);
  cm.add(1, 0);
  const auto s = prf1(cm);
  CHECK(s[1].recall == 0.0);
  CHECK_FALSE(s[1].recall_undefined);
  CHECK(s[1].precision_undefined);  // nothing predicted as class 1
  CHECK(s[1].f1 == 0.0);
  CHECK(s[2].precision_undefined);
  CHECK(s[2].recall_undefined);
  CHECK(s[2].f1_undefined);
  CHECK(s[2].precision == 0.0);
}

TEST_CASE("matrix invariants on random predictions") {
  std::mt19937 gen(4);
  std::uniform_int_distribution<std::size_t> cls(0, 3);
  std::vector<std::size_t> p(500), l(500);
  for (std::size_t i = 0; i < 500; ++i) {
    p[i] = cls(gen);
    l[i] = cls(gen);
  }
  const ConfusionMatrix cm = confusion_matrix(p, l);
  std::size_t rows = 0, cols = 0;
  for (std::size_t c = 0; c < 4; ++c) {
    rows += cm.row_sum(c);
    cols += cm.col_sum(c);
    CHECK(cm.row_sum(c) == static_cast<std::size_t>(std::count(l.begin(), l.end(), c)));
  }
  CHECK(rows == 500);
  CHECK(cols == 500);
}

TEST_CASE("binary AUC matches the pairwise oracle") {
  std::mt19937 gen(12);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5 + static_cast<std::size_t>(trial) * 3;
    std::uniform_int_distribution<int> coarse(0, 6);  // forces ties
    std::bernoulli_distribution coin(0.4);
    std::vector<double> scores(n);
    std::vector<bool> pos(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = trial % 2 ? coarse(gen) : std::generate_canonical<double, 53>(gen);
      pos[i] = coin(gen);
    }
    pos[0] = true;
    pos[1] = false;
    std::unique_ptr<bool[]> flags(new bool[n]);
    for (std::size_t i = 0; i < n; ++i) flags[i] = pos[i];
    const auto auc = binary_auc(scores, std::span<const bool>(flags.get(), n));
    REQUIRE(auc.has_value());
    CHECK(*auc == doctest::Approx(oracle::pairwise_auc(scores, pos)).epsilon(1e-12));
  }
}

TEST_CASE("AUC edge cases") {
  const std::vector<double> s = {0.1, 0.2, 0.3};
  const bool all_pos[] = {true, true, true};
  CHECK_FALSE(binary_auc(s, all_pos).has_value());
  const bool perfect[] = {false, false, true};
  CHECK(*binary_auc(s, perfect) == 1.0);
  const bool inverted[] = {true, false, false};
  CHECK(*binary_auc(s, inverted) == 0.0);
  const std::vector<double> flat = {0.5, 0.5, 0.5};
  CHECK(*binary_auc(flat, perfect) == 0.5);
}

TEST_CASE("random scores give AUC near one half") {
  std::mt19937 gen(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> scores(4000);
  std::unique_ptr<bool[]> pos(new bool[4000]);
  for (std::size_t i = 0; i < 4000; ++i) {
    scores[i] = u(gen);
    pos[i] = u(gen) < 0.5;
  }
  const double auc = *binary_auc(scores, std::span<const bool>(pos.get(), 4000));
  CHECK(std::abs(auc - 0.5) <= 0.05);
}

TEST_CASE("negating scores inverts AUC; permutation leaves it unchanged") {
  const auto scores = oracle::random_series(300, 3);
  std::vector<bool> pos(300);
  std::unique_ptr<bool[]> flags(new bool[300]);
  for (std::size_t i = 0; i < 300; ++i) flags[i] = pos[i] = scores[i] + 0.3 * std::sin(i) > 0.0;
  const std::span<const bool> fs(flags.get(), 300);
  const double auc = *binary_auc(scores, fs);

  std::vector<double> neg = scores;
  for (double& v : neg) v = -v;
  CHECK(*binary_auc(neg, fs) == doctest::Approx(1.0 - auc).epsilon(1e-12));

  std::vector<std::size_t> perm(300);
  for (std::size_t i = 0; i < 300; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), std::mt19937(5));
  std::vector<double> ps(300);
  std::unique_ptr<bool[]> pf(new bool[300]);
  for (std::size_t i = 0; i < 300; ++i) {
    ps[i] = scores[perm[i]];
    pf[i] = flags[perm[i]];
  }
  CHECK(*binary_auc(ps, std::span<const bool>(pf.get(), 300)) == doctest::Approx(auc).epsilon(1e-12));
}

TEST_CASE("one-vs-rest AUC skips absent classes") {
  const std::vector<std::vector<double>> probs = {
      {0.7, 0.1, 0.1, 0.1}, {0.2, 0.6, 0.1, 0.1}, {0.6, 0.2, 0.1, 0.1}, {0.1, 0.8, 0.05, 0.05}};
  const std::vector<std::size_t> labels = {0, 1, 0, 1};
  const AucResult r = roc_auc_ovr(probs, labels);
  CHECK(*r.per_class[0] == 1.0);
  CHECK(*r.per_class[1] == 1.0);
  CHECK_FALSE(r.per_class[2].has_value());
  CHECK_FALSE(r.per_class[3].has_value());
  CHECK(*r.macro == 1.0);
}

TEST_CASE("evaluate and JSON report") {
  const std::vector<std::vector<double>> probs = {
      {0.7, 0.1, 0.1, 0.1}, {0.25, 0.25, 0.25, 0.25}, {0.1, 0.1, 0.7, 0.1}, {0.1, 0.1, 0.1, 0.7}};
  const std::vector<std::size_t> labels = {0, 1, 2, 3};
  const EvalReport r = evaluate(probs, labels);
  CHECK(r.count == 4);
  CHECK(r.accuracy == doctest::Approx(0.75));  // the tie goes to class 0
  CHECK(r.mean_loss == doctest::Approx((3.0 * -std::log(0.7) - std::log(0.25)) / 4.0));

  const auto j = nlohmann::json::parse(report_to_json(r));
  CHECK(j["accuracy"].get<double>() == r.accuracy);
  CHECK(j["count"].get<int>() == 4);
  CHECK(j["per_class"].size() == 4);
  CHECK(j["per_class"].contains("Going Downstairs"));
  CHECK(j["per_class"]["Walking"]["recall"].get<double>() == 1.0);
  CHECK(j["confusion"][1][0].get<int>() == 1);
  CHECK(format_report(r).rfind("Accuracy: 75.00%", 0) == 0);
}

TEST_CASE("metrics errors") {
  const std::vector<std::size_t> a = {0, 1};
  const std::vector<std::size_t> b = {0};
  CHECK(code_of([&] { confusion_matrix(a, b); }) == ErrorCode::LengthMismatch);
  CHECK(code_of([] { confusion_matrix(std::vector<std::size_t>{}, std::vector<std::size_t>{}); }) ==
        ErrorCode::EmptyInput);
  CHECK(code_of([] { evaluate(std::vector<std::vector<double>>{}, std::vector<std::size_t>{}); }) ==
        ErrorCode::EmptyInput);
}
