#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gait {

/// Rows are true classes, columns predicted classes, both in class-index
/// order (Going Downstairs, Going Upstairs, Stationary, Walking).
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t n_classes = 4)
      : n_(n_classes), counts_(n_classes * n_classes, 0) {}

  std::size_t classes() const { return n_; }
  std::size_t at(std::size_t truth, std::size_t pred) const { return counts_[truth * n_ + pred]; }
  void add(std::size_t truth, std::size_t pred) { ++counts_[truth * n_ + pred]; }

  std::size_t total() const;
  std::size_t trace() const;
  std::size_t row_sum(std::size_t truth) const;
  std::size_t col_sum(std::size_t pred) const;
  double accuracy() const;
  std::vector<std::vector<std::size_t>> rows() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t n_;
  std::vector<std::size_t> counts_;
};

ConfusionMatrix confusion_matrix(std::span<const std::size_t> preds,
                                 std::span<const std::size_t> labels,
                                 std::size_t n_classes = 4);

/// 0/0 ratios are reported as 0 with the matching `*_undefined` flag set.
struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

std::vector<ClassScores> prf1(const ConfusionMatrix& cm);

struct AucResult {
  std::vector<std::optional<double>> per_class;  // nullopt: no positives or no negatives
  std::optional<double> macro;
};

/// Binary AUC by the Mann-Whitney rank statistic with midranks for ties.
/// nullopt when either side is empty.
std::optional<double> binary_auc(std::span<const double> scores, std::span<const bool> positive);

/// One-vs-rest AUC per class using column c of `scores` as the score for c.
AucResult roc_auc_ovr(std::span<const std::vector<double>> scores,
                      std::span<const std::size_t> labels, std::size_t n_classes = 4);

struct EvalReport {
  ConfusionMatrix confusion{4};
  double accuracy = 0.0;
  std::vector<ClassScores> per_class;
  AucResult auc;
  double mean_loss = 0.0;
  std::size_t count = 0;
};

/// Full report from per-window probability vectors and true labels.
EvalReport evaluate(std::span<const std::vector<double>> probs, std::span<const std::size_t> labels);

/// `{ "accuracy", "macro_auc", "mean_loss", "count", "per_class": {label:
/// {precision, recall, f1, auc}}, "confusion": [[..]] }`.
std::string report_to_json(const EvalReport& report);

/// Human-readable summary: overall accuracy to two decimals, per-class rows
/// to one decimal.
std::string format_report(const EvalReport& report);

}  // namespace gait
