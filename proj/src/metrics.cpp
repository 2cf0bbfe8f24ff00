#include "gaitml/metrics.hpp"

#include <algorithm>
#include <memory>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

#include "gaitml/dataset.hpp"
#include "gaitml/error.hpp"
#include "gaitml/model.hpp"

namespace gait {

std::size_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t t = 0;
  for (std::size_t i = 0; i < n_; ++i) t += at(i, i);
  return t;
}

std::size_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::size_t s = 0;
  for (std::size_t j = 0; j < n_; ++j) s += at(truth, j);
  return s;
}

std::size_t ConfusionMatrix::col_sum(std::size_t pred) const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < n_; ++i) s += at(i, pred);
  return s;
}

double ConfusionMatrix::accuracy() const {
  const std::size_t n = total();
  return n == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(n);
}

std::vector<std::vector<std::size_t>> ConfusionMatrix::rows() const {
  std::vector<std::vector<std::size_t>> out(n_, std::vector<std::size_t>(n_));
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) out[i][j] = at(i, j);
  }
  return out;
}

ConfusionMatrix confusion_matrix(std::span<const std::size_t> preds,
                                 std::span<const std::size_t> labels, std::size_t n_classes) {
  if (preds.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("{} predictions vs {} labels", preds.size(), labels.size()));
  }
  if (preds.empty()) throw Error(ErrorCode::EmptyInput, "no predictions to score");
  ConfusionMatrix cm(n_classes);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] >= n_classes || labels[i] >= n_classes) {
      throw Error(ErrorCode::InvalidValue, fmt::format("class index out of range at {}", i));
    }
    cm.add(labels[i], preds[i]);
  }
  return cm;
}

std::vector<ClassScores> prf1(const ConfusionMatrix& cm) {
  std::vector<ClassScores> out(cm.classes());
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    const auto tp = static_cast<double>(cm.at(c, c));
    const auto predicted = static_cast<double>(cm.col_sum(c));
    const auto support = static_cast<double>(cm.row_sum(c));
    ClassScores& s = out[c];
    if (predicted > 0) s.precision = tp / predicted; else s.precision_undefined = true;
    if (support > 0) s.recall = tp / support; else s.recall_undefined = true;
    if (s.precision + s.recall > 0.0) {
      s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
    } else {
      s.f1_undefined = true;
    }
  }
  return out;
}

std::optional<double> binary_auc(std::span<const double> scores, std::span<const bool> positive) {
  if (scores.size() != positive.size()) {
    throw Error(ErrorCode::LengthMismatch, "scores and flags differ in length");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1 .. j
    for (std::size_t t = i; t < j; ++t) {
      if (positive[order[t]]) {
        rank_sum += midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const double np = static_cast<double>(n_pos);
  const double u = rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

AucResult roc_auc_ovr(std::span<const std::vector<double>> scores,
                      std::span<const std::size_t> labels, std::size_t n_classes) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "scores and labels differ in length");
  }
  AucResult r;
  double sum = 0.0;
  std::size_t defined = 0;
  std::vector<double> column(scores.size());
  std::unique_ptr<bool[]> pos(new bool[scores.size()]);
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i].size() != n_classes) {
        throw Error(ErrorCode::DimensionMismatch, "score vector has wrong length");
      }
      column[i] = scores[i][c];
      pos[i] = labels[i] == c;
    }
    auto auc = binary_auc(column, std::span<const bool>(pos.get(), scores.size()));
    if (auc) {
      sum += *auc;
      ++defined;
    }
    r.per_class.push_back(auc);
  }
  if (defined > 0) r.macro = sum / static_cast<double>(defined);
  return r;
}

EvalReport evaluate(std::span<const std::vector<double>> probs, std::span<const std::size_t> labels) {
  if (probs.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "probabilities and labels differ in length");
  }
  if (probs.empty()) throw Error(ErrorCode::EmptyInput, "nothing to evaluate");
  const std::size_t n_classes = probs.front().size();
  std::vector<std::size_t> preds(probs.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    preds[i] = argmax(probs[i]);
    loss += loss_ce(probs[i], labels[i]);
  }
  EvalReport r;
  r.confusion = confusion_matrix(preds, labels, n_classes);
  r.accuracy = r.confusion.accuracy();
  r.per_class = prf1(r.confusion);
  r.auc = roc_auc_ovr(probs, labels, n_classes);
  r.mean_loss = loss / static_cast<double>(probs.size());
  r.count = probs.size();
  return r;
}

std::string report_to_json(const EvalReport& report) {
  using nlohmann::ordered_json;
  auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  ordered_json j;
  j["accuracy"] = report.accuracy;
  j["macro_auc"] = opt(report.auc.macro);
  j["mean_loss"] = report.mean_loss;
  j["count"] = report.count;
  ordered_json per_class = ordered_json::object();
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const ClassScores& s = report.per_class[c];
    per_class[std::string(display_name(label_from_index(c)))] = {
        {"precision", s.precision},
        {"recall", s.recall},
        {"f1", s.f1},
        {"auc", opt(report.auc.per_class[c])}};
  }
  j["per_class"] = std::move(per_class);
  j["confusion"] = report.confusion.rows();
  return j.dump(2) + "\n";
}

std::string format_report(const EvalReport& report) {
  std::string out = fmt::format("Accuracy: {:.2f}%  (n = {}, loss {:.4f}", 100.0 * report.accuracy,
                                report.count, report.mean_loss);
  if (report.auc.macro) out += fmt::format(", macro AUC {:.2f}", *report.auc.macro);
  out += ")\n";
  out += fmt::format("{:<18}", "");
  for (std::size_t c = 0; c < report.confusion.classes(); ++c) {
    out += fmt::format("{:>18}", display_name(label_from_index(c)));
  }
  out += fmt::format("{:>8}\n", "F1");
  for (std::size_t r = 0; r < report.confusion.classes(); ++r) {
    out += fmt::format("{:<18}", display_name(label_from_index(r)));
    const double support = static_cast<double>(report.confusion.row_sum(r));
    for (std::size_t c = 0; c < report.confusion.classes(); ++c) {
      const double pct = support > 0 ? 100.0 * static_cast<double>(report.confusion.at(r, c)) / support : 0.0;
      out += fmt::format("{:>17.1f}%", pct);
    }
    out += fmt::format("{:>8.2f}\n", report.per_class[r].f1);
  }
  return out;
}

}  // namespace gait
