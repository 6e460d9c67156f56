#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "dualgnn/errors.hpp"

namespace dualgnn {

// 2x2 confusion matrix, rows = true class, columns = predicted class.
struct Confusion {
  std::array<std::array<std::size_t, 2>, 2> m{};

  std::size_t total() const { return m[0][0] + m[0][1] + m[1][0] + m[1][1]; }
  std::size_t support(int c) const { return m[static_cast<std::size_t>(c)][0] + m[static_cast<std::size_t>(c)][1]; }
  std::size_t predicted(int c) const { return m[0][static_cast<std::size_t>(c)] + m[1][static_cast<std::size_t>(c)]; }
  std::size_t correct(int c) const { return m[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)]; }
};

inline Confusion confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) throw ShapeError("confusion: label/prediction length mismatch");
  Confusion c;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1)) throw ValidationError("confusion: labels must be 0 or 1");
    ++c.m[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
  }
  return c;
}

struct ClassificationMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

// Support-weighted precision/recall/F1 over both classes. A class that is
// never predicted has precision 0. Weighted recall equals accuracy.
inline ClassificationMetrics classification_metrics(const Confusion& c) {
  ClassificationMetrics r;
  r.support = c.total();
  if (r.support == 0) throw EmptyResultError("classification_metrics: no samples");
  const double n = static_cast<double>(r.support);
  r.accuracy = static_cast<double>(c.correct(0) + c.correct(1)) / n;
  for (int k = 0; k < 2; ++k) {
    const double sup = static_cast<double>(c.support(k));
    if (sup == 0.0) continue;
    const double tp = static_cast<double>(c.correct(k));
    const double pred = static_cast<double>(c.predicted(k));
    const double prec = pred > 0.0 ? tp / pred : 0.0;
    const double rec = tp / sup;
    const double f1 = (prec + rec) > 0.0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
    const double w = sup / n;
    r.precision += w * prec;
    r.recall += w * rec;
    r.f1 += w * f1;
  }
  return r;
}

inline ClassificationMetrics classification_metrics(std::span<const int> y_true, std::span<const int> y_pred) {
  return classification_metrics(confusion(y_true, y_pred));
}

struct MetricsReport {
  ClassificationMetrics graph;
  ClassificationMetrics node;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation across folds
};

inline MeanStd mean_std(std::span<const double> v) {
  MeanStd r;
  if (v.empty()) return r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(s / static_cast<double>(v.size()));
  return r;
}

struct AggregateMetrics {
  MeanStd accuracy, precision, recall, f1;
};

struct AggregateReport {
  AggregateMetrics graph;
  AggregateMetrics node;
};

inline AggregateReport aggregate(std::span<const MetricsReport> folds) {
  auto level = [&](auto select) {
    std::vector<double> acc, prec, rec, f1;
    for (const auto& f : folds) {
      const ClassificationMetrics& m = select(f);
      acc.push_back(m.accuracy);
      prec.push_back(m.precision);
      rec.push_back(m.recall);
      f1.push_back(m.f1);
    }
    return AggregateMetrics{mean_std(acc), mean_std(prec), mean_std(rec), mean_std(f1)};
  };
  AggregateReport r;
  r.graph = level([](const MetricsReport& m) -> const ClassificationMetrics& { return m.graph; });
  r.node = level([](const MetricsReport& m) -> const ClassificationMetrics& { return m.node; });
  return r;
}

}  // namespace dualgnn
