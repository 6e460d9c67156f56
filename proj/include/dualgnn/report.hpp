#pragma once

// Report emitters. Schemas are documented in docs/reports.md; numbers are
// written with round-trip precision so reruns compare byte for byte.

#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dualgnn/metrics.hpp"
#include "dualgnn/netdyn.hpp"
#include "dualgnn/train.hpp"

namespace dualgnn::report {

using ojson = nlohmann::ordered_json;

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

inline ojson to_json(const ClassificationMetrics& m) {
  return ojson{{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall},
               {"f1", m.f1},             {"support", m.support}};
}

inline ojson to_json(const MetricsReport& r) { return ojson{{"graph", to_json(r.graph)}, {"node", to_json(r.node)}}; }

inline ojson to_json(const MeanStd& m) { return ojson{{"mean", m.mean}, {"std", m.std}}; }

inline ojson to_json(const AggregateMetrics& m) {
  return ojson{{"accuracy", to_json(m.accuracy)},
               {"precision", to_json(m.precision)},
               {"recall", to_json(m.recall)},
               {"f1", to_json(m.f1)}};
}

inline ojson to_json(const AggregateReport& r) { return ojson{{"graph", to_json(r.graph)}, {"node", to_json(r.node)}}; }

inline ojson history_json(const std::vector<EpochRecord>& h) {
  ojson a = ojson::array();
  for (const auto& e : h)
    a.push_back(ojson{{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"train_graph_acc", e.train_graph_acc},
                      {"train_node_acc", e.train_node_acc},
                      {"val_loss", std::isfinite(e.val_loss) ? ojson(e.val_loss) : ojson(nullptr)},
                      {"val_graph_acc", std::isfinite(e.val_graph_acc) ? ojson(e.val_graph_acc) : ojson(nullptr)},
                      {"val_node_acc", std::isfinite(e.val_node_acc) ? ojson(e.val_node_acc) : ojson(nullptr)}});
  return a;
}

inline ojson fold_json(const FoldResult& f) {
  return ojson{{"name", f.name},
               {"n_train", f.n_train},
               {"n_val", f.n_val},
               {"n_test", f.n_test},
               {"normalizer_checksum", f.normalizer_checksum},
               {"class_weights_node", f.node_weights},
               {"class_weights_graph", f.graph_weights},
               {"best_epoch", f.best_epoch},
               {"warnings", f.warnings},
               {"test", to_json(f.test)}};
}

inline ojson cv_json(const CvResult& r) {
  ojson folds = ojson::array();
  for (const auto& f : r.folds) folds.push_back(fold_json(f));
  return ojson{{"format", "dualgnn-cv"},
               {"version", 1},
               {"mode", r.mode},
               {"n_folds", r.folds.size()},
               {"aggregate", to_json(r.aggregate)},
               {"folds", folds}};
}

// Markdown table: one row per metric, graph and node columns as mean +- std.
inline std::string metrics_table(const AggregateReport& r, const std::string& title) {
  std::string out = "## " + title + "\n\n| Metric | Graph-level | Node-level |\n|---|---|---|\n";
  auto cell = [](const MeanStd& m) { return fixed(m.mean, 4) + " ± " + fixed(m.std, 4); };
  const std::pair<const char*, MeanStd AggregateMetrics::*> rows[] = {{"Accuracy", &AggregateMetrics::accuracy},
                                                                      {"Precision", &AggregateMetrics::precision},
                                                                      {"Recall", &AggregateMetrics::recall},
                                                                      {"F1", &AggregateMetrics::f1}};
  for (const auto& [name, field] : rows)
    out += std::string("| ") + name + " | " + cell(r.graph.*field) + " | " + cell(r.node.*field) + " |\n";
  return out;
}

inline const char* kTrialCsvHeader =
    "trial,learning_rate,hidden_dim,alpha,dropout,best_val_loss,best_epoch,val_graph_acc,val_node_acc,status\n";

inline std::string trials_csv(const SearchResult& r) {
  std::string out = kTrialCsvHeader;
  for (const auto& t : r.trials)
    out += std::to_string(t.trial) + "," + num(t.learning_rate) + "," + std::to_string(t.hidden_dim) + "," +
           num(t.alpha) + "," + num(t.dropout) + "," + num(t.best_val_loss) + "," + std::to_string(t.best_epoch) + "," +
           num(t.val_graph_acc) + "," + num(t.val_node_acc) + "," + t.status + "\n";
  return out;
}

inline const char* kAblationCsvHeader =
    "arm,groups,graph_features,graph_accuracy,graph_precision,graph_recall,graph_f1,"
    "node_accuracy,node_precision,node_recall,node_f1\n";

inline std::string ablation_row(const AblationArm& a) {
  const auto& g = a.test.graph;
  const auto& n = a.test.node;
  return a.name + "," + a.groups.describe() + "," + (a.graph_features ? "1" : "0") + "," + num(g.accuracy) + "," +
         num(g.precision) + "," + num(g.recall) + "," + num(g.f1) + "," + num(n.accuracy) + "," + num(n.precision) +
         "," + num(n.recall) + "," + num(n.f1) + "\n";
}

inline std::string ablation_csv(const AblationResult& r) {
  std::string out = kAblationCsvHeader;
  for (const auto& a : r.arms) out += ablation_row(a);
  return out;
}

inline ojson ablation_json(const AblationResult& r) {
  auto arm = [](const AblationArm& a) {
    return ojson{{"name", a.name}, {"groups", a.groups.describe()}, {"graph_features", a.graph_features},
                 {"test", to_json(a.test)}};
  };
  ojson arms = ojson::array();
  for (const auto& a : r.arms) arms.push_back(arm(a));
  return ojson{{"format", "dualgnn-ablation"}, {"version", 1}, {"mode", r.mode}, {"base", arm(r.base)}, {"arms", arms}};
}

// Grouped bar chart of graph- and node-level test accuracy per arm.
inline std::string ablation_svg(const AblationResult& r) {
  const double bar = 18.0, gap = 24.0, left = 50.0, top = 30.0, height = 200.0;
  const double group_w = 2.0 * bar + gap;
  const double width = left + group_w * static_cast<double>(r.arms.size()) + 20.0;
  std::string out;
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                width, top + height + 140.0, width, top + height + 140.0);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.1f\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">Ablation (%s): test accuracy</text>\n",
                left, r.mode.c_str());
  out += buf;
  for (int k = 0; k <= 4; ++k) {
    const double y = top + height * (1.0 - k / 4.0);
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"#ddd\"/>"
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">%.2f</text>\n",
                  left, y, width - 10.0, y, left - 4.0, y + 3.0, k / 4.0);
    out += buf;
  }
  for (std::size_t i = 0; i < r.arms.size(); ++i) {
    const auto& a = r.arms[i];
    const double x0 = left + gap / 2.0 + group_w * static_cast<double>(i);
    const double vals[2] = {a.test.graph.accuracy, a.test.node.accuracy};
    const char* colors[2] = {"#1f77b4", "#ff7f0e"};
    for (int b = 0; b < 2; ++b) {
      const double h = height * std::clamp(vals[b], 0.0, 1.0);
      std::snprintf(buf, sizeof(buf), "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"%s\"/>\n",
                    x0 + b * bar, top + height - h, bar, h, colors[b]);
      out += buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "<text transform=\"translate(%.1f,%.1f) rotate(40)\" font-family=\"sans-serif\" "
                  "font-size=\"10\">%s</text>\n",
                  x0, top + height + 12.0, a.name.c_str());
    out += buf;
  }
  std::snprintf(buf, sizeof(buf),
                "<rect x=\"%.1f\" y=\"%.1f\" width=\"10\" height=\"10\" fill=\"#1f77b4\"/>"
                "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\">graph</text>"
                "<rect x=\"%.1f\" y=\"%.1f\" width=\"10\" height=\"10\" fill=\"#ff7f0e\"/>"
                "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\">node</text>\n",
                width - 120.0, 8.0, width - 106.0, 17.0, width - 65.0, 8.0, width - 51.0, 17.0);
  out += buf;
  out += "</svg>\n";
  return out;
}

// Rows are the four network metrics, columns the consecutive windows.
inline std::string dynamics_csv(const std::vector<DynamicsRow>& rows) {
  std::string out = "metric";
  for (const auto& r : rows) out += ",W" + std::to_string(r.window_index + 1);
  out += "\n";
  const std::pair<const char*, double WindowNetworkMetrics::*> metrics[] = {
      {"Density", &WindowNetworkMetrics::density},
      {"Average Clustering", &WindowNetworkMetrics::avg_clustering},
      {"Average SOZ degree", &WindowNetworkMetrics::avg_soz_degree},
      {"Average SOZ PLV", &WindowNetworkMetrics::avg_soz_plv}};
  for (const auto& [name, field] : metrics) {
    out += name;
    for (const auto& r : rows) out += "," + fixed(r.metrics.*field, 6);
    out += "\n";
  }
  return out;
}

}  // namespace dualgnn::report
