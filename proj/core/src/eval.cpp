#include "leveldef/eval.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "leveldef/error.hpp"

namespace leveldef {

namespace {
void require_pair(const std::vector<Level>& gold, const std::vector<Level>& pred,
                  const char* op) {
  if (gold.size() != pred.size()) {
    throw Error(Errc::dimension_mismatch,
                std::string(op) + ": gold has " + std::to_string(gold.size()) +
                    " items, pred has " + std::to_string(pred.size()));
  }
  if (gold.empty()) {
    throw Error(Errc::degenerate_input, std::string(op) + ": empty label lists");
  }
}
}  // namespace

double accuracy(const std::vector<Level>& gold, const std::vector<Level>& pred) {
  require_pair(gold, pred, "accuracy");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == pred[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

double mae_ordinal(const std::vector<Level>& gold, const std::vector<Level>& pred) {
  require_pair(gold, pred, "mae_ordinal");
  std::int64_t total = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    total += std::abs(ordinal(gold[i]) - ordinal(pred[i]));
  }
  return static_cast<double>(total) / static_cast<double>(gold.size());
}

ConfusionMatrix confusion_matrix(const std::vector<Level>& gold, const std::vector<Level>& pred) {
  require_pair(gold, pred, "confusion_matrix");
  ConfusionMatrix m{};
  for (std::size_t i = 0; i < gold.size(); ++i) {
    m[static_cast<std::size_t>(ordinal(gold[i]))][static_cast<std::size_t>(ordinal(pred[i]))]++;
  }
  return m;
}

std::vector<PerClassMetrics> prf_per_class(const ConfusionMatrix& confusion) {
  std::vector<PerClassMetrics> out;
  for (int k = 0; k < kLevelCount; ++k) {
    std::int64_t row = 0, col = 0;
    for (int j = 0; j < kLevelCount; ++j) {
      row += confusion[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
      col += confusion[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
    }
    const auto diag = confusion[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)];
    PerClassMetrics m;
    m.label = static_cast<Level>(k);
    m.precision = col > 0 ? static_cast<double>(diag) / static_cast<double>(col) : 0.0;
    m.recall = row > 0 ? static_cast<double>(diag) / static_cast<double>(row) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    m.undefined = row == 0 && col == 0;
    out.push_back(m);
  }
  return out;
}

EvalReport evaluate(const std::vector<Level>& gold, const std::vector<Level>& pred) {
  EvalReport report;
  report.n = gold.size();
  report.accuracy = accuracy(gold, pred);
  report.mae = mae_ordinal(gold, pred);
  report.confusion = confusion_matrix(gold, pred);
  report.per_class = prf_per_class(report.confusion);
  std::int64_t off_diagonal = 0, neighbors = 0;
  for (int i = 0; i < kLevelCount; ++i) {
    for (int j = 0; j < kLevelCount; ++j) {
      if (i == j) continue;
      const auto c = report.confusion[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      off_diagonal += c;
      if (std::abs(i - j) == 1) neighbors += c;
    }
  }
  if (off_diagonal > 0) {
    report.neighbor_error_share =
        static_cast<double>(neighbors) / static_cast<double>(off_diagonal);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json consistency_to_json(const ConsistencyReport& c) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json overlaps = nlohmann::ordered_json::array();
  for (const OverlapFinding& o : c.overlaps) {
    nlohmann::ordered_json region = nlohmann::ordered_json::array();
    for (const IntervalConstraint& r : o.region) {
      region.push_back({{"descriptor", r.descriptor_id},
                        {"lower", r.lower ? nlohmann::ordered_json(*r.lower)
                                          : nlohmann::ordered_json("unbounded")},
                        {"upper", r.upper ? nlohmann::ordered_json(*r.upper)
                                          : nlohmann::ordered_json("unbounded")}});
    }
    overlaps.push_back(
        {{"a", level_name(o.a)}, {"b", level_name(o.b)}, {"region", std::move(region)}});
  }
  j["overlaps"] = std::move(overlaps);
  nlohmann::ordered_json empties = nlohmann::ordered_json::array();
  for (Level l : c.empty_definitions) empties.push_back(level_name(l));
  j["empty_definitions"] = std::move(empties);
  nlohmann::ordered_json vacuous = nlohmann::ordered_json::array();
  for (Level l : c.vacuous_definitions) vacuous.push_back(level_name(l));
  j["vacuous_definitions"] = std::move(vacuous);
  if (c.partition_checked) {
    j["partition"] = {{"pairwise_disjoint", c.pairwise_disjoint},
                      {"covers_space", c.covers_space},
                      {"coverage_samples", c.coverage_samples}};
  }
  if (!c.data_ranges.empty()) {
    nlohmann::ordered_json ranges = nlohmann::ordered_json::array();
    for (const auto& dr : c.data_ranges) {
      nlohmann::ordered_json rj;
      rj["label"] = level_name(dr.label);
      nlohmann::ordered_json rs = nlohmann::ordered_json::array();
      for (const IntervalConstraint& r : dr.ranges) {
        rs.push_back({{"descriptor", r.descriptor_id},
                      {"min", r.lower ? *r.lower : 0.0},
                      {"max", r.upper ? *r.upper : 0.0}});
      }
      rj["observed"] = std::move(rs);
      ranges.push_back(std::move(rj));
    }
    j["data_ranges"] = std::move(ranges);
  }
  return j;
}

}  // namespace

std::string report_to_json(const EvalReport& eval, const ImportanceReport* importance,
                           const ConsistencyReport* consistency) {
  nlohmann::ordered_json j;
  j["n"] = eval.n;
  j["accuracy"] = eval.accuracy;
  j["mae"] = eval.mae;
  if (eval.neighbor_error_share) {
    j["neighbor_error_share"] = *eval.neighbor_error_share;
  } else {
    j["neighbor_error_share"] = nullptr;
  }
  nlohmann::ordered_json confusion = nlohmann::ordered_json::array();
  for (const auto& row : eval.confusion) {
    confusion.push_back(std::vector<std::int64_t>(row.begin(), row.end()));
  }
  j["confusion"] = std::move(confusion);
  nlohmann::ordered_json per_class = nlohmann::ordered_json::array();
  for (const PerClassMetrics& m : eval.per_class) {
    per_class.push_back({{"label", level_name(m.label)},
                         {"precision", m.precision},
                         {"recall", m.recall},
                         {"f1", m.f1},
                         {"undefined", m.undefined}});
  }
  j["per_class"] = std::move(per_class);
  if (importance) {
    nlohmann::ordered_json imp = nlohmann::ordered_json::array();
    for (const ImportanceEntry& e : importance->entries) {
      imp.push_back({{"descriptor", e.descriptor_id},
                     {"importance", e.importance},
                     {"excluded", e.excluded}});
    }
    j["importance"] = std::move(imp);
    j["importance_no_splits"] = importance->no_splits;
  }
  if (consistency) {
    j["consistency"] = consistency_to_json(*consistency);
  }
  return j.dump(2) + "\n";
}

std::string confusion_to_csv(const ConfusionMatrix& confusion) {
  std::ostringstream out;
  out << "gold\\pred";
  for (Level l : kAllLevels) out << ',' << level_name(l);
  out << '\n';
  for (Level g : kAllLevels) {
    out << level_name(g);
    for (Level p : kAllLevels) {
      out << ','
          << confusion[static_cast<std::size_t>(ordinal(g))][static_cast<std::size_t>(ordinal(p))];
    }
    out << '\n';
  }
  return out.str();
}

std::string report_to_text(const EvalReport& eval) {
  std::ostringstream out;
  char buf[128];
  out << "confusion matrix (rows = gold, columns = predicted)\n";
  out << "        ";
  for (Level l : kAllLevels) {
    std::snprintf(buf, sizeof buf, "%6s", level_name(l));
    out << buf;
  }
  out << '\n';
  for (Level g : kAllLevels) {
    std::snprintf(buf, sizeof buf, "  %-6s", level_name(g));
    out << buf;
    for (Level p : kAllLevels) {
      std::snprintf(
          buf, sizeof buf, "%6lld",
          static_cast<long long>(
              eval.confusion[static_cast<std::size_t>(ordinal(g))]
                            [static_cast<std::size_t>(ordinal(p))]));
      out << buf;
    }
    out << '\n';
  }
  out << '\n';
  std::snprintf(buf, sizeof buf, "n         %zu\n", eval.n);
  out << buf;
  std::snprintf(buf, sizeof buf, "accuracy  %.4f\n", eval.accuracy);
  out << buf;
  std::snprintf(buf, sizeof buf, "mae       %.4f\n", eval.mae);
  out << buf;
  if (eval.neighbor_error_share) {
    std::snprintf(buf, sizeof buf, "neighbor-error share  %.4f\n", *eval.neighbor_error_share);
    out << buf;
  }
  out << '\n';
  out << "class   precision  recall      f1\n";
  for (const PerClassMetrics& m : eval.per_class) {
    std::snprintf(buf, sizeof buf, "%-6s  %9.4f  %6.4f  %6.4f%s\n", level_name(m.label),
                  m.precision, m.recall, m.f1, m.undefined ? "  (undefined)" : "");
    out << buf;
  }
  return out.str();
}

ReportFiles write_reports(const EvalReport& eval, const ImportanceReport* importance,
                          const ConsistencyReport* consistency, const std::string& out_dir,
                          const std::string& prefix) {
  std::filesystem::create_directories(out_dir);
  ReportFiles files;
  files.json_path = out_dir + "/" + prefix + ".json";
  files.confusion_csv_path = out_dir + "/" + prefix + "_confusion.csv";
  files.text_path = out_dir + "/" + prefix + ".txt";
  auto write = [](const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io, "cannot write report: " + path);
    out << content;
  };
  write(files.json_path, report_to_json(eval, importance, consistency));
  write(files.confusion_csv_path, confusion_to_csv(eval.confusion));
  write(files.text_path, report_to_text(eval));
  return files;
}

void write_importance_csv(const ImportanceReport& importance, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write importance report: " + path);
  out << "descriptor,importance,excluded\n";
  for (const ImportanceEntry& e : importance.entries) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", e.importance);
    out << e.descriptor_id << ',' << buf << ',' << (e.excluded ? "true" : "false") << '\n';
  }
}

}  // namespace leveldef
