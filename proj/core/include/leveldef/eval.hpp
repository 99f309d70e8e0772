#ifndef LEVELDEF_EVAL_HPP
#define LEVELDEF_EVAL_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "leveldef/dtree.hpp"
#include "leveldef/rules.hpp"

namespace leveldef {

using ConfusionMatrix = std::array<std::array<std::int64_t, kLevelCount>, kLevelCount>;

struct PerClassMetrics {
  Level label = Level::A1;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool undefined = false;  // class absent from both gold and predictions
};

struct EvalReport {
  std::size_t n = 0;
  double accuracy = 0.0;
  double mae = 0.0;
  ConfusionMatrix confusion{};
  std::vector<PerClassMetrics> per_class;  // six entries, ordinal order
  /// Share of errors between neighboring levels; empty when there are no
  /// errors at all.
  std::optional<double> neighbor_error_share;
};

double accuracy(const std::vector<Level>& gold, const std::vector<Level>& pred);

/// Mean |ordinal(gold) - ordinal(pred)| with A1=0 .. C2=5.
double mae_ordinal(const std::vector<Level>& gold, const std::vector<Level>& pred);

/// Entry (i, j) counts items with gold ordinal i predicted as j.
ConfusionMatrix confusion_matrix(const std::vector<Level>& gold, const std::vector<Level>& pred);

std::vector<PerClassMetrics> prf_per_class(const ConfusionMatrix& confusion);

EvalReport evaluate(const std::vector<Level>& gold, const std::vector<Level>& pred);

/// Writes <prefix>.json (full report), <prefix>_confusion.csv and
/// <prefix>.txt (aligned rendering); byte-deterministic for equal inputs.
struct ReportFiles {
  std::string json_path;
  std::string confusion_csv_path;
  std::string text_path;
};
ReportFiles write_reports(const EvalReport& eval, const ImportanceReport* importance,
                          const ConsistencyReport* consistency, const std::string& out_dir,
                          const std::string& prefix = "eval_report");

std::string report_to_json(const EvalReport& eval, const ImportanceReport* importance,
                           const ConsistencyReport* consistency);
std::string confusion_to_csv(const ConfusionMatrix& confusion);
std::string report_to_text(const EvalReport& eval);

void write_importance_csv(const ImportanceReport& importance, const std::string& path);

}  // namespace leveldef

#endif
