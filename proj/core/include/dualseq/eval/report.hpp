#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace dualseq::eval {

/// Method names used in reports.
inline constexpr const char* kTextOnly = "text_only";
inline constexpr const char* kAsrTrained = "asr_trained";
inline constexpr const char* kFinetune = "finetune";
inline constexpr const char* kDualLc = "dual_Lc";
inline constexpr const char* kDualLcLs = "dual_LcLs";

struct ReportRow {
  std::string method;
  double pct = 0.0;
  double bleu = 0.0;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct ExperimentReport {
  std::string kind;  // table3 | table4 | table5 | all
  std::vector<ReportRow> rows;
  std::uint64_t seed = 0;
  std::string dims;       // "hidden=64 layers=2 embed=64 vocab=812"
  std::string corpus_id;  // hash of the corpus files
  std::string bleu_mode = "pooled";

  /// Throws ContractError if no row matches.
  double bleu(const std::string& method, double pct) const;
  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

/// Aligned table with columns method, data %, BLEU. Throws ContractError on
/// an empty report.
std::string render_table(const ExperimentReport& report);

/// '#'-prefixed metadata lines, then `method=<m> pct=<p> bleu=<b> seed=<s>`
/// per row. Numbers are written so that parsing restores them exactly.
std::string render_keyvalue(const ExperimentReport& report);

/// Inverse of render_keyvalue. Throws DataError on malformed lines.
ExperimentReport parse_keyvalue(std::istream& in);

void write_report(const std::filesystem::path& path, const ExperimentReport& report);
ExperimentReport read_report(const std::filesystem::path& path);

}  // namespace dualseq::eval
