#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "warpalign/bench.hpp"

namespace warpalign {

enum class ReportFormat { Csv, Json };

/// One dataset row of the accuracy table. Accuracies are percentages; a
/// method that was not run is left empty.
struct AccuracyRow {
  std::string dataset;
  std::size_t classes = 0;
  std::optional<double> base;
  std::optional<double> dtw;
  std::optional<double> dba;
  std::optional<double> ours;
  std::optional<double> cs_org;
  std::optional<double> cs_warp;
};

inline constexpr const char* kAccuracyColumns[] = {"dataset", "base", "dtw", "dba",
                                                   "ours",    "cs_org", "cs_warp"};
inline constexpr const char* kTimingColumns[] = {"name",        "label",       "n_train",
                                                 "our_train_s", "our_test_s",  "our_whole_s",
                                                 "dba_whole_s"};

/// MPCE per method over the given rows; only methods present in every row are reported.
std::map<std::string, double> mpce_by_method(const std::vector<AccuracyRow>& rows);

std::string accuracy_table_csv(const std::vector<AccuracyRow>& rows);
std::string accuracy_table_json(const std::vector<AccuracyRow>& rows,
                                const std::map<std::string, std::string>& provenance = {});

std::string timing_table_csv(const std::vector<TimingRow>& rows);
std::string timing_table_json(const std::vector<TimingRow>& rows,
                              const std::map<std::string, std::string>& provenance = {});

/// Long-format plot data: `series_id,t,role,value`.
struct LongRow {
  std::string series_id;
  std::size_t t = 0;
  std::string role;
  double value = 0.0;
};
std::string long_format_csv(const std::vector<LongRow>& rows);

/// Write through a sibling temporary file and rename into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string format_number(double value);

}  // namespace warpalign
