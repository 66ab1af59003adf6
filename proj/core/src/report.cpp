#include "warpalign/report.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "warpalign/errors.hpp"
#include "warpalign/metrics.hpp"

namespace warpalign {
namespace {

const std::vector<std::pair<std::string, std::optional<double> AccuracyRow::*>> kMethods = {
    {"base", &AccuracyRow::base},
    {"dtw", &AccuracyRow::dtw},
    {"dba", &AccuracyRow::dba},
    {"ours", &AccuracyRow::ours},
};

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

nlohmann::json json_value(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string format_number(double value) {
  std::ostringstream os;
  os << std::setprecision(10) << value;
  return os.str();
}

std::map<std::string, double> mpce_by_method(const std::vector<AccuracyRow>& rows) {
  std::map<std::string, double> out;
  if (rows.empty()) return out;
  for (const auto& [name, member] : kMethods) {
    std::vector<DatasetAccuracy> acc;
    for (const auto& row : rows) {
      if (!(row.*member)) break;
      acc.push_back({*(row.*member) / 100.0, std::max<std::size_t>(row.classes, 1)});
    }
    if (acc.size() == rows.size()) out[name] = mpce(acc);
  }
  return out;
}

std::string accuracy_table_csv(const std::vector<AccuracyRow>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < std::size(kAccuracyColumns); ++i) {
    os << (i ? "," : "") << kAccuracyColumns[i];
  }
  os << '\n';
  for (const auto& r : rows) {
    os << r.dataset << ',' << cell(r.base) << ',' << cell(r.dtw) << ',' << cell(r.dba) << ','
       << cell(r.ours) << ',' << cell(r.cs_org) << ',' << cell(r.cs_warp) << '\n';
  }
  if (rows.size() > 1) {
    const auto m = mpce_by_method(rows);
    os << "MPCE";
    for (const auto& [name, member] : kMethods) {
      const auto found = m.find(name);
      os << ',' << (found != m.end() ? format_number(found->second) : "");
    }
    os << ",,\n";
  }
  return os.str();
}

std::string accuracy_table_json(const std::vector<AccuracyRow>& rows,
                                const std::map<std::string, std::string>& provenance) {
  nlohmann::ordered_json j;
  j["columns"] = kAccuracyColumns;
  j["provenance"] = provenance;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["dataset"] = r.dataset;
    row["classes"] = r.classes;
    row["base"] = json_value(r.base);
    row["dtw"] = json_value(r.dtw);
    row["dba"] = json_value(r.dba);
    row["ours"] = json_value(r.ours);
    row["cs_org"] = json_value(r.cs_org);
    row["cs_warp"] = json_value(r.cs_warp);
    j["rows"].push_back(row);
  }
  if (rows.size() > 1) {
    nlohmann::ordered_json m;
    const auto values = mpce_by_method(rows);
    for (const auto& [name, member] : kMethods) {
      const auto found = values.find(name);
      m[name] = found != values.end() ? nlohmann::ordered_json(found->second)
                                      : nlohmann::ordered_json(nullptr);
    }
    j["mpce"] = m;
  }
  return j.dump(2) + "\n";
}

std::string timing_table_csv(const std::vector<TimingRow>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < std::size(kTimingColumns); ++i) {
    os << (i ? "," : "") << kTimingColumns[i];
  }
  os << '\n';
  for (const auto& r : rows) {
    os << r.name << ',' << r.label << ',' << r.n_train << ',' << format_number(r.our_train_s)
       << ',' << format_number(r.our_test_s) << ',' << format_number(r.our_whole_s) << ','
       << format_number(r.dba_whole_s) << '\n';
  }
  return os.str();
}

std::string timing_table_json(const std::vector<TimingRow>& rows,
                              const std::map<std::string, std::string>& provenance) {
  nlohmann::ordered_json j;
  j["columns"] = kTimingColumns;
  j["provenance"] = provenance;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"name", r.name},
                         {"label", r.label},
                         {"n_train", r.n_train},
                         {"our_train_s", r.our_train_s},
                         {"our_test_s", r.our_test_s},
                         {"our_whole_s", r.our_whole_s},
                         {"dba_whole_s", r.dba_whole_s}});
  }
  return j.dump(2) + "\n";
}

std::string long_format_csv(const std::vector<LongRow>& rows) {
  std::ostringstream os;
  os << "series_id,t,role,value\n";
  for (const auto& r : rows) {
    os << r.series_id << ',' << r.t << ',' << r.role << ',' << format_number(r.value) << '\n';
  }
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw FormatError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace warpalign
