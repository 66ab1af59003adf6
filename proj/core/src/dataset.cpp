#include "warpalign/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string_view>

#include "warpalign/errors.hpp"
#include "warpalign/rng.hpp"

namespace warpalign {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \r\t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \r\t");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view token) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || token.empty()) return std::nullopt;
  return value;
}

std::optional<int> parse_integer_label(std::string_view token) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  int value = 0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec == std::errc() && ptr == end && !token.empty()) return value;
  // "1.0000000e+00" style labels from older archive dumps.
  if (auto d = parse_double(token); d && std::isfinite(*d) && std::floor(*d) == *d &&
                                    std::abs(*d) < 1e9) {
    return static_cast<int>(*d);
  }
  return std::nullopt;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  while (!out.empty() && trim(out.back()).empty()) out.pop_back();
  return out;
}

std::uint64_t item_seed(std::uint64_t seed, std::size_t index) {
  return splitmix64(seed + 0x632be59bd9b4e019ULL * (index + 1));
}

}  // namespace

std::vector<int> LabeledDataset::labels() const {
  std::set<int> s;
  for (const auto& item : items) s.insert(item.label);
  return {s.begin(), s.end()};
}

LabeledDataset parse_ucr_tsv(std::istream& in, std::string name) {
  struct RawRow {
    std::string label;
    std::vector<double> values;
  };
  std::vector<RawRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_tabs(line);
    RawRow row;
    row.label = std::string(trim(fields.front()));
    if (row.label.empty()) throw ParseError(line_no, "missing label");
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const auto v = parse_double(fields[i]);
      if (!v) throw ParseError(line_no, "non-numeric value '" + std::string(trim(fields[i])) + "'");
      row.values.push_back(*v);
    }
    // Variable-length series are NaN padded at the end.
    while (!row.values.empty() && std::isnan(row.values.back())) row.values.pop_back();
    for (double v : row.values) {
      if (!std::isfinite(v)) throw ParseError(line_no, "non-finite value inside series");
    }
    if (row.values.size() < 2) {
      throw ParseError(line_no, "series needs at least 2 values, got " +
                                    std::to_string(row.values.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("dataset '" + name + "' is empty");

  LabeledDataset ds;
  ds.name = std::move(name);
  bool all_integer = true;
  std::vector<int> int_labels;
  for (const auto& r : rows) {
    const auto l = parse_integer_label(r.label);
    if (!l) {
      all_integer = false;
      break;
    }
    int_labels.push_back(*l);
  }
  std::map<std::string, int> dense;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    int label;
    if (all_integer) {
      label = int_labels[i];
    } else {
      auto [it, inserted] = dense.emplace(rows[i].label, static_cast<int>(dense.size()));
      if (inserted) ds.label_tokens.push_back(rows[i].label);
      label = it->second;
    }
    ds.items.push_back({label, Series::univariate(std::move(rows[i].values))});
  }
  return ds;
}

LabeledDataset parse_ucr_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  auto name = path.stem().string();
  for (const char* suffix : {"_TRAIN", "_TEST"}) {
    const std::string s(suffix);
    if (name.size() > s.size() && name.ends_with(s)) name.resize(name.size() - s.size());
  }
  return parse_ucr_tsv(in, name);
}

std::filesystem::path ucr_split_path(const std::filesystem::path& dir, const std::string& name,
                                     const std::string& split) {
  const auto file = name + "_" + split + ".tsv";
  const auto direct = dir / file;
  if (std::filesystem::exists(direct)) return direct;
  const auto nested = dir / name / file;
  if (std::filesystem::exists(nested)) return nested;
  return direct;
}

Series shrink_series(const Series& series, std::size_t target_len, std::uint64_t seed) {
  const auto n = series.length();
  if (target_len == n) return series;
  if (target_len > n || target_len < 2) {
    throw ContractViolation("shrink_series: need length > target >= 2");
  }
  auto rng = make_rng(seed, 0x5348524eULL);
  // Endpoints are never removed.
  const auto removed = sample_without_replacement(rng, 1, n - 1, n - target_len);
  std::vector<bool> drop(n, false);
  for (auto idx : removed) drop[idx] = true;
  std::vector<double> out;
  out.reserve(series.dims() * target_len);
  for (std::size_t r = 0; r < series.dims(); ++r) {
    const auto row = series.row(r);
    for (std::size_t t = 0; t < n; ++t) {
      if (!drop[t]) out.push_back(row[t]);
    }
  }
  return Series(series.dims(), target_len, std::move(out));
}

Series grow_series(const Series& series, std::size_t target_len, std::uint64_t seed) {
  if (target_len == series.length()) return series;
  if (target_len < series.length()) throw ContractViolation("grow_series: target below length");
  auto rng = make_rng(seed, 0x47524f57ULL);
  const auto dims = series.dims();
  std::vector<std::vector<double>> rows(dims);
  for (std::size_t r = 0; r < dims; ++r) {
    const auto row = series.row(r);
    rows[r].assign(row.begin(), row.end());
  }
  // Each round inserts at distinct gaps of the current series; more than one
  // round is only needed when growing past 2T - 1.
  while (rows.front().size() < target_len) {
    const auto len = rows.front().size();
    const auto count = std::min(target_len - len, len - 1);
    const auto gaps = sample_without_replacement(rng, 0, len - 1, count);
    for (auto& row : rows) {
      std::vector<double> next;
      next.reserve(len + count);
      std::size_t g = 0;
      for (std::size_t j = 0; j < len; ++j) {
        next.push_back(row[j]);
        if (g < gaps.size() && gaps[g] == j) {
          next.push_back(0.5 * (row[j] + row[j + 1]));
          ++g;
        }
      }
      row = std::move(next);
    }
  }
  std::vector<double> out;
  out.reserve(dims * target_len);
  for (const auto& row : rows) out.insert(out.end(), row.begin(), row.end());
  return Series(dims, target_len, std::move(out));
}

std::size_t mean_length(const LabeledDataset& dataset) {
  if (dataset.empty()) throw ContractViolation("mean_length of an empty dataset");
  std::size_t total = 0;
  for (const auto& item : dataset.items) total += item.series.length();
  // Round half up in integer arithmetic.
  const auto n = dataset.items.size();
  return (2 * total + n) / (2 * n);
}

LabeledDataset equalize_lengths_to(const LabeledDataset& dataset, std::size_t target_len,
                                   std::uint64_t seed) {
  LabeledDataset out;
  out.name = dataset.name;
  out.label_tokens = dataset.label_tokens;
  out.items.reserve(dataset.items.size());
  for (std::size_t i = 0; i < dataset.items.size(); ++i) {
    const auto& item = dataset.items[i];
    const auto len = item.series.length();
    const auto s = item_seed(seed, i);
    if (len > target_len) {
      out.items.push_back({item.label, shrink_series(item.series, target_len, s)});
    } else if (len < target_len) {
      out.items.push_back({item.label, grow_series(item.series, target_len, s)});
    } else {
      out.items.push_back(item);
    }
  }
  return out;
}

LabeledDataset equalize_lengths(const LabeledDataset& dataset, std::uint64_t seed) {
  return equalize_lengths_to(dataset, mean_length(dataset), seed);
}

std::vector<ClassGroup> group_by_label(const LabeledDataset& dataset) {
  std::map<int, ClassGroup> groups;
  for (const auto& item : dataset.items) {
    auto& g = groups[item.label];
    g.label = item.label;
    if (!g.series.empty()) {
      const auto& ref = g.series.front();
      if (ref.length() != item.series.length() || ref.dims() != item.series.dims()) {
        throw ContractViolation("group_by_label: label " + std::to_string(item.label) +
                                " mixes series shapes; equalize lengths first");
      }
    }
    g.series.push_back(item.series);
  }
  std::vector<ClassGroup> out;
  out.reserve(groups.size());
  for (auto& [label, g] : groups) out.push_back(std::move(g));
  return out;
}

}  // namespace warpalign
