#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "warpalign/series.hpp"

namespace warpalign {

struct LabeledItem {
  int label = 0;
  Series series;
};

struct LabeledDataset {
  std::string name;
  std::vector<LabeledItem> items;
  // Original label text, indexed in first-seen order. Empty when every label
  // token was already an integer.
  std::vector<std::string> label_tokens;

  std::size_t size() const noexcept { return items.size(); }
  bool empty() const noexcept { return items.empty(); }
  std::vector<int> labels() const;  // distinct, ascending
};

struct ClassGroup {
  int label = 0;
  std::vector<Series> series;

  std::size_t size() const noexcept { return series.size(); }
};

// UCR 2018 TSV: `label \t v1 \t v2 ...` per line. Trailing NaN fields are the
// archive's padding for variable-length series and are dropped.
LabeledDataset parse_ucr_tsv(const std::filesystem::path& path);
LabeledDataset parse_ucr_tsv(std::istream& in, std::string name);

/// Path of `<name>_TRAIN.tsv` / `<name>_TEST.tsv`, also looking in `<dir>/<name>/`.
std::filesystem::path ucr_split_path(const std::filesystem::path& dir, const std::string& name,
                                     const std::string& split);

Series shrink_series(const Series& series, std::size_t target_len, std::uint64_t seed);
Series grow_series(const Series& series, std::size_t target_len, std::uint64_t seed);

/// Resample every series to round-half-up(mean length).
LabeledDataset equalize_lengths(const LabeledDataset& dataset, std::uint64_t seed);

/// Same as above but to a caller-chosen length (used to bring a test split to
/// the training length).
LabeledDataset equalize_lengths_to(const LabeledDataset& dataset, std::size_t target_len,
                                   std::uint64_t seed);

std::size_t mean_length(const LabeledDataset& dataset);

std::vector<ClassGroup> group_by_label(const LabeledDataset& dataset);

}  // namespace warpalign
