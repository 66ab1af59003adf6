#pragma once

#include <cstddef>
#include <string>

#include "warpalign/dataset.hpp"
#include "warpalign/losses.hpp"
#include "warpalign/network.hpp"
#include "warpalign/pipeline.hpp"

namespace warpalign {

struct TimingRow {
  std::string name;
  int label = 0;
  std::size_t n_train = 0;
  double our_train_s = 0.0;
  double our_test_s = 0.0;
  double our_whole_s = 0.0;
  double dba_whole_s = 0.0;
};

struct BenchOptions {
  std::size_t repeat = 1;  // medians over repetitions
  std::size_t dba_max_iter = 10;
  double dba_tol = 1e-5;
};

/// Wall-clock comparison for one class: warper training plus warping every
/// test signal, against DBA averaging plus DTW from every test signal to the
/// class's training signals.
TimingRow timing_bench(const LabeledDataset& train, const LabeledDataset& test, int label,
                       const NetConfig& net_cfg, const TrainConfig& train_cfg,
                       const LossConfig& loss_cfg, const BenchOptions& opts = {});

}  // namespace warpalign
