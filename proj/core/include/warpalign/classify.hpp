#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "warpalign/baselines.hpp"
#include "warpalign/dataset.hpp"
#include "warpalign/losses.hpp"
#include "warpalign/pipeline.hpp"

namespace warpalign {

struct Prediction {
  std::vector<int> predicted;
  double accuracy = 0.0;
};

/// Euclidean 1-NN (lowest training index wins ties).
Prediction classify_nn(const LabeledDataset& train, const LabeledDataset& test);

Prediction classify_dtw_nn(const LabeledDataset& train, const LabeledDataset& test,
                           const DtwOptions& opts = {});

struct DbaModel {
  std::map<int, Series> barycenters;
};

DbaModel fit_dba(const LabeledDataset& train, std::size_t max_iter = 10, double tol = 1e-5,
                 const DtwOptions& opts = {});

Prediction classify_dba_nn(const DbaModel& model, const LabeledDataset& test,
                           const DtwOptions& opts = {});
Prediction classify_dba_nn(const LabeledDataset& train, const LabeledDataset& test,
                           const DtwOptions& opts = {});

/// Each test signal is warped by every class warper and scored against that
/// class's warped average; the lowest loss wins (lowest label on ties).
Prediction classify_ours(std::span<const ClassWarper> warpers, const LabeledDataset& test,
                         const LossConfig& loss_cfg);

double accuracy(std::span<const int> predicted, const LabeledDataset& test);

}  // namespace warpalign
