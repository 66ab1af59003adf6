#include "warpalign/classify.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "warpalign/errors.hpp"

namespace warpalign {
namespace {

void require_nonempty(const LabeledDataset& train, const LabeledDataset& test) {
  if (train.empty() || test.empty()) throw ContractViolation("classification needs non-empty sets");
}

double squared_euclidean(const Series& a, const Series& b) {
  if (a.dims() != b.dims() || a.length() != b.length()) {
    throw ContractViolation("nearest neighbour needs equal-length series; equalize first");
  }
  double d = 0.0;
  const auto& x = a.values();
  const auto& y = b.values();
  for (std::size_t i = 0; i < x.size(); ++i) d += (x[i] - y[i]) * (x[i] - y[i]);
  return d;
}

template <class Distance>
Prediction nearest_neighbour(const LabeledDataset& train, const LabeledDataset& test,
                             Distance&& distance) {
  require_nonempty(train, test);
  Prediction p;
  p.predicted.reserve(test.size());
  for (const auto& item : test.items) {
    double best = std::numeric_limits<double>::infinity();
    int label = train.items.front().label;
    for (const auto& cand : train.items) {
      const double d = distance(item.series, cand.series);
      if (d < best) {
        best = d;
        label = cand.label;
      }
    }
    p.predicted.push_back(label);
  }
  p.accuracy = accuracy(p.predicted, test);
  return p;
}

}  // namespace

double accuracy(std::span<const int> predicted, const LabeledDataset& test) {
  if (predicted.size() != test.size() || test.empty()) {
    throw ContractViolation("accuracy: prediction count does not match the test set");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == test.items[i].label;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

Prediction classify_nn(const LabeledDataset& train, const LabeledDataset& test) {
  return nearest_neighbour(train, test, squared_euclidean);
}

Prediction classify_dtw_nn(const LabeledDataset& train, const LabeledDataset& test,
                           const DtwOptions& opts) {
  return nearest_neighbour(train, test, [&](const Series& a, const Series& b) {
    return dtw_distance(a.row(0), b.row(0), opts);
  });
}

DbaModel fit_dba(const LabeledDataset& train, std::size_t max_iter, double tol,
                 const DtwOptions& opts) {
  if (train.empty()) throw ContractViolation("fit_dba: empty training set");
  DbaModel model;
  for (const auto& group : group_by_label(train)) {
    model.barycenters.emplace(group.label, dba_average(group, max_iter, tol, opts).barycenter);
  }
  return model;
}

Prediction classify_dba_nn(const DbaModel& model, const LabeledDataset& test,
                           const DtwOptions& opts) {
  if (model.barycenters.empty() || test.empty()) {
    throw ContractViolation("classify_dba_nn: empty model or test set");
  }
  Prediction p;
  for (const auto& item : test.items) {
    double best = std::numeric_limits<double>::infinity();
    int label = model.barycenters.begin()->first;
    for (const auto& [cls, bary] : model.barycenters) {
      const double d = dtw_distance(item.series.row(0), bary.row(0), opts);
      if (d < best) {
        best = d;
        label = cls;
      }
    }
    p.predicted.push_back(label);
  }
  p.accuracy = accuracy(p.predicted, test);
  return p;
}

Prediction classify_dba_nn(const LabeledDataset& train, const LabeledDataset& test,
                           const DtwOptions& opts) {
  return classify_dba_nn(fit_dba(train, 10, 1e-5, opts), test, opts);
}

Prediction classify_ours(std::span<const ClassWarper> warpers, const LabeledDataset& test,
                         const LossConfig& loss_cfg) {
  if (warpers.empty() || test.empty()) throw ContractViolation("classify_ours: nothing to do");
  std::vector<const ClassWarper*> order;
  for (const auto& w : warpers) order.push_back(&w);
  std::sort(order.begin(), order.end(),
            [](const ClassWarper* a, const ClassWarper* b) { return a->label < b->label; });
  std::set<int> known;
  for (const auto* w : order) known.insert(w->label);
  for (const auto& item : test.items) {
    if (!known.contains(item.label)) {
      throw ContractViolation("no class warper for label " + std::to_string(item.label));
    }
  }
  std::vector<Series> averages;
  for (const auto* w : order) averages.push_back(warped_average(*w));

  Prediction p;
  for (const auto& item : test.items) {
    double best = std::numeric_limits<double>::infinity();
    int label = order.front()->label;
    for (std::size_t c = 0; c < order.size(); ++c) {
      const auto warped = infer_warp(*order[c], item.series);
      const double loss = series_loss(warped, averages[c], loss_cfg.epsilon);
      if (loss < best) {
        best = loss;
        label = order[c]->label;
      }
    }
    p.predicted.push_back(label);
  }
  p.accuracy = accuracy(p.predicted, test);
  return p;
}

}  // namespace warpalign
