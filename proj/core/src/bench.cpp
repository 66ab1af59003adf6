#include "warpalign/bench.hpp"

#include <algorithm>
#include <chrono>

#include "warpalign/baselines.hpp"
#include "warpalign/errors.hpp"

namespace warpalign {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TimingRow timing_bench(const LabeledDataset& train, const LabeledDataset& test, int label,
                       const NetConfig& net_cfg, const TrainConfig& train_cfg,
                       const LossConfig& loss_cfg, const BenchOptions& opts) {
  if (opts.repeat < 1) throw ConfigError("repeat must be >= 1");
  const auto groups = group_by_label(train);
  const auto it = std::find_if(groups.begin(), groups.end(),
                               [&](const ClassGroup& g) { return g.label == label; });
  if (it == groups.end()) throw ContractViolation("label " + std::to_string(label) + " not in dataset");
  const ClassGroup& group = *it;

  std::vector<double> train_s, test_s, whole_s, dba_s;
  for (std::size_t r = 0; r < opts.repeat; ++r) {
    auto start = Clock::now();
    const auto warper = train_class_warper(group, net_cfg, train_cfg, loss_cfg);
    train_s.push_back(seconds_since(start));

    start = Clock::now();
    for (const auto& item : test.items) {
      const auto warped = infer_warp(warper, item.series);
      (void)warped;
    }
    test_s.push_back(seconds_since(start));
    whole_s.push_back(train_s.back() + test_s.back());

    start = Clock::now();
    const auto bary = dba_average(group, opts.dba_max_iter, opts.dba_tol);
    (void)bary;
    for (const auto& item : test.items) {
      const auto nearest = dtw_distance_to_set(item.series, group.series);
      (void)nearest;
    }
    dba_s.push_back(seconds_since(start));
  }

  TimingRow row;
  row.name = train.name;
  row.label = label;
  row.n_train = group.size();
  row.our_train_s = median(train_s);
  row.our_test_s = median(test_s);
  row.our_whole_s = median(whole_s);
  row.dba_whole_s = median(dba_s);
  return row;
}

}  // namespace warpalign
