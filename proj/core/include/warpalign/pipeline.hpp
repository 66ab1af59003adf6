#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "warpalign/dataset.hpp"
#include "warpalign/losses.hpp"
#include "warpalign/network.hpp"
#include "warpalign/warp.hpp"

namespace warpalign {

struct TrainConfig {
  std::size_t epochs = 25;
  std::size_t checkpoint_every = 5;
  double lr = 1e-3;
  // First epoch (1-based) in which signals are replaced by their warps.
  std::size_t substitution_start_epoch = 6;
  double validation_fraction = 0.2;
  std::vector<std::uint64_t> seeds{1, 2, 3};

  void validate() const;
};

/// Snapshot handed to the checkpoint observer.
struct CheckpointEvent {
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  const WarperNetwork* network = nullptr;
  std::span<const Series> working;  // training members at this point
  std::span<const std::size_t> training_indices;
};

using CheckpointObserver = std::function<void(const CheckpointEvent&)>;

struct ClassWarper {
  int label = 0;
  WarperNetwork network;
  std::vector<Series> warped_group;  // one entry per group member, dataset order
  // Working set (training members, possibly substituted) at the selected checkpoint.
  std::vector<Series> working_set;
  std::vector<std::size_t> training_indices;  // group positions of working_set entries
  std::vector<double> loss_history;  // mean training loss per epoch, selected restart
  std::uint64_t seed = 0;
  std::size_t epoch = 0;  // checkpoint epoch the network was taken from
  double validation_loss = 0.0;
};

/// The warp a network emits for one series, durations already normalized.
PiecewiseLinearWarp predict_warp(const WarperNetwork& net, const Series& series);

/// Per-signal training objective: mean final loss of the warped signal against
/// every other member of the working set.
struct SignalLoss {
  double loss = 0.0;
  double main = 0.0;
  Series warped;
  ParameterGradients grads;  // empty unless requested
};

SignalLoss signal_loss(const WarperNetwork& net, std::span<const Series> working, std::size_t index,
                       const LossConfig& loss_cfg, bool with_gradients);

/// Grouped training: each epoch visits the working set in order, updates the
/// network on one signal at a time and, from `substitution_start_epoch` on,
/// replaces the signal with its warp. Restarts over `train_cfg.seeds`; the
/// best checkpoint by held-out alignment loss wins.
ClassWarper train_class_warper(const ClassGroup& group, const NetConfig& net_cfg,
                               const TrainConfig& train_cfg, const LossConfig& loss_cfg,
                               const CheckpointObserver& observer = {});

/// Build a ClassWarper around an already trained network (for instance one
/// loaded from a checkpoint): the warped group is the network applied to the
/// group members.
ClassWarper make_class_warper(int label, WarperNetwork network, std::span<const Series> members);

Series infer_warp(const WarperNetwork& net, const Series& series);
Series infer_warp(const ClassWarper& warper, const Series& series);

Series warped_average(const ClassWarper& warper);

/// Sum over ordered pairs of squared Frobenius distances between series.
double mtsa_objective(std::span<const Series> series);

enum class ObjectiveForm { Matrix, Functional };

/// Same objective evaluated on `originals` warped by `warps`, either through
/// the soft warping matrix or by interpolating x(tau(t)) directly.
double mtsa_objective(std::span<const Series> originals,
                      std::span<const PiecewiseLinearWarp> warps, ObjectiveForm form);

}  // namespace warpalign
