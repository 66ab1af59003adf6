#include "warpalign/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "warpalign/errors.hpp"
#include "warpalign/rng.hpp"

namespace warpalign {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (checkpoint_every < 1 || checkpoint_every > epochs) {
    throw ConfigError("checkpoint_every must lie in [1, epochs]");
  }
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must lie in [0, 1)");
  }
  if (substitution_start_epoch < 1) throw ConfigError("substitution_start_epoch must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("learning rate must be positive");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
}

PiecewiseLinearWarp predict_warp(const WarperNetwork& net, const Series& series) {
  PiecewiseLinearWarp warp;
  std::vector<double> raw;
  net.predict(series, warp.slopes, raw);
  warp.length = series.length();
  warp.durations = normalize_durations(raw, warp.length);
  return warp;
}

Series infer_warp(const WarperNetwork& net, const Series& series) {
  const auto warp = predict_warp(net, series);
  return apply_warp(build_soft_matrix(warp, series.length()), series);
}

Series infer_warp(const ClassWarper& warper, const Series& series) {
  return infer_warp(warper.network, series);
}

SignalLoss signal_loss(const WarperNetwork& net, std::span<const Series> working, std::size_t index,
                       const LossConfig& loss_cfg, bool with_gradients) {
  if (working.size() < 2) throw ContractViolation("signal_loss needs at least 2 series");
  if (index >= working.size()) throw ContractViolation("signal index out of range");
  const Series& x = working[index];
  const auto T = x.length();

  ForwardResult fwd;
  if (with_gradients) {
    fwd = net.forward(x);
  } else {
    net.predict(x, fwd.slopes, fwd.raw_durations);
  }
  PiecewiseLinearWarp warp{fwd.slopes, normalize_durations(fwd.raw_durations, T), T};
  const auto w = build_soft_matrix(warp, T);

  SignalLoss out;
  out.warped = apply_warp(w, x);
  const auto dims = x.dims();
  const double others = static_cast<double>(working.size() - 1);
  std::vector<double> upstream(with_gradients ? dims * T : 0, 0.0);
  std::vector<double> row_grad(T);
  double main_total = 0.0;
  for (std::size_t j = 0; j < working.size(); ++j) {
    if (j == index) continue;
    const Series& y = working[j];
    if (y.dims() != dims || y.length() != T) {
      throw ContractViolation("working set members differ in shape");
    }
    for (std::size_t r = 0; r < dims; ++r) {
      if (with_gradients) {
        main_total += signed_square_loss_grad(out.warped.row(r), y.row(r), loss_cfg.epsilon, row_grad);
        const double scale = 1.0 / (others * static_cast<double>(dims));
        for (std::size_t t = 0; t < T; ++t) upstream[r * T + t] += scale * row_grad[t];
      } else {
        main_total += signed_square_loss(out.warped.row(r), y.row(r), loss_cfg.epsilon);
      }
    }
  }
  out.main = main_total / (others * static_cast<double>(dims));
  out.loss = out.main + loss_cfg.lambda2 * penalization(warp.slopes, loss_cfg.lambda1);
  if (!with_gradients) return out;

  const auto wg = soft_warp_backward(warp, x, Series(dims, T, std::move(upstream)));
  auto g_slopes = penalization_grad(warp.slopes, loss_cfg.lambda1);
  for (std::size_t k = 0; k < g_slopes.size(); ++k) {
    g_slopes[k] = loss_cfg.lambda2 * g_slopes[k] + wg.slopes[k];
  }
  const auto g_raw = normalize_durations_backward(fwd.raw_durations, T, wg.durations);
  out.grads = net.backward(fwd.tape, g_slopes, g_raw);
  return out;
}

namespace {

double held_out_loss(const WarperNetwork& net, std::span<const Series> held_out,
                     std::span<const Series> working, double epsilon) {
  double total = 0.0;
  for (const auto& v : held_out) {
    const auto warped = infer_warp(net, v);
    double acc = 0.0;
    for (const auto& y : working) acc += series_loss(warped, y, epsilon);
    total += acc / static_cast<double>(working.size());
  }
  return total / static_cast<double>(held_out.size());
}

struct Snapshot {
  WarperNetwork network;
  std::vector<Series> working;
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> val_idx;
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  double validation = std::numeric_limits<double>::infinity();
  std::vector<double> history;
};

}  // namespace

ClassWarper train_class_warper(const ClassGroup& group, const NetConfig& net_cfg,
                               const TrainConfig& train_cfg, const LossConfig& loss_cfg,
                               const CheckpointObserver& observer) {
  train_cfg.validate();
  loss_cfg.validate();
  const auto N = group.size();
  if (N < 2) throw ContractViolation("training needs a group of at least 2 series");
  for (const auto& s : group.series) {
    if (s.length() != group.series.front().length() || s.dims() != group.series.front().dims()) {
      throw ContractViolation("training group members must share one shape");
    }
  }
  NetConfig cfg = net_cfg;
  if (cfg.input_len == 0) cfg.input_len = group.series.front().length();
  if (cfg.input_len != group.series.front().length() || cfg.input_dim != group.series.front().dims()) {
    throw ContractViolation("network input shape does not match the training group");
  }

  std::size_t n_val = static_cast<std::size_t>(std::floor(train_cfg.validation_fraction * N));
  n_val = std::min(n_val, N - 2);

  std::optional<Snapshot> best;
  for (const auto seed : train_cfg.seeds) {
    auto rng = make_rng(seed, 0x56414c49ULL);
    const auto val_idx = sample_without_replacement(rng, 0, N, n_val);
    std::vector<std::size_t> train_idx;
    std::vector<Series> working;
    std::vector<Series> held_out;
    for (std::size_t i = 0, v = 0; i < N; ++i) {
      if (v < val_idx.size() && val_idx[v] == i) {
        held_out.push_back(group.series[i]);
        ++v;
      } else {
        train_idx.push_back(i);
        working.push_back(group.series[i]);
      }
    }

    WarperNetwork net(cfg, seed);
    std::vector<double> history;
    std::optional<Snapshot> restart_best;
    for (std::size_t epoch = 1; epoch <= train_cfg.epochs; ++epoch) {
      const bool substitute = epoch >= train_cfg.substitution_start_epoch;
      double epoch_loss = 0.0;
      for (std::size_t i = 0; i < working.size(); ++i) {
        auto sl = signal_loss(net, working, i, loss_cfg, true);
        if (!std::isfinite(sl.loss)) {
          throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", signal " +
                              std::to_string(train_idx[i]) + " (seed " + std::to_string(seed) +
                              ")");
        }
        net.step(sl.grads, train_cfg.lr);
        if (substitute) working[i] = std::move(sl.warped);
        epoch_loss += sl.loss;
      }
      history.push_back(epoch_loss / static_cast<double>(working.size()));

      const bool checkpoint =
          epoch % train_cfg.checkpoint_every == 0 || epoch == train_cfg.epochs;
      if (!checkpoint) continue;
      const double val = held_out.empty()
                             ? history.back()
                             : held_out_loss(net, held_out, working, loss_cfg.epsilon);
      if (observer) observer({seed, epoch, history.back(), val, &net, working, train_idx});
      if (!restart_best || val < restart_best->validation) {
        restart_best = Snapshot{net, working, train_idx, val_idx, seed, epoch, val, {}};
      }
    }
    restart_best->history = history;
    if (!best || restart_best->validation < best->validation) best = std::move(restart_best);
  }

  ClassWarper out{group.label,
                  std::move(best->network),
                  {},
                  std::move(best->working),
                  std::move(best->train_idx),
                  std::move(best->history),
                  best->seed,
                  best->epoch,
                  best->validation};
  out.warped_group.resize(N);
  for (std::size_t k = 0; k < out.training_indices.size(); ++k) {
    out.warped_group[out.training_indices[k]] = infer_warp(out.network, out.working_set[k]);
  }
  for (const auto v : best->val_idx) out.warped_group[v] = infer_warp(out.network, group.series[v]);
  return out;
}

ClassWarper make_class_warper(int label, WarperNetwork network, std::span<const Series> members) {
  ClassWarper out{label, std::move(network), {}, {}, {}, {}, 0, 0, 0.0};
  out.seed = out.network.seed();
  for (std::size_t i = 0; i < members.size(); ++i) {
    out.warped_group.push_back(infer_warp(out.network, members[i]));
    out.working_set.push_back(members[i]);
    out.training_indices.push_back(i);
  }
  return out;
}

Series warped_average(const ClassWarper& warper) {
  if (warper.warped_group.empty()) throw ContractViolation("warper has no warped group");
  return mean_series(warper.warped_group);
}

double mtsa_objective(std::span<const Series> series) {
  double total = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    for (std::size_t j = 0; j < series.size(); ++j) {
      if (i == j) continue;
      const auto& a = series[i].values();
      const auto& b = series[j].values();
      if (a.size() != b.size()) throw ContractViolation("mtsa_objective: shapes differ");
      for (std::size_t k = 0; k < a.size(); ++k) total += (a[k] - b[k]) * (a[k] - b[k]);
    }
  }
  return total;
}

double mtsa_objective(std::span<const Series> originals,
                      std::span<const PiecewiseLinearWarp> warps, ObjectiveForm form) {
  if (originals.size() != warps.size()) throw ContractViolation("one warp per series required");
  std::vector<Series> warped;
  warped.reserve(originals.size());
  for (std::size_t i = 0; i < originals.size(); ++i) {
    const auto& x = originals[i];
    const auto& w = warps[i];
    if (form == ObjectiveForm::Matrix) {
      warped.push_back(apply_warp(build_soft_matrix(w, x.length()), x));
      continue;
    }
    const double last = static_cast<double>(x.length() - 1);
    std::vector<double> v(x.dims() * w.length);
    for (std::size_t t = 0; t < w.length; ++t) {
      const double u = std::clamp(eval_tau(w, static_cast<double>(t)), 0.0, last);
      const auto lo = static_cast<std::size_t>(std::floor(u));
      const auto hi = std::min(lo + 1, x.length() - 1);
      const double frac = u - static_cast<double>(lo);
      for (std::size_t r = 0; r < x.dims(); ++r) {
        v[r * w.length + t] = x.at(r, lo) + frac * (x.at(r, hi) - x.at(r, lo));
      }
    }
    warped.emplace_back(x.dims(), w.length, std::move(v));
  }
  return mtsa_objective(warped);
}

}  // namespace warpalign
