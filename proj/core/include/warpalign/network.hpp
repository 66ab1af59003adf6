#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "warpalign/series.hpp"

namespace warpalign {

struct NetConfig {
  std::vector<std::size_t> filter_sizes{13, 7, 3};
  std::vector<std::size_t> filter_counts{128, 64, 32};
  std::vector<std::size_t> pool_sizes{6, 4, 2};
  std::size_t pool_stride = 1;
  std::size_t segments = 4;  // K
  std::size_t input_len = 0;
  std::size_t input_dim = 1;

  /// Narrow variant (8/4/2 filters) used where full width is too slow.
  static NetConfig reduced(std::size_t input_len, std::size_t input_dim = 1);

  std::size_t stages() const noexcept { return filter_sizes.size(); }
  std::size_t stage_output_len(std::size_t stage) const;
  std::size_t flatten_len() const;

  /// Throws ConfigError when the configuration cannot produce features.
  void validate() const;

  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

/// Activations kept by forward() for backward(). Bound to the network state
/// that produced it.
struct Tape {
  struct Stage {
    std::vector<double> input;       // c_in x len
    std::vector<double> activation;  // c_out x len, post-rectifier
    std::size_t len = 0;
  };
  std::vector<Stage> stages;
  std::vector<double> features;
  std::vector<double> head_a_pre;
  std::vector<double> head_t_pre;
  std::uint64_t network_id = 0;
  std::uint64_t version = 0;
};

struct ForwardResult {
  std::vector<double> slopes;
  std::vector<double> raw_durations;
  Tape tape;
};

/// Flat gradient buffer in the parameter layout of WarperNetwork.
using ParameterGradients = std::vector<double>;

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Convolutional warper: three (conv -> ReLU -> average pool) stages, flatten,
/// then two parallel dense heads with ReLU emitting K slopes and K raw durations.
///
/// Parameters live in a single flat buffer in checkpoint order:
/// conv1 kernels [out][in][k], conv1 biases, conv2 ..., conv3 ...,
/// head-a weights [K][F], head-a biases, head-t weights [K][F], head-t biases.
/// Initialization and every optimizer step keep parameters and Adam moments on
/// the binary32 grid so checkpoints round-trip exactly.
class WarperNetwork {
 public:
  WarperNetwork(const NetConfig& cfg, std::uint64_t seed);

  const NetConfig& config() const noexcept { return cfg_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t step_count() const noexcept { return steps_; }

  std::size_t parameter_count() const noexcept { return params_.size(); }
  std::span<const double> parameters() const noexcept { return params_; }
  std::span<const double> first_moments() const noexcept { return m_; }
  std::span<const double> second_moments() const noexcept { return v_; }

  /// Overwrites one parameter (finite-difference probes, tests). Invalidates tapes.
  void set_parameter(std::size_t index, double value);

  ForwardResult forward(const Series& series) const;

  /// Forward pass without keeping a tape.
  void predict(const Series& series, std::vector<double>& slopes,
               std::vector<double>& raw_durations) const;

  ParameterGradients backward(const Tape& tape, std::span<const double> grad_slopes,
                              std::span<const double> grad_raw_durations) const;

  /// One Adam update. Throws TrainingError on a non-finite gradient.
  void step(std::span<const double> grads, double lr, const AdamOptions& opts = {});

  /// Replace the full state (checkpoint restore). Sizes must match the config.
  void restore(std::vector<double> params, std::vector<double> m, std::vector<double> v,
               std::uint64_t steps);

  struct LayerSpan {
    std::size_t offset = 0;
    std::size_t size = 0;
  };
  struct StageLayout {
    LayerSpan kernel;
    LayerSpan bias;
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t width = 0;
    std::size_t pool = 0;
  };
  const std::vector<StageLayout>& stage_layout() const noexcept { return stages_; }
  LayerSpan head_a_weights() const noexcept { return head_a_w_; }
  LayerSpan head_a_bias() const noexcept { return head_a_b_; }
  LayerSpan head_t_weights() const noexcept { return head_t_w_; }
  LayerSpan head_t_bias() const noexcept { return head_t_b_; }

 private:
  void build_layout();
  void initialize();
  void features(const Series& series, Tape* tape, std::vector<double>& out) const;
  void heads(std::span<const double> features, std::vector<double>& a_pre,
             std::vector<double>& t_pre) const;

  NetConfig cfg_;
  std::uint64_t seed_ = 0;
  std::uint64_t id_ = 0;
  std::uint64_t version_ = 0;
  std::uint64_t steps_ = 0;
  std::vector<double> params_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::vector<StageLayout> stages_;
  LayerSpan head_a_w_, head_a_b_, head_t_w_, head_t_b_;
};

WarperNetwork init_network(const NetConfig& cfg, std::uint64_t seed);

}  // namespace warpalign
