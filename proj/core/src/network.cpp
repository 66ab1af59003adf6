#include "warpalign/network.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <string>

#include "warpalign/errors.hpp"
#include "warpalign/layers.hpp"
#include "warpalign/rng.hpp"

namespace warpalign {
namespace {

std::atomic<std::uint64_t> next_network_id{1};

double to_f32_grid(double x) { return static_cast<double>(static_cast<float>(x)); }

constexpr std::size_t kCalibrationInputs = 16;
constexpr double kHeadWeightScale = 0.1;

std::vector<double> gaussian_series(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; i += 2) {
    const double u1 = 1.0 - uniform_unit(rng);
    const double u2 = uniform_unit(rng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    v[i] = r * std::cos(2.0 * std::numbers::pi * u2);
    if (i + 1 < n) v[i + 1] = r * std::sin(2.0 * std::numbers::pi * u2);
  }
  return v;
}

}  // namespace

NetConfig NetConfig::reduced(std::size_t input_len, std::size_t input_dim) {
  NetConfig cfg;
  cfg.filter_counts = {8, 4, 2};
  cfg.input_len = input_len;
  cfg.input_dim = input_dim;
  return cfg;
}

std::size_t NetConfig::stage_output_len(std::size_t stage) const {
  std::size_t len = input_len;
  for (std::size_t s = 0; s <= stage && s < pool_sizes.size(); ++s) {
    if (pool_sizes[s] > len) return 0;
    len = len - pool_sizes[s] + 1;
  }
  return len;
}

std::size_t NetConfig::flatten_len() const {
  if (filter_counts.empty()) return 0;
  return filter_counts.back() * stage_output_len(stages() - 1);
}

void NetConfig::validate() const {
  if (filter_sizes.size() != 3 || filter_counts.size() != 3 || pool_sizes.size() != 3) {
    throw ConfigError("warper network has exactly three convolution stages");
  }
  if (pool_stride != 1) throw ConfigError("pooling stride must be 1");
  if (segments < 1) throw ConfigError("segment count K must be >= 1");
  if (input_dim < 1) throw ConfigError("input dimension must be >= 1");
  if (input_len < 2) throw ConfigError("input length must be >= 2");
  for (std::size_t s = 0; s < 3; ++s) {
    if (filter_sizes[s] == 0 || filter_counts[s] == 0 || pool_sizes[s] == 0) {
      throw ConfigError("filter sizes, counts and pool sizes must be positive");
    }
  }
  if (flatten_len() == 0) {
    throw ConfigError("input length " + std::to_string(input_len) +
                      " is too short for the pooling stages (flatten length is 0)");
  }
}

WarperNetwork::WarperNetwork(const NetConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), seed_(seed), id_(next_network_id.fetch_add(1)) {
  cfg_.validate();
  build_layout();
  initialize();
}

WarperNetwork init_network(const NetConfig& cfg, std::uint64_t seed) {
  return WarperNetwork(cfg, seed);
}

void WarperNetwork::build_layout() {
  std::size_t offset = 0;
  std::size_t cin = cfg_.input_dim;
  stages_.clear();
  for (std::size_t s = 0; s < cfg_.stages(); ++s) {
    StageLayout st;
    st.in_channels = cin;
    st.out_channels = cfg_.filter_counts[s];
    st.width = cfg_.filter_sizes[s];
    st.pool = cfg_.pool_sizes[s];
    st.kernel = {offset, st.out_channels * cin * st.width};
    offset += st.kernel.size;
    st.bias = {offset, st.out_channels};
    offset += st.bias.size;
    stages_.push_back(st);
    cin = st.out_channels;
  }
  const auto F = cfg_.flatten_len();
  const auto K = cfg_.segments;
  head_a_w_ = {offset, K * F};
  offset += K * F;
  head_a_b_ = {offset, K};
  offset += K;
  head_t_w_ = {offset, K * F};
  offset += K * F;
  head_t_b_ = {offset, K};
  offset += K;
  params_.assign(offset, 0.0);
  m_.assign(offset, 0.0);
  v_.assign(offset, 0.0);
}

void WarperNetwork::initialize() {
  auto rng = make_rng(seed_, 0x494e4954ULL);
  auto fill_uniform = [&](LayerSpan span, double bound) {
    for (std::size_t i = 0; i < span.size; ++i) {
      params_[span.offset + i] = to_f32_grid((2.0 * uniform_unit(rng) - 1.0) * bound);
    }
  };
  for (const auto& st : stages_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(st.in_channels * st.width));
    fill_uniform(st.kernel, bound);
    // conv biases stay at zero, so an all-zero input reaches the heads as zero features

  }
  const auto F = cfg_.flatten_len();
  const double head_bound = kHeadWeightScale / std::sqrt(static_cast<double>(F));
  fill_uniform(head_a_w_, head_bound);
  fill_uniform(head_t_w_, head_bound);

  // Calibrate head biases so an average random input starts at the identity
  // warp: slopes near 1, raw durations near T / K.
  std::vector<double> mean_features(F, 0.0);
  std::vector<double> feats;
  for (std::size_t n = 0; n < kCalibrationInputs; ++n) {
    Series probe(cfg_.input_dim, cfg_.input_len,
                 gaussian_series(rng, cfg_.input_dim * cfg_.input_len));
    features(probe, nullptr, feats);
    for (std::size_t f = 0; f < F; ++f) mean_features[f] += feats[f] / kCalibrationInputs;
  }
  const auto K = cfg_.segments;
  const double t_target = static_cast<double>(cfg_.input_len) / static_cast<double>(K);
  for (std::size_t k = 0; k < K; ++k) {
    double za = 0.0;
    double zt = 0.0;
    for (std::size_t f = 0; f < F; ++f) {
      za += params_[head_a_w_.offset + k * F + f] * mean_features[f];
      zt += params_[head_t_w_.offset + k * F + f] * mean_features[f];
    }
    params_[head_a_b_.offset + k] = to_f32_grid(1.0 - za);
    params_[head_t_b_.offset + k] = to_f32_grid(t_target - zt);
  }
  ++version_;
}

void WarperNetwork::set_parameter(std::size_t index, double value) {
  if (index >= params_.size()) throw ContractViolation("parameter index out of range");
  params_[index] = value;
  ++version_;
}

void WarperNetwork::features(const Series& series, Tape* tape, std::vector<double>& out) const {
  if (series.length() != cfg_.input_len || series.dims() != cfg_.input_dim) {
    throw ContractViolation("network expects series of shape (" + std::to_string(cfg_.input_dim) +
                            " x " + std::to_string(cfg_.input_len) + "), got (" +
                            std::to_string(series.dims()) + " x " +
                            std::to_string(series.length()) + ")");
  }
  std::vector<double> x = series.values();
  std::size_t len = cfg_.input_len;
  if (tape) tape->stages.clear();
  std::vector<double> act;
  for (const auto& st : stages_) {
    act.assign(st.out_channels * len, 0.0);
    conv1d_same(x.data(), st.in_channels, len, &params_[st.kernel.offset], &params_[st.bias.offset],
              st.out_channels, st.width, act.data());
    for (double& v : act) v = v > 0.0 ? v : 0.0;
    const std::size_t out_len = len - st.pool + 1;
    std::vector<double> pooled(st.out_channels * out_len);
    avg_pool(act.data(), st.out_channels, len, st.pool, pooled.data());
    if (tape) tape->stages.push_back({std::move(x), act, len});
    x = std::move(pooled);
    len = out_len;
  }
  out = std::move(x);
}

void WarperNetwork::heads(std::span<const double> feats, std::vector<double>& a_pre,
                          std::vector<double>& t_pre) const {
  const auto F = feats.size();
  const auto K = cfg_.segments;
  a_pre.assign(K, 0.0);
  t_pre.assign(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    const double* wa = &params_[head_a_w_.offset + k * F];
    const double* wt = &params_[head_t_w_.offset + k * F];
    double sa = params_[head_a_b_.offset + k];
    double st = params_[head_t_b_.offset + k];
    for (std::size_t f = 0; f < F; ++f) {
      sa += wa[f] * feats[f];
      st += wt[f] * feats[f];
    }
    a_pre[k] = sa;
    t_pre[k] = st;
  }
}

ForwardResult WarperNetwork::forward(const Series& series) const {
  ForwardResult r;
  r.tape.network_id = id_;
  r.tape.version = version_;
  features(series, &r.tape, r.tape.features);
  heads(r.tape.features, r.tape.head_a_pre, r.tape.head_t_pre);
  r.slopes.resize(cfg_.segments);
  r.raw_durations.resize(cfg_.segments);
  for (std::size_t k = 0; k < cfg_.segments; ++k) {
    r.slopes[k] = std::max(0.0, r.tape.head_a_pre[k]);
    r.raw_durations[k] = std::max(0.0, r.tape.head_t_pre[k]);
  }
  return r;
}

void WarperNetwork::predict(const Series& series, std::vector<double>& slopes,
                            std::vector<double>& raw_durations) const {
  std::vector<double> feats;
  features(series, nullptr, feats);
  heads(feats, slopes, raw_durations);
  for (double& v : slopes) v = std::max(0.0, v);
  for (double& v : raw_durations) v = std::max(0.0, v);
}

ParameterGradients WarperNetwork::backward(const Tape& tape, std::span<const double> grad_slopes,
                                           std::span<const double> grad_raw_durations) const {
  if (tape.network_id != id_ || tape.version != version_) {
    throw ContractViolation("tape does not belong to the current network state");
  }
  const auto K = cfg_.segments;
  if (grad_slopes.size() != K || grad_raw_durations.size() != K) {
    throw ContractViolation("upstream gradient must have K entries per head");
  }
  ParameterGradients g(params_.size(), 0.0);
  const auto& feats = tape.features;
  const auto F = feats.size();
  std::vector<double> dfeat(F, 0.0);

  auto head_backward = [&](LayerSpan w, LayerSpan b, const std::vector<double>& pre,
                           std::span<const double> upstream) {
    for (std::size_t k = 0; k < K; ++k) {
      const double d = pre[k] > 0.0 ? upstream[k] : 0.0;
      if (d == 0.0) continue;
      g[b.offset + k] += d;
      double* gw = &g[w.offset + k * F];
      const double* wk = &params_[w.offset + k * F];
      for (std::size_t f = 0; f < F; ++f) {
        gw[f] += d * feats[f];
        dfeat[f] += d * wk[f];
      }
    }
  };
  head_backward(head_a_w_, head_a_b_, tape.head_a_pre, grad_slopes);
  head_backward(head_t_w_, head_t_b_, tape.head_t_pre, grad_raw_durations);

  std::vector<double> dz = std::move(dfeat);
  for (std::size_t s = stages_.size(); s-- > 0;) {
    const auto& st = stages_[s];
    const auto& rec = tape.stages[s];
    const std::size_t len = rec.len;
    // Average-pool adjoint, then the rectifier mask.
    std::vector<double> dy(st.out_channels * len, 0.0);
    avg_pool_backward(dz.data(), st.out_channels, len, st.pool, dy.data());
    for (std::size_t o = 0; o < st.out_channels; ++o) {
      double* dyo = &dy[o * len];
      const double* act = &rec.activation[o * len];
      for (std::size_t p = 0; p < len; ++p) {
        if (!(act[p] > 0.0)) dyo[p] = 0.0;
      }
    }
    const bool need_dx = s > 0;
    std::vector<double> dx(need_dx ? st.in_channels * len : 0, 0.0);
    const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>((st.width - 1) / 2);
    const auto L = static_cast<std::ptrdiff_t>(len);
    for (std::size_t o = 0; o < st.out_channels; ++o) {
      const double* dyo = &dy[o * len];
      double bsum = 0.0;
      for (std::size_t p = 0; p < len; ++p) bsum += dyo[p];
      g[st.bias.offset + o] += bsum;
      for (std::size_t c = 0; c < st.in_channels; ++c) {
        const double* xc = &rec.input[c * len];
        const std::size_t widx = st.kernel.offset + (o * st.in_channels + c) * st.width;
        for (std::size_t k = 0; k < st.width; ++k) {
          const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(k) - pad;
          const std::ptrdiff_t p0 = std::max<std::ptrdiff_t>(0, -shift);
          const std::ptrdiff_t p1 = std::min<std::ptrdiff_t>(L, L - shift);
          double acc = 0.0;
          for (std::ptrdiff_t p = p0; p < p1; ++p) acc += dyo[p] * xc[p + shift];
          g[widx + k] += acc;
          if (need_dx) {
            const double wv = params_[widx + k];
            double* dxc = &dx[c * len];
            for (std::ptrdiff_t p = p0; p < p1; ++p) dxc[p + shift] += wv * dyo[p];
          }
        }
      }
    }
    dz = std::move(dx);
  }
  return g;
}

void WarperNetwork::step(std::span<const double> grads, double lr, const AdamOptions& opts) {
  if (grads.size() != params_.size()) throw ContractViolation("gradient size mismatch");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw TrainingError("non-finite gradient for parameter " + std::to_string(i));
    }
  }
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(opts.beta1, t);
  const double c2 = 1.0 - std::pow(opts.beta2, t);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const double gi = grads[i];
    m_[i] = to_f32_grid(opts.beta1 * m_[i] + (1.0 - opts.beta1) * gi);
    v_[i] = to_f32_grid(opts.beta2 * v_[i] + (1.0 - opts.beta2) * gi * gi);
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    params_[i] = to_f32_grid(params_[i] - lr * mhat / (std::sqrt(vhat) + opts.epsilon));
  }
  ++version_;
}

void WarperNetwork::restore(std::vector<double> params, std::vector<double> m,
                            std::vector<double> v, std::uint64_t steps) {
  if (params.size() != params_.size() || m.size() != m_.size() || v.size() != v_.size()) {
    throw ContractViolation("restore: state size does not match the network configuration");
  }
  params_ = std::move(params);
  m_ = std::move(m);
  v_ = std::move(v);
  steps_ = steps;
  ++version_;
}

}  // namespace warpalign
