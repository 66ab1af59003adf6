#include "warpalign/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "warpalign/errors.hpp"
#include "warpalign/report.hpp"

namespace warpalign {
namespace {

constexpr char kMagic[4] = {'W', 'R', 'P', 'N'};

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

void put_floats(std::string& out, std::span<const double> values) {
  for (double d : values) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(d)));
}

std::vector<double> get_floats(const std::string& in, std::size_t pos, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = static_cast<double>(std::bit_cast<float>(get_u32(in, pos + 4 * i)));
  }
  return out;
}

nlohmann::json config_to_json(const NetConfig& cfg) {
  return {{"filter_sizes", cfg.filter_sizes}, {"filter_counts", cfg.filter_counts},
          {"pool_sizes", cfg.pool_sizes},     {"pool_stride", cfg.pool_stride},
          {"segments", cfg.segments},         {"input_len", cfg.input_len},
          {"input_dim", cfg.input_dim}};
}

NetConfig config_from_json(const nlohmann::json& j) {
  NetConfig cfg;
  cfg.filter_sizes = j.at("filter_sizes").get<std::vector<std::size_t>>();
  cfg.filter_counts = j.at("filter_counts").get<std::vector<std::size_t>>();
  cfg.pool_sizes = j.at("pool_sizes").get<std::vector<std::size_t>>();
  cfg.pool_stride = j.at("pool_stride").get<std::size_t>();
  cfg.segments = j.at("segments").get<std::size_t>();
  cfg.input_len = j.at("input_len").get<std::size_t>();
  cfg.input_dim = j.at("input_dim").get<std::size_t>();
  return cfg;
}

}  // namespace

std::string encode_checkpoint(const WarperNetwork& net, const CheckpointMeta& meta) {
  nlohmann::json header = {
      {"dataset", meta.dataset},
      {"label", meta.label},
      {"epoch", meta.epoch},
      {"loss", std::isfinite(meta.loss) ? meta.loss : 0.0},
      {"seed", net.seed()},
      {"steps", net.step_count()},
      {"param_count", net.parameter_count()},
      {"scalar", "f32le"},
      {"net", config_to_json(net.config())},
  };
  const std::string text = header.dump();
  std::string out(kMagic, kMagic + 4);
  put_u16(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  put_floats(out, net.parameters());
  put_floats(out, net.first_moments());
  put_floats(out, net.second_moments());
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < 10 || bytes.compare(0, 4, kMagic, 4) != 0) {
    throw IntegrityError("not a warper checkpoint (bad magic)");
  }
  const auto version = static_cast<std::uint16_t>(static_cast<unsigned char>(bytes[4]) |
                                                  (static_cast<unsigned char>(bytes[5]) << 8));
  if (version != kCheckpointVersion) {
    throw VersionError("unsupported checkpoint version " + std::to_string(version) +
                       " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const std::size_t header_len = get_u32(bytes, 6);
  if (bytes.size() < 10 + header_len) throw IntegrityError("checkpoint header is truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(10, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }
  CheckpointMeta meta;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::uint64_t steps = 0;
  NetConfig cfg;
  try {
    meta.dataset = header.at("dataset").get<std::string>();
    meta.label = header.at("label").get<int>();
    meta.epoch = header.at("epoch").get<std::size_t>();
    meta.loss = header.at("loss").get<double>();
    seed = header.at("seed").get<std::uint64_t>();
    steps = header.at("steps").get<std::uint64_t>();
    count = header.at("param_count").get<std::size_t>();
    cfg = config_from_json(header.at("net"));
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("checkpoint header is incomplete: ") + e.what());
  }
  const std::size_t payload = bytes.size() - 10 - header_len;
  if (payload != 3 * 4 * count) {
    throw IntegrityError("checkpoint payload has " + std::to_string(payload) +
                         " bytes, header announces " + std::to_string(3 * 4 * count));
  }
  WarperNetwork net(cfg, seed);
  if (net.parameter_count() != count) {
    throw IntegrityError("parameter count does not match the stored network configuration");
  }
  const std::size_t base = 10 + header_len;
  net.restore(get_floats(bytes, base, count), get_floats(bytes, base + 4 * count, count),
              get_floats(bytes, base + 8 * count, count), steps);
  return Checkpoint{std::move(meta), std::move(net)};
}

void save_checkpoint(const WarperNetwork& net, const CheckpointMeta& meta,
                     const std::filesystem::path& path) {
  write_file_atomic(path, encode_checkpoint(net, meta));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace warpalign
