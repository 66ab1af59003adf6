#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "support.hpp"
#include "warpalign/checkpoint.hpp"
#include "warpalign/errors.hpp"
#include "warpalign/pipeline.hpp"

using namespace warpalign;

namespace {

WarperNetwork trained_net(std::mt19937_64& gen) {
  auto net = init_network(NetConfig::reduced(32), 21);
  std::vector<Series> working;
  for (int i = 0; i < 4; ++i) working.push_back(wa_test::random_series(gen, 32));
  for (int epoch = 0; epoch < 3; ++epoch) {
    for (std::size_t i = 0; i < working.size(); ++i) {
      net.step(signal_loss(net, working, i, LossConfig{}, true).grads, 1e-3);
    }
  }
  return net;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("warpalign_test_" + name);
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitExact) {
  std::mt19937_64 gen(51);
  const auto net = trained_net(gen);
  const CheckpointMeta meta{"Synthetic", 2, 15, 0.125};
  const auto path = temp_file("roundtrip.wrpn");
  save_checkpoint(net, meta, path);
  const auto loaded = load_checkpoint(path);
  std::filesystem::remove(path);

  EXPECT_EQ(loaded.meta.dataset, "Synthetic");
  EXPECT_EQ(loaded.meta.label, 2);
  EXPECT_EQ(loaded.meta.epoch, 15u);
  EXPECT_EQ(loaded.meta.loss, 0.125);
  EXPECT_EQ(loaded.network.config(), net.config());
  EXPECT_EQ(loaded.network.step_count(), net.step_count());
  ASSERT_EQ(loaded.network.parameter_count(), net.parameter_count());
  for (std::size_t i = 0; i < net.parameter_count(); ++i) {
    ASSERT_EQ(loaded.network.parameters()[i], net.parameters()[i]) << i;
    ASSERT_EQ(loaded.network.first_moments()[i], net.first_moments()[i]) << i;
    ASSERT_EQ(loaded.network.second_moments()[i], net.second_moments()[i]) << i;
  }
  for (int i = 0; i < 10; ++i) {
    const auto x = wa_test::random_series(gen, 32);
    const auto a = net.forward(x);
    const auto b = loaded.network.forward(x);
    EXPECT_EQ(a.slopes, b.slopes);
    EXPECT_EQ(a.raw_durations, b.raw_durations);
  }
}

TEST(Checkpoint, ResumedTrainingMatches) {
  std::mt19937_64 gen(52);
  auto net = trained_net(gen);
  auto copy = decode_checkpoint(encode_checkpoint(net, {})).network;
  const auto g = wa_test::random_vector(gen, net.parameter_count());
  net.step(g, 1e-3);
  copy.step(g, 1e-3);
  for (std::size_t i = 0; i < net.parameter_count(); ++i) EXPECT_EQ(net.parameters()[i], copy.parameters()[i]);
}

TEST(Checkpoint, TruncatedPayloadIsIntegrityError) {
  std::mt19937_64 gen(53);
  const auto bytes = encode_checkpoint(trained_net(gen), {"x", 1, 5, 0.5});
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 4)), IntegrityError);
  EXPECT_THROW(decode_checkpoint(bytes + "pad!"), IntegrityError);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, 20)), IntegrityError);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, 3)), IntegrityError);
}

TEST(Checkpoint, BadMagicAndVersion) {
  std::mt19937_64 gen(54);
  auto bytes = encode_checkpoint(trained_net(gen), {});
  ASSERT_EQ(bytes.substr(0, 4), "WRPN");
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad_magic), IntegrityError);
  auto v99 = bytes;
  v99[4] = 99;
  v99[5] = 0;
  EXPECT_THROW(decode_checkpoint(v99), VersionError);
}

TEST(Checkpoint, HeaderIsReadableJson) {
  std::mt19937_64 gen(55);
  const auto bytes = encode_checkpoint(trained_net(gen), {"GunPoint", 1, 25, 0.3});
  const std::uint32_t len = static_cast<unsigned char>(bytes[6]) |
                            (static_cast<unsigned char>(bytes[7]) << 8) |
                            (static_cast<unsigned char>(bytes[8]) << 16) |
                            (static_cast<unsigned char>(bytes[9]) << 24);
  const auto header = bytes.substr(10, len);
  EXPECT_NE(header.find("\"dataset\":\"GunPoint\""), std::string::npos);
  EXPECT_NE(header.find("\"filter_counts\":[8,4,2]"), std::string::npos);
}

TEST(Checkpoint, MissingFileIsFormatError) {
  EXPECT_THROW(load_checkpoint(temp_file("does_not_exist.wrpn")), FormatError);
}
