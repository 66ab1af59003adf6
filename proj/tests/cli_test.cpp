// Drives the command-line surface in-process against small synthetic datasets.
#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "support.hpp"
#include "warpalign/checkpoint.hpp"
#include "warpalign/classify.hpp"
#include "warpalign/dataset.hpp"
#include "warpalign/losses.hpp"
#include "warpalign/report.hpp"

using namespace warpalign;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result warpalign_cmd(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_split(const fs::path& path, const std::vector<std::pair<int, Series>>& items) {
  std::ofstream os(path);
  os.precision(17);
  for (const auto& [label, s] : items) {
    os << label;
    for (double v : s.values()) os << '\t' << v;
    os << '\n';
  }
}

// Lines of a CSV report without the provenance comments.
std::vector<std::string> csv_lines(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) {
    if (!l.empty() && l[0] != '#') lines.push_back(l);
  }
  return lines;
}

std::map<std::string, std::string> provenance(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::map<std::string, std::string> out;
  for (std::string l; std::getline(in, l) && !l.empty() && l[0] == '#';) {
    const auto eq = l.find('=');
    out[l.substr(2, eq - 2)] = l.substr(eq + 1);
  }
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  static constexpr std::size_t kLen = 48;

  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("warpalign_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(root_);
    data_ = root_ / "data";
    out_ = root_ / "out";
    fs::create_directories(data_);
    // Bumps (label 1) and falling ramps (label 2): 6 train and 5 test each.
    std::vector<std::pair<int, Series>> train, test;
    const auto bumps = wa_test::shifted_bumps(11, kLen, 3);
    for (std::size_t i = 0; i < bumps.size(); ++i) (i < 6 ? train : test).push_back({1, bumps[i]});
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> noise(-0.05, 0.05);
    for (int i = 0; i < 11; ++i) {
      std::vector<double> v(kLen);
      for (std::size_t t = 0; t < kLen; ++t) v[t] = 1.0 - static_cast<double>(t) / kLen + noise(gen);
      (i < 6 ? train : test).push_back({2, Series::univariate(v)});
    }
    write_split(data_ / "Syn_TRAIN.tsv", train);
    write_split(data_ / "Syn_TEST.tsv", test);
  }

  void TearDown() override { fs::remove_all(root_); }

  std::vector<std::string> base(const std::string& cmd, const std::string& name = "Syn") const {
    return {cmd, "--data", data_.string(), "--name", name, "--out", out_.string()};
  }

  Result train_quick(const std::string& name = "Syn") const {
    auto args = base("train", name);
    args.insert(args.end(), {"--epochs", "2", "--seed", "1"});
    return warpalign_cmd(args);
  }

  fs::path root_, data_, out_;
};

TEST_F(CliTest, TrainWritesOneCheckpointPerLabelAndReport) {
  auto args = base("train");
  args.insert(args.end(), {"--label", "1", "--epochs", "2", "--seed", "1"});
  const auto r = warpalign_cmd(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out_ / "Syn.1.wrpn"));
  EXPECT_FALSE(fs::exists(out_ / "Syn.2.wrpn"));
  const auto report = nlohmann::json::parse(slurp(out_ / "Syn.train.json"));
  ASSERT_EQ(report["classes"].size(), 1u);
  const auto& c = report["classes"][0];
  EXPECT_EQ(c["label"], "1");
  EXPECT_EQ(c["loss_history"].size(), 2u);
  EXPECT_TRUE(c.contains("pre_mean_pairwise_loss"));
  EXPECT_TRUE(c.contains("post_mean_pairwise_loss"));
  const auto ckpt = load_checkpoint(out_ / "Syn.1.wrpn");
  EXPECT_EQ(ckpt.meta.dataset, "Syn");
  EXPECT_EQ(ckpt.network.config().input_len, kLen);
}

TEST_F(CliTest, DefaultsAreEchoedIntoReports) {
  auto args = base("train");
  args.insert(args.end(), {"--epochs", "1", "--seed", "4", "--lambda1", "0.5", "--lambda2", "0.5",
                           "--lr", "1e-3"});
  ASSERT_EQ(warpalign_cmd(args).code, 0);
  const auto p = nlohmann::json::parse(slurp(out_ / "Syn.train.json"))["provenance"];
  EXPECT_EQ(p["lambda1"], "0.5");
  EXPECT_EQ(p["lambda2"], "0.5");
  EXPECT_EQ(p["lr"], "0.001");
  EXPECT_EQ(p["k"], "4");
  EXPECT_EQ(p["seeds"], "4");
  EXPECT_EQ(p["filter_counts"], "128,64,32");
}

TEST_F(CliTest, ValidationErrorsExitWithOne) {
  auto zero = base("train");
  zero.insert(zero.end(), {"--epochs", "0"});
  EXPECT_EQ(warpalign_cmd(zero).code, cli::kValidationError);

  auto label = base("train");
  label.insert(label.end(), {"--label", "9", "--epochs", "1"});
  EXPECT_EQ(warpalign_cmd(label).code, cli::kValidationError);

  auto fmt = base("classify");
  fmt.insert(fmt.end(), {"--format", "xml"});
  EXPECT_EQ(warpalign_cmd(fmt).code, cli::kValidationError);

  auto lambda = base("train");
  lambda.insert(lambda.end(), {"--lambda2", "-1"});
  EXPECT_EQ(warpalign_cmd(lambda).code, cli::kValidationError);

  EXPECT_EQ(warpalign_cmd({"train", "--name", "Syn"}).code, cli::kValidationError);
}

TEST_F(CliTest, MissingInputsExitWithTwo) {
  EXPECT_EQ(warpalign_cmd(base("bench", "Nope")).code, cli::kMissingInput);
  EXPECT_EQ(warpalign_cmd(base("train", "Nope")).code, cli::kMissingInput);
  auto ours = base("classify");
  ours.insert(ours.end(), {"--method", "ours"});
  const auto r = warpalign_cmd(ours);
  EXPECT_EQ(r.code, cli::kMissingInput);
  EXPECT_NE(r.err.find("Syn.1.wrpn"), std::string::npos);
}

TEST_F(CliTest, AlignEmitsOneWarpedSeriesPerTestSignal) {
  ASSERT_EQ(train_quick().code, 0);
  auto args = base("align");
  args.insert(args.end(), {"--label", "1", "--seed", "1"});
  ASSERT_EQ(warpalign_cmd(args).code, 0);
  const auto lines = csv_lines(out_ / "Syn.align.csv");
  ASSERT_FALSE(lines.empty());
  EXPECT_EQ(lines[0], "series_id,t,role,value");
  std::size_t warped = 0, original = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    warped += lines[i].find(",warped,") != std::string::npos;
    original += lines[i].find(",original,") != std::string::npos;
  }
  EXPECT_EQ(warped, 5 * kLen);
  EXPECT_EQ(original, 5 * kLen);
}

TEST_F(CliTest, IdentityCheckpointLeavesSignalsUnchanged) {
  fs::create_directories(out_);
  NetConfig cfg = NetConfig::reduced(kLen);
  save_checkpoint(wa_test::identity_network(cfg), {"Syn", 2, 0, 0.0}, out_ / "Syn.2.wrpn");
  auto args = base("align");
  args.insert(args.end(), {"--label", "2", "--format", "json"});
  ASSERT_EQ(warpalign_cmd(args).code, 0);
  const auto j = nlohmann::json::parse(slurp(out_ / "Syn.align.json"));
  ASSERT_EQ(j["series"].size(), 5u);
  for (const auto& s : j["series"]) {
    const auto orig = s["original"][0].get<std::vector<double>>();
    const auto warped = s["warped"][0].get<std::vector<double>>();
    ASSERT_EQ(orig.size(), warped.size());
    for (std::size_t t = 0; t < orig.size(); ++t) EXPECT_NEAR(warped[t], orig[t], 1e-12);
  }
}

TEST_F(CliTest, CheckpointLengthMismatchIsExplicit) {
  fs::create_directories(out_);
  save_checkpoint(wa_test::identity_network(NetConfig::reduced(kLen + 8)), {"Syn", 1, 0, 0.0},
                  out_ / "Syn.1.wrpn");
  auto args = base("align");
  args.insert(args.end(), {"--label", "1"});
  const auto r = warpalign_cmd(args);
  EXPECT_EQ(r.code, cli::kValidationError);
  EXPECT_NE(r.err.find("length"), std::string::npos);
}

TEST_F(CliTest, AverageOfConstantClassIsThatConstant) {
  std::vector<std::pair<int, Series>> items;
  for (int i = 0; i < 4; ++i) items.push_back({1, Series::univariate(std::vector<double>(kLen, 2.5))});
  write_split(data_ / "Flat_TRAIN.tsv", items);
  fs::create_directories(out_);
  save_checkpoint(wa_test::identity_network(NetConfig::reduced(kLen)), {"Flat", 1, 0, 0.0},
                  out_ / "Flat.1.wrpn");
  ASSERT_EQ(warpalign_cmd(base("average", "Flat")).code, 0);
  const auto lines = csv_lines(out_ / "Flat.average.csv");
  std::map<std::string, std::size_t> roles;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::istringstream row(lines[i]);
    std::string id, t, role, value;
    std::getline(row, id, ',');
    std::getline(row, t, ',');
    std::getline(row, role, ',');
    std::getline(row, value, ',');
    ++roles[role];
    EXPECT_NEAR(std::stod(value), 2.5, 1e-12) << role;
  }
  EXPECT_EQ(roles.size(), 4u);
  EXPECT_EQ(roles["member"], 4 * kLen);
  EXPECT_EQ(roles["simple_average"], kLen);
  EXPECT_EQ(roles["dba_average"], kLen);
  EXPECT_EQ(roles["warped_average"], kLen);
}

TEST_F(CliTest, WarpedAverageFitsBumpsBest) {
  std::vector<std::pair<int, Series>> items;
  for (const auto& s : wa_test::shifted_bumps(12, 64, 5)) items.push_back({1, s});
  write_split(data_ / "Bumps_TRAIN.tsv", items);
  auto args = base("train", "Bumps");
  args.insert(args.end(), {"--epochs", "10", "--seed", "1"});
  ASSERT_EQ(warpalign_cmd(args).code, 0);
  auto avg = base("average", "Bumps");
  avg.insert(avg.end(), {"--format", "json"});
  ASSERT_EQ(warpalign_cmd(avg).code, 0);
  const auto j = nlohmann::json::parse(slurp(out_ / "Bumps.average.json"));
  const auto& l = j["classes"][0]["mean_loss_to_members"];
  EXPECT_LT(l["warped_average"].get<double>(), l["simple_average"].get<double>());
  EXPECT_LT(l["warped_average"].get<double>(), l["dba_average"].get<double>());
}

TEST_F(CliTest, ClassifyAllGivesFourMethodRows) {
  ASSERT_EQ(train_quick().code, 0);
  auto args = base("classify");
  args.insert(args.end(), {"--method", "all", "--seed", "1"});
  ASSERT_EQ(warpalign_cmd(args).code, 0);
  const auto methods = csv_lines(out_ / "classify_methods.csv");
  ASSERT_EQ(methods.size(), 5u);
  EXPECT_EQ(methods[0], "dataset,method,accuracy,seconds");
  EXPECT_EQ(methods[1].rfind("Syn,nn,", 0), 0u);
  EXPECT_EQ(methods[4].rfind("Syn,ours,", 0), 0u);
  const auto table = csv_lines(out_ / "classify.csv");
  ASSERT_EQ(table.size(), 2u);
  EXPECT_EQ(table[0], "dataset,base,dtw,dba,ours,cs_org,cs_warp");
}

TEST_F(CliTest, ClassifyNnMatchesLibraryAndIsDeterministic) {
  auto args = base("classify");
  args.insert(args.end(), {"--method", "nn"});
  ASSERT_EQ(warpalign_cmd(args).code, 0);
  const auto first = slurp(out_ / "classify.csv");
  ASSERT_EQ(warpalign_cmd(args).code, 0);
  EXPECT_EQ(slurp(out_ / "classify.csv"), first);
  const auto table = csv_lines(out_ / "classify.csv");
  ASSERT_EQ(table.size(), 2u);
  const auto train = parse_ucr_tsv(data_ / "Syn_TRAIN.tsv");
  const auto test = parse_ucr_tsv(data_ / "Syn_TEST.tsv");
  const auto groups = group_by_label(train);
  const auto expected = "Syn," + format_number(100.0 * classify_nn(train, test).accuracy) + ",,,," +
                        format_number(grouped_alignment_loss(groups)) + ",";
  EXPECT_EQ(table[1], expected);
}

TEST_F(CliTest, MultiDatasetRunAddsMpceRow) {
  fs::copy_file(data_ / "Syn_TRAIN.tsv", data_ / "Twin_TRAIN.tsv");
  fs::copy_file(data_ / "Syn_TEST.tsv", data_ / "Twin_TEST.tsv");
  auto args = base("classify", "Syn,Twin");
  args.insert(args.end(), {"--method", "nn"});
  const auto r = warpalign_cmd(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto table = csv_lines(out_ / "classify.csv");
  ASSERT_EQ(table.size(), 4u);
  EXPECT_EQ(table[1].rfind("Syn,", 0), 0u);
  EXPECT_EQ(table[2].rfind("Twin,", 0), 0u);
  EXPECT_EQ(table[3], "MPCE,0,,,,,");
}

TEST_F(CliTest, BenchReportsTimingColumns) {
  auto args = base("bench");
  args.insert(args.end(), {"--label", "1", "--epochs", "1", "--seed", "1", "--repeat", "3"});
  ASSERT_EQ(warpalign_cmd(args).code, 0);
  const auto lines = csv_lines(out_ / "bench.csv");
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], "name,label,n_train,our_train_s,our_test_s,our_whole_s,dba_whole_s");
  EXPECT_EQ(lines[1].rfind("Syn,1,6,", 0), 0u);
  EXPECT_EQ(provenance(out_ / "bench.csv")["repeat"], "3");
}

TEST_F(CliTest, RerunWithSameSeedIsByteIdentical) {
  ASSERT_EQ(train_quick().code, 0);
  const auto ckpt = slurp(out_ / "Syn.1.wrpn");
  const auto report = slurp(out_ / "Syn.train.json");
  ASSERT_EQ(train_quick().code, 0);
  EXPECT_EQ(slurp(out_ / "Syn.1.wrpn"), ckpt);
  EXPECT_EQ(slurp(out_ / "Syn.train.json"), report);
  ASSERT_EQ(warpalign_cmd(base("align")).code, 0);
  const auto aligned = slurp(out_ / "Syn.align.csv");
  ASSERT_EQ(warpalign_cmd(base("align")).code, 0);
  EXPECT_EQ(slurp(out_ / "Syn.align.csv"), aligned);
}

TEST(ThreadBudget, HonoursEnvironment) {
  ::setenv("WARPALIGN_THREADS", "3", 1);
  EXPECT_EQ(cli::thread_budget(), 3u);
  ::setenv("WARPALIGN_THREADS", "zero", 1);
  EXPECT_GE(cli::thread_budget(), 1u);
  ::unsetenv("WARPALIGN_THREADS");
  EXPECT_GE(cli::thread_budget(), 1u);
}

}  // namespace
