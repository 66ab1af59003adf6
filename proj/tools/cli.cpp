#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "warpalign/baselines.hpp"
#include "warpalign/bench.hpp"
#include "warpalign/checkpoint.hpp"
#include "warpalign/classify.hpp"
#include "warpalign/dataset.hpp"
#include "warpalign/errors.hpp"
#include "warpalign/losses.hpp"
#include "warpalign/pipeline.hpp"
#include "warpalign/report.hpp"

namespace warpalign::cli {
namespace {

namespace fs = std::filesystem;
using Provenance = std::map<std::string, std::string>;

constexpr std::size_t kDbaMaxIter = 10;
constexpr double kDbaTol = 1e-5;

std::string join(const auto& values, const char* sep = ",") {
  std::ostringstream os;
  bool first = true;
  for (const auto& v : values) {
    os << (first ? "" : sep) << v;
    first = false;
  }
  return os.str();
}

// Everything that shapes a run, resolved from flags plus module defaults.
struct Resolved {
  RunConfig run;
  TrainConfig train;
  LossConfig loss;
  NetConfig net;  // input_len is filled in per dataset

  Provenance provenance() const {
    return {
        {"command", run.command},
        {"datasets", join(run.names)},
        {"label", run.label.value_or("all")},
        {"method", run.method},
        {"epochs", std::to_string(train.epochs)},
        {"checkpoint_every", std::to_string(train.checkpoint_every)},
        {"substitution_start_epoch", std::to_string(train.substitution_start_epoch)},
        {"validation_fraction", format_number(train.validation_fraction)},
        {"lr", format_number(train.lr)},
        {"optimizer", "adam"},
        {"lambda1", format_number(loss.lambda1)},
        {"lambda2", format_number(loss.lambda2)},
        {"epsilon", format_number(loss.epsilon)},
        {"k", std::to_string(net.segments)},
        {"filter_sizes", join(net.filter_sizes)},
        {"filter_counts", join(net.filter_counts)},
        {"pool_sizes", join(net.pool_sizes)},
        {"seeds", join(train.seeds)},
        {"equalize_seed", std::to_string(train.seeds.front())},
        {"dba_max_iter", std::to_string(kDbaMaxIter)},
        {"dba_tol", format_number(kDbaTol)},
        {"repeat", std::to_string(run.repeat)},
    };
  }
};

Resolved resolve(const RunConfig& run) {
  Resolved r;
  r.run = run;
  if (run.format != "csv" && run.format != "json") throw ConfigError("format must be csv or json");
  if (run.names.empty()) throw ConfigError("--name is required");
  if (run.repeat < 1) throw ConfigError("--repeat must be >= 1");
  if (run.seeds.empty()) throw ConfigError("--seed needs at least one value");
  r.train.epochs = run.epochs;
  r.train.checkpoint_every = std::clamp<std::size_t>(r.train.checkpoint_every, 1, std::max<std::size_t>(run.epochs, 1));
  r.train.lr = run.lr;
  r.train.seeds = run.seeds;
  r.train.validate();
  r.loss.lambda1 = run.lambda1;
  r.loss.lambda2 = run.lambda2;
  r.loss.validate();
  r.net.segments = run.segments;
  if (run.segments < 1) throw ConfigError("--k must be >= 1");
  std::error_code ec;
  fs::create_directories(run.out_dir, ec);
  if (ec || !fs::is_directory(run.out_dir)) {
    throw ConfigError("cannot create output directory " + run.out_dir.string());
  }
  return r;
}

// CSV reports carry their provenance as leading comment lines.
std::string with_header(const Provenance& p, const std::string& csv) {
  std::ostringstream os;
  for (const auto& [k, v] : p) os << "# " << k << '=' << v << '\n';
  os << csv;
  return os.str();
}

struct Data {
  LabeledDataset train;
  LabeledDataset test;
  std::size_t length = 0;
};

fs::path existing_split(const fs::path& dir, const std::string& name, const std::string& split) {
  const auto path = ucr_split_path(dir, name, split);
  if (!fs::is_regular_file(path)) {
    throw MissingInput("missing " + name + "_" + split + ".tsv under " + dir.string());
  }
  return path;
}

// Training split resampled to its mean length; the test split (when asked for)
// is brought to the same length.
Data load_data(const Resolved& r, const std::string& name, bool with_test) {
  Data d;
  const auto train_path = existing_split(r.run.data_dir, name, "TRAIN");
  const auto test_path = with_test ? existing_split(r.run.data_dir, name, "TEST") : fs::path{};
  const auto seed = r.train.seeds.front();
  d.train = equalize_lengths(parse_ucr_tsv(train_path), seed);
  d.train.name = name;
  d.length = d.train.items.front().series.length();
  if (with_test) {
    d.test = equalize_lengths_to(parse_ucr_tsv(test_path), d.length, seed);
    d.test.name = name;
  }
  return d;
}

std::string label_text(const LabeledDataset& ds, int label) {
  if (!ds.label_tokens.empty() && label >= 0 &&
      static_cast<std::size_t>(label) < ds.label_tokens.size()) {
    return ds.label_tokens[static_cast<std::size_t>(label)];
  }
  return std::to_string(label);
}

// Labels the command works on: all classes, or the one named by --label.
std::vector<int> selected_labels(const Resolved& r, const LabeledDataset& ds) {
  const auto all = ds.labels();
  if (!r.run.label) return all;
  for (int l : all) {
    if (label_text(ds, l) == *r.run.label) return {l};
  }
  throw ConfigError("label " + *r.run.label + " does not occur in " + ds.name);
}

fs::path checkpoint_path(const Resolved& r, const std::string& name, const std::string& label) {
  return r.run.out_dir / (name + "." + label + ".wrpn");
}

WarperNetwork load_warper(const Resolved& r, const Data& d, int label) {
  const auto path = checkpoint_path(r, d.train.name, label_text(d.train, label));
  if (!fs::is_regular_file(path)) {
    throw MissingInput("missing warper checkpoint " + path.string() + " (run `train` first)");
  }
  auto ckpt = load_checkpoint(path);
  const auto& cfg = ckpt.network.config();
  if (cfg.input_len != d.length || cfg.input_dim != 1) {
    throw ConfigError("checkpoint " + path.string() + " expects series of length " +
                      std::to_string(cfg.input_len) + ", data has length " +
                      std::to_string(d.length));
  }
  return std::move(ckpt.network);
}

const ClassGroup& group_for(const std::vector<ClassGroup>& groups, int label) {
  for (const auto& g : groups) {
    if (g.label == label) return g;
  }
  throw ContractViolation("no group for label " + std::to_string(label));
}

std::vector<std::size_t> members_of(const LabeledDataset& ds, int label) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.items[i].label == label) idx.push_back(i);
  }
  return idx;
}

void append_series(std::vector<LongRow>& rows, const std::string& id, const std::string& role,
                   const Series& s) {
  for (std::size_t dim = 0; dim < s.dims(); ++dim) {
    const auto row_role = s.dims() == 1 ? role : role + "[" + std::to_string(dim) + "]";
    for (std::size_t t = 0; t < s.length(); ++t) rows.push_back({id, t, row_role, s.at(dim, t)});
  }
}

nlohmann::ordered_json series_json(const Series& s) {
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t dim = 0; dim < s.dims(); ++dim) {
    rows.push_back(std::vector<double>(s.row(dim).begin(), s.row(dim).end()));
  }
  return rows;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(count, thread_budget());
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

void cmd_train(const Resolved& r, std::ostream& out, std::ostream& err) {
  std::mutex log_mutex;
  for (const auto& name : r.run.names) {
    const auto d = load_data(r, name, false);
    const auto labels = selected_labels(r, d.train);
    const auto groups = group_by_label(d.train);
    auto net_cfg = r.net;
    net_cfg.input_len = d.length;
    net_cfg.validate();

    std::vector<std::optional<ClassWarper>> warpers(labels.size());
    parallel_for(labels.size(), [&](std::size_t i) {
      const auto& group = group_for(groups, labels[i]);
      auto observer = [&](const CheckpointEvent& e) {
        std::lock_guard lock(log_mutex);
        err << name << " label " << label_text(d.train, labels[i]) << ": seed " << e.seed
            << " epoch " << e.epoch << " train " << format_number(e.train_loss) << " validation "
            << format_number(e.validation_loss) << '\n';
      };
      warpers[i].emplace(train_class_warper(group, net_cfg, r.train, r.loss, observer));
    });

    nlohmann::ordered_json report;
    report["command"] = "train";
    report["provenance"] = r.provenance();
    report["dataset"] = name;
    report["length"] = d.length;
    report["classes"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const auto& w = *warpers[i];
      const auto text = label_text(d.train, labels[i]);
      const auto path = checkpoint_path(r, name, text);
      save_checkpoint(w.network, {name, w.label, w.epoch, w.validation_loss}, path);
      const auto& group = group_for(groups, labels[i]);
      const double pre = mean_pairwise_loss(group, r.loss.epsilon);
      const double post = mean_pairwise_loss(w.warped_group, r.loss.epsilon);
      report["classes"].push_back({{"label", text},
                                   {"members", group.size()},
                                   {"checkpoint", path.filename().string()},
                                   {"seed", w.seed},
                                   {"epoch", w.epoch},
                                   {"validation_loss", w.validation_loss},
                                   {"loss_history", w.loss_history},
                                   {"pre_mean_pairwise_loss", pre},
                                   {"post_mean_pairwise_loss", post}});
      out << name << " label " << text << ": mean pairwise loss " << format_number(pre) << " -> "
          << format_number(post) << " (seed " << w.seed << ", epoch " << w.epoch << ") -> "
          << path.string() << '\n';
    }
    write_file_atomic(r.run.out_dir / (name + ".train.json"), report.dump(2) + "\n");
  }
}

void cmd_align(const Resolved& r, std::ostream& out) {
  for (const auto& name : r.run.names) {
    const auto d = load_data(r, name, true);
    const auto labels = selected_labels(r, d.train);
    std::vector<LongRow> rows;
    auto items = nlohmann::ordered_json::array();
    std::size_t count = 0;
    for (int label : labels) {
      const auto net = load_warper(r, d, label);
      const auto text = label_text(d.train, label);
      for (std::size_t i : members_of(d.test, label)) {
        const auto& original = d.test.items[i].series;
        const auto warped = infer_warp(net, original);
        const auto id = text + "/" + std::to_string(i);
        append_series(rows, id, "original", original);
        append_series(rows, id, "warped", warped);
        items.push_back({{"series_id", id},
                         {"label", text},
                         {"original", series_json(original)},
                         {"warped", series_json(warped)}});
        ++count;
      }
    }
    fs::path path;
    if (r.run.format == "json") {
      nlohmann::ordered_json j;
      j["command"] = "align";
      j["provenance"] = r.provenance();
      j["dataset"] = name;
      j["length"] = d.length;
      j["series"] = std::move(items);
      path = r.run.out_dir / (name + ".align.json");
      write_file_atomic(path, j.dump(2) + "\n");
    } else {
      path = r.run.out_dir / (name + ".align.csv");
      write_file_atomic(path, with_header(r.provenance(), long_format_csv(rows)));
    }
    out << name << ": " << count << " test signals warped -> " << path.string() << '\n';
  }
}

// Mean loss of a representative to the members it stands for.
double mean_loss_to(const Series& rep, std::span<const Series> members, double epsilon) {
  double total = 0.0;
  for (const auto& m : members) total += series_loss(rep, m, epsilon);
  return total / static_cast<double>(members.size());
}

void cmd_average(const Resolved& r, std::ostream& out) {
  for (const auto& name : r.run.names) {
    const auto d = load_data(r, name, false);
    const auto labels = selected_labels(r, d.train);
    const auto groups = group_by_label(d.train);
    std::vector<LongRow> rows;
    auto classes = nlohmann::ordered_json::array();
    std::ostringstream summary;
    summary << "label,representative,mean_loss_to_members\n";
    for (int label : labels) {
      const auto& group = group_for(groups, label);
      const auto text = label_text(d.train, label);
      const auto warper = make_class_warper(label, load_warper(r, d, label), group.series);
      const auto simple = mean_series(group.series);
      const auto dba = dba_average(group, kDbaMaxIter, kDbaTol).barycenter;
      const auto ours = warped_average(warper);
      const auto idx = members_of(d.train, label);
      for (std::size_t k = 0; k < group.size(); ++k) {
        append_series(rows, text + "/" + std::to_string(idx[k]), "member", group.series[k]);
      }
      append_series(rows, text + "/simple_average", "simple_average", simple);
      append_series(rows, text + "/dba_average", "dba_average", dba);
      append_series(rows, text + "/warped_average", "warped_average", ours);

      // The warped average represents the aligned members; the other two the raw ones.
      const double l_simple = mean_loss_to(simple, group.series, r.loss.epsilon);
      const double l_dba = mean_loss_to(dba, group.series, r.loss.epsilon);
      const double l_ours = mean_loss_to(ours, warper.warped_group, r.loss.epsilon);
      summary << text << ",simple_average," << format_number(l_simple) << '\n'
              << text << ",dba_average," << format_number(l_dba) << '\n'
              << text << ",warped_average," << format_number(l_ours) << '\n';
      auto members = nlohmann::ordered_json::array();
      for (std::size_t k = 0; k < group.size(); ++k) {
        members.push_back({{"series_id", text + "/" + std::to_string(idx[k])},
                           {"values", series_json(group.series[k])}});
      }
      classes.push_back({{"label", text},
                         {"simple_average", series_json(simple)},
                         {"dba_average", series_json(dba)},
                         {"warped_average", series_json(ours)},
                         {"mean_loss_to_members",
                          {{"simple_average", l_simple},
                           {"dba_average", l_dba},
                           {"warped_average", l_ours}}},
                         {"members", std::move(members)}});
      out << name << " label " << text << ": mean loss to members simple "
          << format_number(l_simple) << ", dba " << format_number(l_dba) << ", warped "
          << format_number(l_ours) << '\n';
    }
    if (r.run.format == "json") {
      nlohmann::ordered_json j;
      j["command"] = "average";
      j["provenance"] = r.provenance();
      j["dataset"] = name;
      j["length"] = d.length;
      j["classes"] = std::move(classes);
      write_file_atomic(r.run.out_dir / (name + ".average.json"), j.dump(2) + "\n");
    } else {
      write_file_atomic(r.run.out_dir / (name + ".average.csv"),
                        with_header(r.provenance(), long_format_csv(rows)));
      write_file_atomic(r.run.out_dir / (name + ".average_loss.csv"),
                        with_header(r.provenance(), summary.str()));
    }
  }
}

struct MethodResult {
  std::string dataset;
  std::string method;
  double accuracy = 0.0;  // percent
  double seconds = 0.0;
};

std::vector<std::string> requested_methods(const std::string& method) {
  if (method == "all") return {"nn", "dtw", "dba", "ours"};
  return {method};
}

void cmd_classify(const Resolved& r, std::ostream& out) {
  std::vector<AccuracyRow> table;
  std::vector<MethodResult> results;
  const auto methods = requested_methods(r.run.method);
  for (const auto& name : r.run.names) {
    const auto d = load_data(r, name, true);
    const auto groups = group_by_label(d.train);
    AccuracyRow row;
    row.dataset = name;
    row.classes = groups.size();
    row.cs_org = grouped_alignment_loss(groups, r.loss.epsilon);

    // Checkpoints are checked before any (slow) baseline runs.
    std::vector<WarperNetwork> nets;
    if (std::ranges::find(methods, "ours") != methods.end()) {
      for (const auto& g : groups) nets.push_back(load_warper(r, d, g.label));
    }
    for (const auto& m : methods) {
      const auto t0 = std::chrono::steady_clock::now();
      Prediction p;
      if (m == "nn") {
        p = classify_nn(d.train, d.test);
      } else if (m == "dtw") {
        p = classify_dtw_nn(d.train, d.test);
      } else if (m == "dba") {
        p = classify_dba_nn(fit_dba(d.train, kDbaMaxIter, kDbaTol), d.test);
      } else {
        std::vector<ClassWarper> warpers;
        std::vector<ClassGroup> warped;
        for (std::size_t i = 0; i < groups.size(); ++i) {
          warpers.push_back(make_class_warper(groups[i].label, nets[i], groups[i].series));
          warped.push_back({groups[i].label, warpers.back().warped_group});
        }
        p = classify_ours(warpers, d.test, r.loss);
        row.cs_warp = grouped_alignment_loss(warped, r.loss.epsilon);
      }
      const double secs = seconds_since(t0);
      const double pct = 100.0 * p.accuracy;
      results.push_back({name, m, pct, secs});
      if (m == "nn") row.base = pct;
      if (m == "dtw") row.dtw = pct;
      if (m == "dba") row.dba = pct;
      if (m == "ours") row.ours = pct;
      out << name << ' ' << m << ": accuracy " << format_number(pct) << "% ("
          << format_number(secs) << " s)\n";
    }
    table.push_back(std::move(row));
  }

  if (table.size() > 1) {
    for (const auto& [method, value] : mpce_by_method(table)) {
      out << "MPCE " << method << ": " << format_number(value) << '\n';
    }
  }
  if (r.run.format == "json") {
    auto j = nlohmann::ordered_json::parse(accuracy_table_json(table, r.provenance()));
    j["methods"] = nlohmann::ordered_json::array();
    for (const auto& m : results) {
      j["methods"].push_back({{"dataset", m.dataset},
                              {"method", m.method},
                              {"accuracy", m.accuracy},
                              {"seconds", m.seconds}});
    }
    write_file_atomic(r.run.out_dir / "classify.json", j.dump(2) + "\n");
  } else {
    write_file_atomic(r.run.out_dir / "classify.csv",
                      with_header(r.provenance(), accuracy_table_csv(table)));
    std::ostringstream os;
    os << "dataset,method,accuracy,seconds\n";
    for (const auto& m : results) {
      os << m.dataset << ',' << m.method << ',' << format_number(m.accuracy) << ','
         << format_number(m.seconds) << '\n';
    }
    write_file_atomic(r.run.out_dir / "classify_methods.csv", with_header(r.provenance(), os.str()));
  }
}

void cmd_bench(const Resolved& r, std::ostream& out) {
  std::vector<TimingRow> rows;
  BenchOptions opts;
  opts.repeat = r.run.repeat;
  opts.dba_max_iter = kDbaMaxIter;
  opts.dba_tol = kDbaTol;
  for (const auto& name : r.run.names) {
    const auto d = load_data(r, name, true);
    auto net_cfg = r.net;
    net_cfg.input_len = d.length;
    net_cfg.validate();
    for (int label : selected_labels(r, d.train)) {
      auto row = timing_bench(d.train, d.test, label, net_cfg, r.train, r.loss, opts);
      row.name = name;
      out << name << " label " << label_text(d.train, label) << ": ours "
          << format_number(row.our_whole_s) << " s, dba " << format_number(row.dba_whole_s)
          << " s\n";
      rows.push_back(std::move(row));
    }
  }
  if (r.run.format == "json") {
    write_file_atomic(r.run.out_dir / "bench.json", timing_table_json(rows, r.provenance()));
  } else {
    write_file_atomic(r.run.out_dir / "bench.csv",
                      with_header(r.provenance(), timing_table_csv(rows)));
  }
}

void add_common_options(CLI::App& sub, RunConfig& cfg) {
  sub.add_option("--data", cfg.data_dir, "Directory holding <Name>_TRAIN.tsv / <Name>_TEST.tsv")
      ->required();
  sub.add_option("--name", cfg.names, "Dataset name (repeat or comma-separate for several)")
      ->required()
      ->delimiter(',');
  sub.add_option("--label", cfg.label, "Restrict to one class label");
  sub.add_option("--method", cfg.method, "Classifier: nn, dtw, dba, ours or all")
      ->check(CLI::IsMember({"nn", "dtw", "dba", "ours", "all"}))
      ->capture_default_str();
  sub.add_option("--epochs", cfg.epochs, "Training epochs")->capture_default_str();
  sub.add_option("--lr", cfg.lr, "Adam learning rate")->capture_default_str();
  sub.add_option("--lambda1", cfg.lambda1, "Slope-collapse penalty weight")->capture_default_str();
  sub.add_option("--lambda2", cfg.lambda2, "Penalization weight")->capture_default_str();
  sub.add_option("--k", cfg.segments, "Number of warp segments")->capture_default_str();
  sub.add_option("--seed", cfg.seeds, "Restart seeds, comma separated; the first also seeds resampling")
      ->delimiter(',');
  sub.add_option("--out", cfg.out_dir, "Output directory (also where checkpoints live)")
      ->capture_default_str();
  sub.add_option("--format", cfg.format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sub.add_option("--repeat", cfg.repeat, "Benchmark repetitions (medians are reported)")
      ->capture_default_str();
}

}  // namespace

std::size_t thread_budget() {
  if (const char* env = std::getenv("WARPALIGN_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learned time-series alignment: train warpers, align, average, classify, benchmark",
               "warpalign"};
  app.require_subcommand(1);
  RunConfig cfg;
  const std::vector<std::pair<const char*, const char*>> commands{
      {"train", "Train one warper per class and write <Name>.<label>.wrpn checkpoints"},
      {"align", "Warp test signals with their class warper (long-format output)"},
      {"average", "Simple, DBA and warped averages per class"},
      {"classify", "Nearest-neighbour accuracy for the requested methods"},
      {"bench", "Timing comparison of the warper pipeline against DBA"},
  };
  for (const auto& [name, help] : commands) add_common_options(*app.add_subcommand(name, help), cfg);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidationError;
  }
  cfg.command = app.get_subcommands().front()->get_name();

  try {
    const auto r = resolve(cfg);
    if (cfg.command == "train") {
      cmd_train(r, out, err);
    } else if (cfg.command == "align") {
      cmd_align(r, out);
    } else if (cfg.command == "average") {
      cmd_average(r, out);
    } else if (cfg.command == "classify") {
      cmd_classify(r, out);
    } else {
      cmd_bench(r, out);
    }
  } catch (const MissingInput& e) {
    err << "error: " << e.what() << '\n';
    return kMissingInput;
  } catch (const TrainingError& e) {
    err << "training failed: " << e.what() << '\n';
    return kTrainingFailure;
  } catch (const std::exception& e) {
    // Invalid flags, malformed data files, unusable checkpoints.
    err << "error: " << e.what() << '\n';
    return kValidationError;
  }
  return kOk;
}

}  // namespace warpalign::cli
