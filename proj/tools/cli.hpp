#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace warpalign::cli {

enum ExitCode : int {
  kOk = 0,
  kValidationError = 1,
  kMissingInput = 2,
  kTrainingFailure = 3,
};

// A dataset split or checkpoint the command needs is not on disk.
class MissingInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::filesystem::path data_dir;
  std::vector<std::string> names;
  std::optional<std::string> label;
  std::string method = "all";
  std::size_t epochs = 25;
  double lr = 1e-3;
  double lambda1 = 0.5;
  double lambda2 = 0.5;
  std::size_t segments = 4;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::filesystem::path out_dir = ".";
  std::string format = "csv";
  std::size_t repeat = 1;
};

/// Parse and execute one command line. Diagnostics go to `err`, short
/// summaries to `out`. Returns a process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Worker count for fan-out: WARPALIGN_THREADS when set and positive,
/// otherwise the hardware concurrency.
std::size_t thread_budget();

}  // namespace warpalign::cli
