#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace causalrisk {

// Unique directory under the system temp path, removed recursively on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "causalrisk-");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  // Terminated by a signal other than our timeout kill.
  int signal = 0;
  bool spawn_failed = false;
  std::string stderr_text;
};

// Runs argv[0] (PATH lookup) in its own process group with stdout/stderr redirected to files in
// `work_dir`; the whole group is killed when `timeout` elapses.
ProcessResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& work_dir,
                          std::chrono::milliseconds timeout);

}  // namespace causalrisk
