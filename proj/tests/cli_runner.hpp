#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace testing {

inline std::string fixture(const std::string& name) { return std::string(MQMSPAN_FIXTURES) + "/" + name; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Scratch output directory, removed on destruction.
class ScratchDir {
 public:
  ScratchDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("mqmeval_run_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
  }
  ~ScratchDir() { std::filesystem::remove_all(path_); }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

struct RunResult {
  int exit_code = -1;
  std::string stderr_text;
};

/// Runs the CLI with `args` (already shell-quoted where needed) writing into `out`.
inline RunResult run_cli(const std::string& args, const ScratchDir& out) {
  const auto err = out.path().string() + ".stderr";
  const std::string cmd = std::string(MQMEVAL_PATH) + " " + args + " --out " + out.path().string() +
                          " >/dev/null 2>" + err;
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.stderr_text = slurp(err);
  std::filesystem::remove(err);
  return r;
}

inline std::string span_inputs() {
  return "--segments " + fixture("segments.jsonl") + " --gold " + fixture("gold.jsonl") + " --pred " +
         fixture("pred.jsonl") + " --anomalies " + fixture("anomalies.jsonl");
}

inline std::string impact_inputs(const std::string& correctness = "impact_correctness.jsonl") {
  return "--segments " + fixture("impact_segments.jsonl") + " --pred " + fixture("impact_annotations.jsonl") +
         " --anomalies " + fixture("impact_anomalies.jsonl") + " --correctness " + fixture(correctness);
}

}  // namespace testing
