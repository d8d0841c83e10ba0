#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "mqmspan/model.hpp"

namespace testing {

inline mqmspan::ErrorSpan span(std::size_t start, std::size_t end, std::string text = "x",
                               mqmspan::Severity severity = mqmspan::Severity::major) {
  mqmspan::ErrorSpan s;
  s.start = start;
  s.end = end;
  s.has_offsets = true;
  s.offsets_valid = true;
  s.text = std::move(text);
  s.severity = severity;
  return s;
}

inline mqmspan::Segment segment(std::string id, std::string language, std::string target,
                                std::string source = "source text") {
  mqmspan::Segment s;
  s.segment_id = id;
  s.item_id = id;
  s.dataset = "ds";
  s.language = std::move(language);
  s.source_text = std::move(source);
  s.target_text = std::move(target);
  return s;
}

/// Temporary file removed on destruction.
class TempFile {
 public:
  explicit TempFile(const std::string& content, const std::string& suffix = ".jsonl") {
    static int counter = 0;
    path_ = (std::filesystem::temp_directory_path() /
             ("mqmspan_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + suffix))
                .string();
    std::ofstream(path_) << content;
  }
  ~TempFile() { std::filesystem::remove(path_); }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace testing
