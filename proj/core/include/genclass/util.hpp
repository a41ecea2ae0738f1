#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace genclass {

inline std::string_view trim_view(std::string_view s) {
  size_t begin = s.find_first_not_of(" \t\r\n\f\v");
  if (begin == std::string_view::npos) return {};
  size_t end = s.find_last_not_of(" \t\r\n\f\v");
  return s.substr(begin, end - begin + 1);
}

inline std::string trim(std::string_view s) { return std::string(trim_view(s)); }

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep);

// Whitespace token count; the default pluggable token counter.
size_t whitespace_token_count(std::string_view s);
std::vector<std::string> whitespace_tokens(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// Runs fn(i) for i in [0, n) on up to max_parallel workers. Results must be
// written into pre-sized slots keyed by i; the first exception is rethrown
// after all workers join.
void parallel_for_indexed(size_t n, size_t max_parallel,
                          const std::function<void(size_t)>& fn);

}  // namespace genclass
