#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace lggan::cli {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kDivergence = 3 };

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Flat key = value configuration. Keys are fixed per command (with defaults);
// anything else is rejected.
class Config {
 public:
  explicit Config(std::map<std::string, std::string> defaults);

  // '#' comments, blank lines, "key = value" otherwise.
  void merge_file(const std::filesystem::path& path);
  void merge_stream(std::istream& is, const std::string& source);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;  // present and nonempty
  const std::string& str(const std::string& key) const;
  long integer(const std::string& key) const;
  double real(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::vector<int> int_list(const std::string& key) const;
  // Path-valued key that must be set.
  std::filesystem::path path(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  void dump(std::ostream& os) const;

 private:
  std::map<std::string, std::string> values_;
};

// argv[0] excluded. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lggan::cli
