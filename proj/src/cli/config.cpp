#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "lggan/cli.hpp"

namespace lggan::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config::Config(std::map<std::string, std::string> defaults) : values_(std::move(defaults)) {}

void Config::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  merge_stream(in, path.string());
}

void Config::merge_stream(std::istream& is, const std::string& source) {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    try {
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const UsageError& e) {
      throw UsageError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void Config::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown config key '" + key + "'");
  it->second = value;
}

bool Config::has(const std::string& key) const { return !str(key).empty(); }

const std::string& Config::str(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::logic_error("config key '" + key + "' not declared");
  return it->second;
}

long Config::integer(const std::string& key) const {
  const std::string& s = str(key);
  long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw UsageError("config key '" + key + "' expects an integer, got '" + s + "'");
  return v;
}

double Config::real(const std::string& key) const {
  const std::string& s = str(key);
  std::istringstream is(s);
  double v = 0;
  if (!(is >> v) || !is.eof())
    throw UsageError("config key '" + key + "' expects a number, got '" + s + "'");
  return v;
}

bool Config::boolean(const std::string& key) const {
  const std::string& s = str(key);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw UsageError("config key '" + key + "' expects true/false, got '" + s + "'");
}

std::vector<int> Config::int_list(const std::string& key) const {
  std::vector<int> out;
  std::stringstream ss(str(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    int v = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || p != item.data() + item.size())
      throw UsageError("config key '" + key + "' expects a comma-separated integer list");
    out.push_back(v);
  }
  return out;
}

std::filesystem::path Config::path(const std::string& key) const {
  if (!has(key)) throw UsageError("config key '" + key + "' is required");
  return str(key);
}

void Config::dump(std::ostream& os) const {
  for (const auto& [k, v] : values_) os << "# " << k << " = " << v << '\n';
}

}  // namespace lggan::cli
