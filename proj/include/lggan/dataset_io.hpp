#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "lggan/graph.hpp"

namespace lggan {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Line-oriented dataset format:
//   dataset <name> <num_graphs> <num_node_labels> <num_graph_classes>
//   graph <id> <n> <class>
//   labels <l_0> ... <l_{n-1}>
//   edge <u> <v>
//   end
// '#' starts a comment.
GraphDataset read_dataset(std::istream& in);
GraphDataset read_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, const GraphDataset& data);
void write_dataset(const std::filesystem::path& path, const GraphDataset& data);

// Writes to a sibling temporary and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace lggan
