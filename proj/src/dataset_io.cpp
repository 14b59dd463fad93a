#include "lggan/dataset_io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <vector>

namespace lggan {
namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::string body = line.substr(0, line.find('#'));
  std::istringstream ss(body);
  std::vector<std::string> tokens;
  for (std::string t; ss >> t;) tokens.push_back(t);
  return tokens;
}

long parse_int(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "expected integer, got '" + s + "'");
  }
}

}  // namespace

GraphDataset read_dataset(std::istream& in) {
  GraphDataset data;
  long declared = -1;
  bool in_graph = false;
  bool have_labels = false;
  LabeledGraph current;
  int graph_line = 0;
  std::set<Edge> seen;

  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto tok = tokenize(raw);
    if (tok.empty()) continue;
    const std::string& kw = tok[0];
    if (kw == "dataset") {
      if (declared >= 0) throw ParseError(line, "duplicate dataset header");
      if (tok.size() != 5) throw ParseError(line, "dataset header needs 4 fields");
      data.name = tok[1];
      declared = parse_int(tok[2], line);
      data.num_node_labels = static_cast<int>(parse_int(tok[3], line));
      data.num_graph_classes = static_cast<int>(parse_int(tok[4], line));
      if (declared < 0 || data.num_node_labels < 1 || data.num_graph_classes < 1)
        throw ParseError(line, "dataset header values out of range");
      continue;
    }
    if (declared < 0) throw ParseError(line, "missing dataset header");
    if (kw == "graph") {
      if (in_graph) throw ParseError(line, "graph started before previous 'end'");
      if (tok.size() != 4) throw ParseError(line, "graph line needs <id> <n> <class>");
      current = LabeledGraph{};
      current.n = static_cast<int>(parse_int(tok[2], line));
      current.graph_class = static_cast<int>(parse_int(tok[3], line));
      if (current.n < 1) throw ParseError(line, "graph must have at least one node");
      if (current.graph_class < 0 || current.graph_class >= data.num_graph_classes)
        throw ParseError(line, "graph class out of range");
      in_graph = true;
      have_labels = false;
      graph_line = line;
      seen.clear();
    } else if (kw == "labels") {
      if (!in_graph || have_labels) throw ParseError(line, "unexpected labels line");
      if (static_cast<int>(tok.size()) - 1 != current.n)
        throw ParseError(line, "expected " + std::to_string(current.n) + " labels");
      for (std::size_t i = 1; i < tok.size(); ++i) {
        long l = parse_int(tok[i], line);
        if (l < 0 || l >= data.num_node_labels)
          throw ParseError(line, "label-out-of-range at node " + std::to_string(i - 1));
        current.node_labels.push_back(static_cast<int>(l));
      }
      have_labels = true;
    } else if (kw == "edge") {
      if (!in_graph) throw ParseError(line, "edge outside graph");
      if (tok.size() != 3) throw ParseError(line, "edge line needs <u> <v>");
      long u = parse_int(tok[1], line), v = parse_int(tok[2], line);
      if (u < 0 || v < 0 || u >= current.n || v >= current.n)
        throw ParseError(line, "edge endpoint out of range");
      if (u == v) throw ParseError(line, "self-loop at node " + std::to_string(u));
      if (u > v) throw ParseError(line, "edge must be written with u < v");
      if (!seen.insert({static_cast<int>(u), static_cast<int>(v)}).second)
        throw ParseError(line, "duplicate edge");
      current.edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
    } else if (kw == "end") {
      if (!in_graph) throw ParseError(line, "'end' without graph");
      if (!have_labels) throw ParseError(graph_line, "graph has no labels line");
      current.normalize();
      data.graphs.push_back(std::move(current));
      in_graph = false;
    } else {
      throw ParseError(line, "unknown keyword '" + kw + "'");
    }
  }
  if (declared < 0) throw ParseError(line, "missing dataset header");
  if (in_graph) throw ParseError(line, "unterminated graph");
  if (static_cast<long>(data.graphs.size()) != declared)
    throw ParseError(line, "header declares " + std::to_string(declared) + " graphs, found " +
                               std::to_string(data.graphs.size()));
  return data;
}

GraphDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_dataset(in);
}

void write_dataset(std::ostream& out, const GraphDataset& data) {
  out << "dataset " << data.name << ' ' << data.graphs.size() << ' ' << data.num_node_labels
      << ' ' << data.num_graph_classes << '\n';
  for (std::size_t i = 0; i < data.graphs.size(); ++i) {
    const auto& g = data.graphs[i];
    out << "graph " << i << ' ' << g.n << ' ' << g.graph_class << '\n';
    out << "labels";
    for (int l : g.node_labels) out << ' ' << l;
    out << '\n';
    LabeledGraph sorted = g;
    sorted.normalize();
    for (const auto& [u, v] : sorted.edges) out << "edge " << u << ' ' << v << '\n';
    out << "end\n";
  }
}

void write_dataset(const std::filesystem::path& path, const GraphDataset& data) {
  std::ostringstream ss;
  write_dataset(ss, data);
  write_file_atomic(path, ss.str());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace lggan
