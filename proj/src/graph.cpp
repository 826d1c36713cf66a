#include "specphase/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "specphase/error.hpp"

namespace specphase {

DegreeDistribution::DegreeDistribution(std::vector<Entry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw ParameterError("degree distribution: empty support");
  double total = 0.0;
  int prev = 0;
  for (const auto& e : entries_) {
    if (e.degree < 1) throw ParameterError("degree distribution: degrees must be >= 1");
    if (e.degree <= prev) throw ParameterError("degree distribution: degrees must be strictly increasing");
    if (!(e.weight > 0.0)) throw ParameterError("degree distribution: weights must be positive");
    prev = e.degree;
    total += e.weight;
    mean_ += e.weight * e.degree;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ParameterError("degree distribution: weights sum to " + std::to_string(total));
  }
}

DegreeDistribution DegreeDistribution::regular(int degree) {
  return DegreeDistribution({{degree, 1.0}});
}

std::size_t PlantedSpec::block1_size() const {
  return static_cast<std::size_t>(std::nearbyint(p1 * static_cast<double>(n_nodes)));
}

Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges, Labels labels,
                        std::optional<PlantedSpec> provenance) {
  if (n > std::numeric_limits<NodeId>::max()) throw ParameterError("graph too large");
  if (!labels.empty()) {
    if (labels.size() != n) throw ParameterError("labels: expected one label per node");
    for (int l : labels) {
      if (l != 1 && l != 2) throw ParameterError("labels: values must be 1 or 2");
    }
  }

  Graph g;
  g.degrees_.assign(n, 0);
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) throw ParameterError("edge endpoint out of range");
    if (u == v) throw ParameterError("self-loop at node " + std::to_string(u));
    ++g.degrees_[u];
    ++g.degrees_[v];
  }
  g.offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] = g.offsets_[i] + g.degrees_[i];
  g.neighbors_.resize(g.offsets_[n]);
  std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const auto& [u, v] : edges) {
    g.neighbors_[fill[u]++] = v;
    g.neighbors_[fill[v]++] = u;
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto first = g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]);
    auto last = g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]);
    std::sort(first, last);
    if (std::adjacent_find(first, last) != last) {
      throw ParameterError("duplicate edge at node " + std::to_string(i));
    }
  }
  g.labels_ = std::move(labels);
  g.provenance_ = std::move(provenance);
  return g;
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (NodeId u = 0; u < n_nodes(); ++u) {
    for (NodeId v : neighbors(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

std::size_t Graph::cross_edge_count() const {
  if (labels_.empty()) return 0;
  std::size_t count = 0;
  for (NodeId u = 0; u < n_nodes(); ++u) {
    for (NodeId v : neighbors(u)) {
      if (u < v && labels_[u] != labels_[v]) ++count;
    }
  }
  return count;
}

std::size_t Graph::isolated_count() const {
  return static_cast<std::size_t>(std::count(degrees_.begin(), degrees_.end(), 0));
}

bool Graph::operator==(const Graph& other) const {
  return offsets_ == other.offsets_ && neighbors_ == other.neighbors_ && labels_ == other.labels_;
}

void write_edge_list(std::ostream& out, const Graph& g) {
  out << "# specphase-graph N=" << g.n_nodes() << " K=" << g.total_degree() << '\n';
  for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
  if (g.has_labels()) {
    out << "# labels\n";
    for (int l : g.labels()) out << l << '\n';
  }
}

namespace {

std::uint64_t parse_uint(const std::string& token, const char* what, std::size_t line_no) {
  std::size_t pos = 0;
  unsigned long long value = 0;
  try {
    if (token.empty() || token[0] == '-' || token[0] == '+') throw std::invalid_argument(token);
    value = std::stoull(token, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != token.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " '" + token + "'");
  }
  return value;
}

}  // namespace

Graph read_edge_list(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("empty input");
  std::uint64_t n = 0;
  std::uint64_t k = 0;
  {
    std::istringstream hs(line);
    std::string hash, tag, nf, kf, extra;
    hs >> hash >> tag >> nf >> kf;
    if (hash != "#" || tag != "specphase-graph" || nf.rfind("N=", 0) != 0 ||
        kf.rfind("K=", 0) != 0 || (hs >> extra)) {
      throw ParseError("line 1: expected '# specphase-graph N=<int> K=<int>'");
    }
    n = parse_uint(nf.substr(2), "N", 1);
    k = parse_uint(kf.substr(2), "K", 1);
  }

  std::vector<Edge> edges;
  Labels labels;
  bool in_labels = false;
  Edge prev{0, 0};
  while (std::getline(in, line)) {
    ++line_no;
    if (!in_labels && line == "# labels") {
      in_labels = true;
      continue;
    }
    std::istringstream ls(line);
    std::string a, b, extra;
    if (in_labels) {
      ls >> a;
      if (a != "1" && a != "2") {
        throw ParseError("line " + std::to_string(line_no) + ": label must be 1 or 2");
      }
      labels.push_back(a == "1" ? 1 : 2);
      continue;
    }
    if (!(ls >> a >> b) || (ls >> extra)) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 'u v'");
    }
    const auto u = parse_uint(a, "endpoint", line_no);
    const auto v = parse_uint(b, "endpoint", line_no);
    if (u >= v) throw ParseError("line " + std::to_string(line_no) + ": endpoints must satisfy u < v");
    if (v >= n) throw ParseError("line " + std::to_string(line_no) + ": endpoint out of range");
    Edge e{static_cast<NodeId>(u), static_cast<NodeId>(v)};
    if (!edges.empty() && !(prev < e)) {
      throw ParseError("line " + std::to_string(line_no) + ": edges not sorted or duplicated");
    }
    edges.push_back(e);
    prev = e;
  }
  if (2 * edges.size() != k) {
    throw ParseError("header K=" + std::to_string(k) + " but " + std::to_string(edges.size()) +
                     " edges listed");
  }
  if (in_labels && labels.size() != n) {
    throw ParseError("labels section has " + std::to_string(labels.size()) + " entries, expected " +
                     std::to_string(n));
  }
  return Graph::from_edges(n, edges, std::move(labels));
}

void write_edge_list_file(const std::string& path, const Graph& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot open '" + path + "' for writing");
  write_edge_list(out, g);
  if (!out) throw ParameterError("write failed for '" + path + "'");
}

Graph read_edge_list_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_edge_list(in);
}

}  // namespace specphase
