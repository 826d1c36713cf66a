#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace specphase {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Block labels take values 1 and 2.
using Labels = std::vector<int>;

/// Finite-support degree distribution {(c_t, b_t)} with c_t strictly
/// increasing and b_t summing to one.
class DegreeDistribution {
 public:
  struct Entry {
    int degree;
    double weight;
  };

  /// Validates and takes ownership of the entries. Throws ParameterError
  /// if degrees are not strictly increasing and >= 1, if a weight is not
  /// positive, or if the weights do not sum to one within 1e-12.
  explicit DegreeDistribution(std::vector<Entry> entries);

  /// Single-atom distribution of a c-regular graph.
  static DegreeDistribution regular(int degree);

  std::span<const Entry> entries() const noexcept { return entries_; }
  double mean_degree() const noexcept { return mean_; }
  int max_degree() const noexcept { return entries_.back().degree; }
  int min_degree() const noexcept { return entries_.front().degree; }
  bool is_regular() const noexcept { return entries_.size() == 1; }

  // Metadata recorded by the constructors that truncate or drop mass.
  std::optional<int> tail_cutoff;  // largest retained degree after truncation
  double dropped_mass = 0.0;       // probability mass removed before renormalizing

 private:
  std::vector<Entry> entries_;
  double mean_ = 0.0;
};

struct RegularKind {
  int degree = 3;
  double structure = 1.0;  // Γ in [0, 1]
};

struct SbmKind {
  double c_in = 0.0;
  double c_out = 0.0;
};

struct PlantedSpec {
  std::size_t n_nodes = 0;
  double p1 = 0.5;
  std::variant<RegularKind, SbmKind> kind;
  std::uint64_t seed = 0;

  /// round(p1 * N), half to even.
  std::size_t block1_size() const;
};

/// Immutable simple undirected graph in compressed adjacency form.
class Graph {
 public:
  Graph() = default;

  /// Builds from an edge list. Edges may come in any order and orientation;
  /// self-loops, duplicates and out-of-range endpoints throw ParameterError.
  /// labels must be empty or of size n with values in {1, 2}.
  static Graph from_edges(std::size_t n, std::span<const Edge> edges, Labels labels = {},
                          std::optional<PlantedSpec> provenance = std::nullopt);

  std::size_t n_nodes() const noexcept { return degrees_.size(); }
  std::size_t edge_count() const noexcept { return neighbors_.size() / 2; }
  std::uint64_t total_degree() const noexcept { return neighbors_.size(); }

  std::span<const NodeId> neighbors(NodeId v) const noexcept {
    return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
  }
  int degree(NodeId v) const noexcept { return degrees_[v]; }
  std::span<const int> degrees() const noexcept { return degrees_; }

  bool has_labels() const noexcept { return !labels_.empty(); }
  const Labels& labels() const noexcept { return labels_; }

  /// Absent for graphs read from files or built by hand.
  const std::optional<PlantedSpec>& provenance() const noexcept { return provenance_; }

  /// Edges with u < v in lexicographic order.
  std::vector<Edge> edges() const;

  /// Number of edges whose endpoints carry different labels.
  std::size_t cross_edge_count() const;

  std::size_t isolated_count() const;

  bool operator==(const Graph& other) const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> neighbors_;
  std::vector<int> degrees_;
  Labels labels_;
  std::optional<PlantedSpec> provenance_;
};

// Edge-list text format:
//   # specphase-graph N=<int> K=<int>
//   u v            (one per edge, u < v, lexicographic order)
//   # labels       (optional section)
//   1|2            (N lines)

void write_edge_list(std::ostream& out, const Graph& g);
Graph read_edge_list(std::istream& in);

void write_edge_list_file(const std::string& path, const Graph& g);
Graph read_edge_list_file(const std::string& path);

}  // namespace specphase
