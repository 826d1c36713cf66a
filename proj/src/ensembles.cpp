#include "specphase/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>

#include "specphase/error.hpp"
#include "specphase/rng.hpp"

namespace specphase {
namespace {

std::uint64_t edge_key(NodeId u, NodeId v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

// Edge multiset with in-place repair of self-loops and multi-edges by
// random endpoint swaps inside one pool (one block, or the cross pool).
class StubMatching {
 public:
  explicit StubMatching(std::size_t expected) { counts_.reserve(expected * 2); }

  void add_pool(std::vector<Edge> edges, bool cross) {
    for (const auto& [u, v] : edges) ++counts_[edge_key(u, v)];
    pools_.push_back({std::move(edges), cross});
  }

  // Returns false when the swap budget runs out before every pool is simple.
  bool repair(Engine& rng, std::uint64_t& budget) {
    for (auto& pool : pools_) {
      bool clean = false;
      while (!clean) {
        clean = true;
        for (std::size_t i = 0; i < pool.edges.size(); ++i) {
          while (is_bad(pool.edges[i])) {
            clean = false;
            if (budget == 0) return false;
            --budget;
            try_swap(pool, i, rng);
          }
        }
      }
    }
    return true;
  }

  std::vector<Edge> all_edges() const {
    std::vector<Edge> out;
    for (const auto& pool : pools_) out.insert(out.end(), pool.edges.begin(), pool.edges.end());
    return out;
  }

 private:
  struct Pool {
    std::vector<Edge> edges;
    bool cross;
  };

  bool is_bad(const Edge& e) const { return e.first == e.second || counts_.at(edge_key(e.first, e.second)) > 1; }

  bool usable(NodeId a, NodeId b) const {
    if (a == b) return false;
    auto it = counts_.find(edge_key(a, b));
    return it == counts_.end() || it->second == 0;
  }

  void try_swap(Pool& pool, std::size_t i, Engine& rng) {
    if (pool.edges.size() < 2) return;
    std::size_t j = uniform_below(rng, pool.edges.size() - 1);
    if (j >= i) ++j;
    auto [u, v] = pool.edges[i];
    auto [x, y] = pool.edges[j];
    Edge e1, e2;
    if (pool.cross || uniform_below(rng, 2) == 0) {
      // Cross pools keep the block-1 endpoint first, so this keeps edges crossing.
      e1 = {u, y};
      e2 = {x, v};
    } else {
      e1 = {u, x};
      e2 = {v, y};
    }
    if (!usable(e1.first, e1.second) || !usable(e2.first, e2.second)) return;
    if (edge_key(e1.first, e1.second) == edge_key(e2.first, e2.second)) return;
    --counts_[edge_key(u, v)];
    --counts_[edge_key(x, y)];
    ++counts_[edge_key(e1.first, e1.second)];
    ++counts_[edge_key(e2.first, e2.second)];
    pool.edges[i] = e1;
    pool.edges[j] = e2;
  }

  std::unordered_map<std::uint64_t, int> counts_;
  std::vector<Pool> pools_;
};

std::vector<NodeId> make_stubs(NodeId first, NodeId last, int degree) {
  std::vector<NodeId> stubs;
  stubs.reserve(static_cast<std::size_t>(last - first) * degree);
  for (NodeId v = first; v < last; ++v) {
    for (int k = 0; k < degree; ++k) stubs.push_back(v);
  }
  return stubs;
}

Labels planted_labels(std::size_t n, std::size_t n1) {
  Labels labels(n, 2);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n1), 1);
  return labels;
}

void check_common(const PlantedSpec& spec) {
  if (spec.n_nodes < 2) throw ParameterError("N must be at least 2");
  if (!(spec.p1 > 0.0 && spec.p1 < 1.0)) throw ParameterError("p1 must lie in (0, 1)");
  const std::size_t n1 = spec.block1_size();
  if (n1 == 0 || n1 == spec.n_nodes) throw ParameterError("round(p1 N) leaves a block empty");
}

}  // namespace

Graph gen_planted_regular(const PlantedSpec& spec) {
  check_common(spec);
  const auto* kind = std::get_if<RegularKind>(&spec.kind);
  if (kind == nullptr) throw ParameterError("gen_planted_regular needs a Regular spec");
  const int c = kind->degree;
  const double structure = kind->structure;
  if (c < 1) throw ParameterError("degree must be >= 1");
  if (!(structure >= 0.0 && structure <= 1.0)) throw ParameterError("Γ must lie in [0, 1]");

  const std::size_t n = spec.n_nodes;
  const std::size_t n1 = spec.block1_size();
  const std::size_t n2 = n - n1;
  const std::uint64_t stubs1 = static_cast<std::uint64_t>(c) * n1;
  const std::uint64_t stubs2 = static_cast<std::uint64_t>(c) * n2;
  if ((stubs1 + stubs2) % 2 != 0) {
    throw InfeasibleError("stub parity: c*N = " + std::to_string(stubs1 + stubs2) + " is odd");
  }

  const double gamma = c * spec.p1 * (1.0 - spec.p1) * (1.0 - structure);
  auto cross = static_cast<std::uint64_t>(std::nearbyint(gamma * static_cast<double>(n)));
  if ((stubs1 - cross) % 2 != 0) {
    if (cross > 0) {
      --cross;
    } else if (structure < 1.0) {
      ++cross;
    } else {
      throw InfeasibleError("intra-block stub parity: Γ = 1 needs zero cross edges but c*n1 = " +
                            std::to_string(stubs1) + " is odd");
    }
  }
  if (cross > std::min(stubs1, stubs2) || cross > static_cast<std::uint64_t>(n1) * n2) {
    throw InfeasibleError("cross-edge count " + std::to_string(cross) + " exceeds what the blocks admit");
  }
  const std::uint64_t intra1 = stubs1 - cross;
  const std::uint64_t intra2 = stubs2 - cross;
  if (intra1 > static_cast<std::uint64_t>(n1) * (n1 - 1) ||
      intra2 > static_cast<std::uint64_t>(n2) * (n2 - 1)) {
    throw InfeasibleError("intra-block degree: blocks of size " + std::to_string(n1) + " and " +
                          std::to_string(n2) + " cannot hold the required intra-block edges");
  }
  if (cross == 0 && (c > static_cast<int>(n1) - 1 || c > static_cast<int>(n2) - 1)) {
    throw InfeasibleError("intra-block degree: c = " + std::to_string(c) +
                          " exceeds block size - 1 with no cross edges");
  }

  constexpr int kRegenerations = 20;
  for (int attempt = 0; attempt < kRegenerations; ++attempt) {
    Engine rng = make_engine(attempt == 0 ? spec.seed : derive_seed(spec.seed, {0x7265u, static_cast<std::uint64_t>(attempt)}));
    auto block1 = make_stubs(0, static_cast<NodeId>(n1), c);
    auto block2 = make_stubs(static_cast<NodeId>(n1), static_cast<NodeId>(n), c);
    shuffle<NodeId>(block1, rng);
    shuffle<NodeId>(block2, rng);

    StubMatching matching(stubs1 + stubs2);
    std::vector<Edge> cross_edges;
    cross_edges.reserve(cross);
    for (std::uint64_t i = 0; i < cross; ++i) cross_edges.emplace_back(block1[i], block2[i]);
    matching.add_pool(std::move(cross_edges), true);
    for (const auto* block : {&block1, &block2}) {
      std::vector<Edge> intra;
      intra.reserve((block->size() - cross) / 2);
      for (std::size_t i = cross; i + 1 < block->size(); i += 2) intra.emplace_back((*block)[i], (*block)[i + 1]);
      matching.add_pool(std::move(intra), false);
    }

    std::uint64_t budget = 100 * static_cast<std::uint64_t>(n);
    if (!matching.repair(rng, budget)) continue;
    const auto edges = matching.all_edges();
    return Graph::from_edges(n, edges, planted_labels(n, n1), spec);
  }
  throw GenerationError("stub matching failed after " + std::to_string(kRegenerations) +
                        " regenerations with a budget of 100*N swaps each");
}

Graph gen_sbm(const PlantedSpec& spec) {
  check_common(spec);
  const auto* kind = std::get_if<SbmKind>(&spec.kind);
  if (kind == nullptr) throw ParameterError("gen_sbm needs an SBM spec");
  const double nd = static_cast<double>(spec.n_nodes);
  const double p_in = kind->c_in / nd;
  const double p_out = kind->c_out / nd;
  if (!(p_in >= 0.0 && p_in <= 1.0) || !(p_out >= 0.0 && p_out <= 1.0)) {
    throw ParameterError("SBM probabilities c_in/N and c_out/N must lie in [0, 1]");
  }

  const std::size_t n = spec.n_nodes;
  const std::size_t n1 = spec.block1_size();
  Engine rng = make_engine(spec.seed);
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>((kind->c_in + kind->c_out) * nd / 2 * 1.1) + 16);

  // Index of the next success in a Bernoulli(p) sequence, counted from `from`.
  auto next_hit = [&rng](std::uint64_t from, double p) -> std::uint64_t {
    if (p >= 1.0) return from;
    const double r = uniform01(rng);
    const double skip = std::floor(std::log1p(-r) / std::log1p(-p));
    if (skip >= 9.0e18) return std::numeric_limits<std::uint64_t>::max();
    return from + static_cast<std::uint64_t>(skip);
  };

  // Upper-triangular pairs inside [first, first + size), ordered row by row.
  auto sample_block = [&](NodeId first, std::uint64_t size, double p) {
    if (p <= 0.0 || size < 2) return;
    std::uint64_t row = 1;  // pair (row, col) with col < row
    std::uint64_t col = 0;
    std::uint64_t pos = next_hit(0, p);
    std::uint64_t row_start = 0;  // linear index of (row, 0)
    while (true) {
      while (row < size && pos >= row_start + row) {
        row_start += row;
        ++row;
      }
      if (row >= size) break;
      col = pos - row_start;
      edges.emplace_back(first + static_cast<NodeId>(col), first + static_cast<NodeId>(row));
      pos = next_hit(pos + 1, p);
    }
  };

  sample_block(0, n1, p_in);
  sample_block(static_cast<NodeId>(n1), n - n1, p_in);
  if (p_out > 0.0) {
    const std::uint64_t n2 = n - n1;
    const std::uint64_t total = static_cast<std::uint64_t>(n1) * n2;
    for (std::uint64_t pos = next_hit(0, p_out); pos < total; pos = next_hit(pos + 1, p_out)) {
      edges.emplace_back(static_cast<NodeId>(pos / n2), static_cast<NodeId>(n1 + pos % n2));
    }
  }
  return Graph::from_edges(n, edges, planted_labels(n, n1), spec);
}

Graph generate(const PlantedSpec& spec) {
  if (std::holds_alternative<RegularKind>(spec.kind)) return gen_planted_regular(spec);
  return gen_sbm(spec);
}

namespace {

void check_conversion_inputs(double mean_degree, double p1) {
  if (!(mean_degree > 0.0)) throw DomainError("mean degree must be positive");
  if (!(p1 > 0.0 && p1 < 1.0)) throw DomainError("p1 must lie in (0, 1)");
}

double same_block_mass(double p1) { return p1 * p1 + (1.0 - p1) * (1.0 - p1); }

}  // namespace

StructureValues from_structure(double mean_degree, double p1, double structure) {
  check_conversion_inputs(mean_degree, p1);
  if (!(structure >= 0.0 && structure <= 1.0)) {
    throw DomainError("Γ must lie in [0, 1] (Γ > 1 implies c_out < 0)");
  }
  const double p2 = 1.0 - p1;
  return {structure, mean_degree * p1 * p2 * (1.0 - structure),
          mean_degree * structure / same_block_mass(p1)};
}

StructureValues from_gamma(double mean_degree, double p1, double gamma) {
  check_conversion_inputs(mean_degree, p1);
  if (!(gamma >= 0.0)) throw DomainError("γ must be nonnegative");
  const double structure = 1.0 - gamma / (mean_degree * p1 * (1.0 - p1));
  if (structure < 0.0) throw DomainError("γ exceeds the uniform-graph value c̄ p1 p2 (Γ < 0)");
  return {structure, gamma, mean_degree * structure / same_block_mass(p1)};
}

StructureValues from_cin_minus_cout(double mean_degree, double p1, double difference) {
  check_conversion_inputs(mean_degree, p1);
  const double structure = difference * same_block_mass(p1) / mean_degree;
  if (structure > 1.0) throw DomainError("c_in - c_out too large: implies c_out < 0");
  if (structure < 0.0) throw DomainError("c_in - c_out must be nonnegative");
  return {structure, mean_degree * p1 * (1.0 - p1) * (1.0 - structure), difference};
}

SbmRates sbm_rates(double mean_degree, double p1, double structure) {
  const auto v = from_structure(mean_degree, p1, structure);
  const double c_out = mean_degree * (1.0 - structure);
  return {c_out + v.cin_minus_cout, c_out};
}

DegreeDistribution empirical_degree_distribution(const Graph& g) {
  if (g.n_nodes() == 0) throw ParameterError("empirical degree distribution of an empty graph");
  std::map<int, std::size_t> counts;
  for (int d : g.degrees()) ++counts[d];
  const std::size_t isolated = counts.count(0) ? counts[0] : 0;
  counts.erase(0);
  if (counts.empty()) throw ParameterError("graph has no edges");
  const double kept = static_cast<double>(g.n_nodes() - isolated);
  std::vector<DegreeDistribution::Entry> entries;
  for (const auto& [d, cnt] : counts) entries.push_back({d, static_cast<double>(cnt) / kept});
  DegreeDistribution dist(std::move(entries));
  dist.dropped_mass = static_cast<double>(isolated) / static_cast<double>(g.n_nodes());
  return dist;
}

}  // namespace specphase
