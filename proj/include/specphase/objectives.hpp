#pragma once

#include <cstdint>
#include <vector>

#include "specphase/graph.hpp"

namespace specphase::objectives {

/// Exact rational with a positive denominator, reduced to lowest terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d = 1);

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational& a, const Rational& b) { return a.num == b.num && a.den == b.den; }
  friend auto operator<=>(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den <=> static_cast<__int128>(b.num) * a.den;
  }
};

/// Two-way split of the node set; spin s_i = +1 for label 1, -1 for label 2.
class Bipartition {
 public:
  /// Throws ParameterError on labels outside {1, 2}.
  explicit Bipartition(Labels labels);

  /// Bit i of mask set puts node i in block 2.
  static Bipartition from_mask(std::size_t n, std::uint64_t mask);

  const Labels& labels() const noexcept { return labels_; }
  int spin(std::size_t i) const noexcept { return labels_[i] == 1 ? 1 : -1; }
  std::size_t size() const noexcept { return labels_.size(); }
  /// Every node on one side.
  bool unpartitioned() const;

  /// Same partition up to the global label swap: node 0 carries label 1.
  Bipartition canonical() const;

  friend bool operator==(const Bipartition&, const Bipartition&) = default;
  friend auto operator<=>(const Bipartition& a, const Bipartition& b) { return a.labels_ <=> b.labels_; }

 private:
  Labels labels_;
};

/// Integer building blocks of the spin form.
struct SpinSums {
  std::int64_t s_a_s;  // sᵀAs
  std::int64_t c_s;    // cᵀs
  std::int64_t k;      // K
};

SpinSums spin_sums(const Graph& g, const Bipartition& part);

/// Q_θ(s) = sᵀAs - θ (cᵀs)² / K.
double modularity_q(const Graph& g, const Bipartition& part, double theta);
Rational modularity_q(const Graph& g, const Bipartition& part, const Rational& theta);

/// K |E(S1,S2)| / (K1 K2). Throws SingularPartitionError when a side has no volume.
double ncut(const Graph& g, const Bipartition& part);
Rational ncut_exact(const Graph& g, const Bipartition& part);

/// Cut size and block volumes counted directly and through the spin
/// identities cut = (K - sᵀAs)/4, K1 = (K + cᵀs)/2, K2 = (K - cᵀs)/2.
struct SpinIdentities {
  std::int64_t cut_direct, k1_direct, k2_direct;
  std::int64_t cut_identity, k1_identity, k2_identity;
};

/// Throws InternalConsistencyError if the two routes disagree.
SpinIdentities spin_identities(const Graph& g, const Bipartition& part);

struct Objective {
  enum class Kind { modularity, ncut };
  Kind kind = Kind::ncut;
  Rational theta{1};  // modularity only

  static Objective modularity(Rational theta) { return {Kind::modularity, theta}; }
  static Objective normalized_cut() { return {Kind::ncut, Rational{1}}; }
};

struct OptimumSet {
  Rational value;                      // max of Q_θ or min of ncut
  std::vector<Bipartition> partitions; // canonical form, sorted
};

/// Enumerates all 2^(N-1) - 1 proper bipartitions (node 0 fixed to block 1)
/// and returns every optimizer. Ncut skips partitions with a zero-volume
/// side. Throws CapacityError when N > 20.
OptimumSet exhaustive_optima(const Graph& g, const Objective& objective);

/// sᵀAs - θ(cᵀs)²/K <= K(1 - θ), compared exactly. Returns -1, 0 or +1 for
/// LHS below, equal to, or above the bound.
int ncut_bound_comparison(const Graph& g, const Bipartition& part, const Rational& theta);

}  // namespace specphase::objectives
