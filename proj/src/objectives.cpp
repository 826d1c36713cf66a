#include "specphase/objectives.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "specphase/error.hpp"

namespace specphase::objectives {

Rational::Rational(std::int64_t n, std::int64_t d) {
  if (d == 0) throw DomainError("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const std::int64_t g = std::gcd(n, d);
  num = g ? n / g : 0;
  den = g ? d / g : 1;
}

Bipartition::Bipartition(Labels labels) : labels_(std::move(labels)) {
  for (int l : labels_) {
    if (l != 1 && l != 2) throw ParameterError("bipartition labels must be 1 or 2");
  }
}

Bipartition Bipartition::from_mask(std::size_t n, std::uint64_t mask) {
  Labels labels(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    if ((mask >> i) & 1U) labels[i] = 2;
  }
  return Bipartition(std::move(labels));
}

bool Bipartition::unpartitioned() const {
  return std::all_of(labels_.begin(), labels_.end(), [&](int l) { return l == labels_.front(); });
}

Bipartition Bipartition::canonical() const {
  if (labels_.empty() || labels_.front() == 1) return *this;
  Labels flipped = labels_;
  for (int& l : flipped) l = 3 - l;
  return Bipartition(std::move(flipped));
}

namespace {

void check_size(const Graph& g, const Bipartition& part) {
  if (part.size() != g.n_nodes()) throw ParameterError("bipartition length differs from N");
}

}  // namespace

SpinSums spin_sums(const Graph& g, const Bipartition& part) {
  check_size(g, part);
  SpinSums out{0, 0, static_cast<std::int64_t>(g.total_degree())};
  for (NodeId i = 0; i < g.n_nodes(); ++i) {
    const int si = part.spin(i);
    out.c_s += static_cast<std::int64_t>(g.degree(i)) * si;
    for (NodeId j : g.neighbors(i)) out.s_a_s += si * part.spin(j);
  }
  return out;
}

double modularity_q(const Graph& g, const Bipartition& part, double theta) {
  const auto s = spin_sums(g, part);
  if (s.k == 0) return 0.0;
  const double cs = static_cast<double>(s.c_s);
  return static_cast<double>(s.s_a_s) - theta * cs * cs / static_cast<double>(s.k);
}

Rational modularity_q(const Graph& g, const Bipartition& part, const Rational& theta) {
  const auto s = spin_sums(g, part);
  if (s.k == 0) return Rational{0};
  // (sᵀAs K q - p (cᵀs)²) / (K q) for θ = p / q.
  return Rational{s.s_a_s * s.k * theta.den - theta.num * s.c_s * s.c_s, s.k * theta.den};
}

namespace {

struct CutCounts {
  std::int64_t cut = 0;
  std::int64_t k1 = 0;
  std::int64_t k2 = 0;
};

CutCounts count_directly(const Graph& g, const Bipartition& part) {
  check_size(g, part);
  CutCounts out;
  for (NodeId i = 0; i < g.n_nodes(); ++i) {
    const int li = part.labels()[i];
    (li == 1 ? out.k1 : out.k2) += g.degree(i);
    for (NodeId j : g.neighbors(i)) {
      if (i < j && part.labels()[j] != li) ++out.cut;
    }
  }
  return out;
}

}  // namespace

Rational ncut_exact(const Graph& g, const Bipartition& part) {
  const auto c = count_directly(g, part);
  if (c.k1 == 0 || c.k2 == 0) {
    throw SingularPartitionError("normalized cut undefined: one side has zero volume");
  }
  return Rational{(c.k1 + c.k2) * c.cut, c.k1 * c.k2};
}

double ncut(const Graph& g, const Bipartition& part) {
  const auto c = count_directly(g, part);
  if (c.k1 == 0 || c.k2 == 0) {
    throw SingularPartitionError("normalized cut undefined: one side has zero volume");
  }
  return static_cast<double>(c.k1 + c.k2) * static_cast<double>(c.cut) /
         (static_cast<double>(c.k1) * static_cast<double>(c.k2));
}

SpinIdentities spin_identities(const Graph& g, const Bipartition& part) {
  const auto direct = count_directly(g, part);
  const auto s = spin_sums(g, part);
  SpinIdentities out{direct.cut, direct.k1, direct.k2, 0, 0, 0};
  if ((s.k - s.s_a_s) % 4 != 0 || (s.k + s.c_s) % 2 != 0) {
    throw InternalConsistencyError("spin identities: non-integral cut or volume");
  }
  out.cut_identity = (s.k - s.s_a_s) / 4;
  out.k1_identity = (s.k + s.c_s) / 2;
  out.k2_identity = (s.k - s.c_s) / 2;
  if (out.cut_identity != out.cut_direct || out.k1_identity != out.k1_direct ||
      out.k2_identity != out.k2_direct) {
    throw InternalConsistencyError("spin identities disagree with direct counts");
  }
  return out;
}

int ncut_bound_comparison(const Graph& g, const Bipartition& part, const Rational& theta) {
  const auto s = spin_sums(g, part);
  // Multiply both sides by K q: sᵀAs K q - p (cᵀs)² vs K² (q - p).
  const __int128 lhs = static_cast<__int128>(s.s_a_s) * s.k * theta.den -
                       static_cast<__int128>(theta.num) * s.c_s * s.c_s;
  const __int128 rhs = static_cast<__int128>(s.k) * s.k * (theta.den - theta.num);
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

OptimumSet exhaustive_optima(const Graph& g, const Objective& objective) {
  const std::size_t n = g.n_nodes();
  if (n > 20) throw CapacityError("exhaustive enumeration limited to N <= 20, got " + std::to_string(n));
  if (n < 2) throw ParameterError("exhaustive enumeration needs at least two nodes");

  const bool maximize = objective.kind == Objective::Kind::modularity;
  OptimumSet best;
  bool have = false;
  // Node 0 stays in block 1, so masks use bits 1..n-1; mask 0 is unpartitioned.
  const std::uint64_t count = std::uint64_t{1} << (n - 1);
  for (std::uint64_t m = 1; m < count; ++m) {
    Bipartition part = Bipartition::from_mask(n, m << 1);
    Rational value;
    if (maximize) {
      value = modularity_q(g, part, objective.theta);
    } else {
      const auto c = count_directly(g, part);
      if (c.k1 == 0 || c.k2 == 0) continue;
      value = Rational{(c.k1 + c.k2) * c.cut, c.k1 * c.k2};
    }
    const bool better = !have || (maximize ? value > best.value : value < best.value);
    if (better) {
      best.value = value;
      best.partitions.clear();
      have = true;
    }
    if (value == best.value) best.partitions.push_back(std::move(part));
  }
  if (!have) throw SingularPartitionError("no proper bipartition with positive volumes");
  std::sort(best.partitions.begin(), best.partitions.end());
  return best;
}

}  // namespace specphase::objectives
