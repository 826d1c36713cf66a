#include <doctest.h>

#include <set>

#include "oracle.hpp"
#include "specphase/error.hpp"
#include "specphase/objectives.hpp"

using namespace specphase;
using namespace specphase::objectives;

namespace {

Bipartition split(std::initializer_list<int> labels) { return Bipartition(Labels(labels)); }

// Q of the double-sum form: Σ_r Σ_{i,j in S_r} (A_ij - θ c_i c_j / K), as a
// rational with θ = p / q, evaluated entry by entry.
Rational double_sum_q(const Graph& g, const Bipartition& part, const Rational& theta) {
  const auto a = oracle::adjacency(g);
  const std::size_t n = g.n_nodes();
  std::int64_t k = 0;
  std::vector<std::int64_t> c(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) c[i] += static_cast<std::int64_t>(a[i][j]);
    k += c[i];
  }
  std::int64_t adj = 0, null = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (part.labels()[i] != part.labels()[j]) continue;
      adj += static_cast<std::int64_t>(a[i][j]);
      null += c[i] * c[j];
    }
  }
  return Rational{adj * k * theta.den - theta.num * null, k * theta.den};
}

Rational sub(const Rational& a, const Rational& b) {
  return Rational{a.num * b.den - b.num * a.den, a.den * b.den};
}

Rational scale(const Rational& a, std::int64_t m) { return Rational{a.num * m, a.den}; }

std::set<Labels> as_set(const OptimumSet& s) {
  std::set<Labels> out;
  for (const auto& p : s.partitions) out.insert(p.labels());
  return out;
}

}  // namespace

TEST_CASE("rational arithmetic is reduced and ordered") {
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(-3, -6) == Rational(1, 2));
  CHECK(Rational(1, -2).den == 2);
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK_THROWS_AS(Rational(1, 0), DomainError);
}

TEST_CASE("bipartition basics") {
  CHECK_THROWS_AS(Bipartition(Labels{1, 0}), ParameterError);
  const auto p = split({2, 1, 1});
  CHECK(p.spin(0) == -1);
  CHECK(p.spin(1) == 1);
  CHECK(p.canonical().labels() == Labels{1, 2, 2});
  CHECK(split({1, 1}).unpartitioned());
  CHECK(Bipartition::from_mask(4, 0b0110).labels() == Labels{1, 2, 2, 1});
}

TEST_CASE("modularity in spin form") {
  std::mt19937_64 rng(1);
  const Graph g = oracle::random_graph(12, 0.3, rng);
  CHECK(modularity_q(g, split({1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1}), 1.0) == doctest::Approx(0.0));

  const Graph k4s = oracle::two_k4();
  const auto comp = split({1, 1, 1, 1, 2, 2, 2, 2});
  const auto sums = spin_sums(k4s, comp);
  CHECK(sums.s_a_s == 24);
  CHECK(sums.c_s == 0);
  CHECK(modularity_q(k4s, comp, 1.0) == 24.0);
  CHECK(modularity_q(k4s, comp, Rational{1}) == Rational{24});

  const Graph c4 = oracle::cycle(4);
  const auto halves = split({1, 1, 2, 2});
  CHECK(modularity_q(c4, halves, 1.0) == 0.0);
}

TEST_CASE("normalized cut") {
  const Graph c4 = oracle::cycle(4);
  CHECK(ncut(c4, split({1, 1, 2, 2})) == 1.0);
  CHECK(ncut_exact(c4, split({1, 1, 2, 2})) == Rational{1});
  CHECK(ncut(oracle::two_k4(), split({1, 1, 1, 1, 2, 2, 2, 2})) == 0.0);
  CHECK_THROWS_AS(ncut(c4, split({1, 1, 1, 1})), SingularPartitionError);
  // A side made of isolated nodes has zero volume.
  const Graph g = oracle::from_pairs(3, {{0, 1}});
  CHECK_THROWS_AS(ncut(g, split({1, 1, 2})), SingularPartitionError);
}

TEST_CASE("spin identities") {
  const Graph c4 = oracle::cycle(4);
  const auto id = spin_identities(c4, split({1, 1, 2, 2}));
  CHECK(id.cut_direct == 2);
  CHECK(id.cut_identity == 2);

  std::mt19937_64 rng(5);
  const Graph g = oracle::random_graph(15, 0.3, rng);
  const auto all = spin_identities(g, Bipartition(Labels(15, 1)));
  CHECK(all.k1_identity == static_cast<std::int64_t>(g.total_degree()));
  CHECK(all.k2_identity == 0);

  std::uniform_int_distribution<int> size(2, 32);
  std::bernoulli_distribution coin(0.5);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = size(rng);
    const Graph h = oracle::random_graph(n, 0.25, rng);
    Labels labels(n);
    for (auto& l : labels) l = coin(rng) ? 1 : 2;
    const auto r = spin_identities(h, Bipartition(labels));
    CHECK(r.cut_direct == r.cut_identity);
    CHECK(r.k1_direct == r.k1_identity);
    CHECK(r.k2_direct == r.k2_identity);
  }
}

TEST_CASE("spin form equals twice the double-sum form minus K(1 - θ)") {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 10; ++rep) {
    const Graph g = oracle::random_connected(7, 0.4, rng);
    const Rational theta{rep + 1, 3};
    const std::int64_t k = static_cast<std::int64_t>(g.total_degree());
    const Rational constant{k * (theta.den - theta.num), theta.den};
    for (std::uint64_t m = 0; m < 64; ++m) {
      const auto part = Bipartition::from_mask(7, m << 1);
      CHECK(modularity_q(g, part, theta) == sub(scale(double_sum_q(g, part, theta), 2), constant));
    }
  }
}

TEST_CASE("Q is decreasing in θ unless cᵀs = 0") {
  std::mt19937_64 rng(10);
  const Graph g = oracle::random_connected(9, 0.4, rng);
  for (std::uint64_t m = 1; m < 256; ++m) {
    const auto part = Bipartition::from_mask(9, m << 1);
    const auto s = spin_sums(g, part);
    const auto lo = modularity_q(g, part, Rational{1, 2});
    const auto hi = modularity_q(g, part, Rational{3, 2});
    if (s.c_s == 0) CHECK(lo == hi);
    else CHECK(hi < lo);
  }
}

TEST_CASE("exhaustive optima on small graphs") {
  const auto k4s = exhaustive_optima(oracle::two_k4(), Objective::normalized_cut());
  CHECK(k4s.value == Rational{0});
  REQUIRE(k4s.partitions.size() == 1);
  CHECK(k4s.partitions[0].labels() == Labels{1, 1, 1, 1, 2, 2, 2, 2});

  const Graph c4 = oracle::cycle(4);
  const auto nc = exhaustive_optima(c4, Objective::normalized_cut());
  CHECK(nc.value == Rational{1});
  CHECK(as_set(nc) == std::set<Labels>{Labels{1, 1, 2, 2}, Labels{1, 2, 2, 1}});

  const auto mod = exhaustive_optima(c4, Objective::modularity(nc.value));
  CHECK(as_set(mod) == as_set(nc));

  CHECK_THROWS_AS(exhaustive_optima(oracle::complete(21), Objective::normalized_cut()), CapacityError);
}

TEST_CASE("enumeration covers every proper bipartition once") {
  // On K5 every proper bipartition has Ncut = 5/4, so all 2^4 - 1 tie.
  const auto nc = exhaustive_optima(oracle::complete(5), Objective::normalized_cut());
  CHECK(nc.value == Rational{5, 4});
  CHECK(nc.partitions.size() == 15);
  CHECK(as_set(nc).size() == 15);

  // With θ = 0, Q = (Σs)² - 5 over proper splits is maximal on the five
  // 1|4 splits.
  const auto q = exhaustive_optima(oracle::complete(5), Objective::modularity(Rational{0}));
  CHECK(q.value == Rational{4});
  CHECK(q.partitions.size() == 5);
}

TEST_CASE("minimum normalized cut equals maximum Q at θ*") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(5, 10);
  for (int rep = 0; rep < 30; ++rep) {
    const Graph g = oracle::random_connected(size(rng), 0.4, rng);
    const auto nc = exhaustive_optima(g, Objective::normalized_cut());
    const auto mod = exhaustive_optima(g, Objective::modularity(nc.value));
    CHECK(as_set(mod) == as_set(nc));
    const std::set<Labels> optimum = as_set(nc);
    const std::uint64_t count = std::uint64_t{1} << (g.n_nodes() - 1);
    for (std::uint64_t m = 1; m < count; ++m) {
      const auto part = Bipartition::from_mask(g.n_nodes(), m << 1);
      const int cmp = ncut_bound_comparison(g, part, nc.value);
      CHECK(cmp <= 0);
      CHECK((cmp == 0) == (optimum.count(part.labels()) == 1));
    }
  }
}
