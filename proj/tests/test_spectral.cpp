#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "oracle.hpp"
#include "specphase/ensembles.hpp"
#include "specphase/error.hpp"
#include "specphase/spectral.hpp"

using namespace specphase;

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> x(n);
  for (auto& v : x) v = normal(rng);
  return x;
}

Graph planted_regular(std::size_t n, int c, double structure, std::uint64_t seed) {
  return gen_planted_regular(PlantedSpec{n, 0.5, RegularKind{c, structure}, seed});
}

}  // namespace

TEST_CASE("modularity matvec on a path") {
  const Graph g = oracle::from_pairs(3, {{0, 1}, {1, 2}});
  const ModularityOperator op(g, 1.0);
  const std::vector<double> x{1.0, 0.0, 0.0};
  const auto y = modularity_matvec(op, x);
  CHECK(y[0] == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(y[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(y[2] == doctest::Approx(-0.25).epsilon(1e-15));

  const auto zero = modularity_matvec(op, std::vector<double>(3, 0.0));
  for (double v : zero) CHECK(v == 0.0);
}

TEST_CASE("ones vector on a regular graph has eigenvalue c(1 - θ)") {
  const Graph g = planted_regular(200, 4, 0.6, 2);
  for (double theta : {0.02, 0.5, 1.0, 2.0}) {
    const ModularityOperator op(g, theta);
    const auto y = modularity_matvec(op, std::vector<double>(200, 1.0));
    for (double v : y) CHECK(v == doctest::Approx(4.0 * (1.0 - theta)).epsilon(1e-12));
  }
}

TEST_CASE("modularity operator errors") {
  const Graph empty = oracle::from_pairs(3, {});
  CHECK_THROWS_AS(ModularityOperator(empty, 1.0), OperatorError);
  const Graph g = oracle::complete(3);
  CHECK_THROWS_AS(ModularityOperator(g, 0.0), ParameterError);
  CHECK_THROWS_AS(ModularityOperator(g, -1.0), ParameterError);
}

TEST_CASE("modularity operator is symmetric") {
  std::mt19937_64 rng(5);
  const Graph g = gen_sbm(PlantedSpec{2000, 0.5, SbmKind{8.0, 2.0}, 1});
  const ModularityOperator op(g, 1.3);
  for (int rep = 0; rep < 100; ++rep) {
    const auto x = random_vector(2000, rng);
    const auto y = random_vector(2000, rng);
    const double lhs = dot(y, modularity_matvec(op, x));
    const double rhs = dot(x, modularity_matvec(op, y));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * 2000);
  }
}

TEST_CASE("matrix-free action equals the dense modularity matrix") {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 10; ++rep) {
    const Graph g = oracle::random_graph(25, 0.2, rng);
    if (g.edge_count() == 0) continue;
    const auto dense = oracle::dense_modularity(g, 0.7);
    const ModularityOperator op(g, 0.7);
    const auto x = random_vector(25, rng);
    const auto y = modularity_matvec(op, x);
    for (std::size_t i = 0; i < 25; ++i) CHECK(y[i] == doctest::Approx(dot(dense[i], x)).epsilon(1e-12));
  }
}

TEST_CASE("complete graph K3 at θ = 1 is unpartitioned with λ₁ = 0") {
  const Graph g = oracle::complete(3);
  const auto dense = oracle::jacobi_eigenvalues(oracle::dense_modularity(g, 1.0));
  CHECK(dense[2] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(dense[0] == doctest::Approx(-1.0).epsilon(1e-12));

  const auto o = spectral_bisection(g, 1.0);
  CHECK(std::abs(o.lambda1) <= 1e-8);
  CHECK(o.unpartitioned);
  for (double v : o.vector) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("two disjoint K4 give λ₁ = 3 and the planted split") {
  const Graph g = oracle::two_k4();
  const auto o = spectral_bisection(g, 1.0);
  CHECK(o.lambda1 == doctest::Approx(3.0).epsilon(1e-8));
  CHECK_FALSE(o.unpartitioned);
  REQUIRE(o.overlap.has_value());
  CHECK(*o.overlap == 1.0);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(std::abs(o.vector[i]) == doctest::Approx(1.0).epsilon(1e-6));
    const bool same_side = (o.vector[i] > 0) == (o.vector[0] > 0);
    CHECK(same_side == (i < 4));
  }
}

TEST_CASE("random 3-regular graph has λ₁ near 2√2") {
  const Graph g = planted_regular(10000, 3, 0.0, 21);
  const auto o = spectral_bisection(g, 1.0);
  CHECK(std::abs(o.lambda1 - 2.0 * std::sqrt(2.0)) < 0.1);
}

TEST_CASE("leading eigenpair matches dense diagonalization on small graphs") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> size(4, 64);
  std::uniform_real_distribution<double> theta(0.1, 2.0);
  int checked = 0;
  while (checked < 40) {
    const int n = size(rng);
    const Graph g = oracle::random_graph(n, 3.0 / n + 0.05, rng);
    if (g.edge_count() == 0) continue;
    const double t = theta(rng);
    const auto dense = oracle::jacobi_eigenvalues(oracle::dense_modularity(g, t));
    LanczosOptions opts;
    opts.seed = static_cast<std::uint64_t>(checked);
    const auto pair = leading_eigenpair(ModularityOperator(g, t), opts);
    CHECK(std::abs(pair.value - dense.back()) <= 1e-8);
    CHECK(pair.residual <= opts.tol);
    ++checked;
  }
}

TEST_CASE("eigenpair normalization, residual and sign convention") {
  const Graph g = planted_regular(3000, 3, 0.85, 4);
  LanczosOptions opts;
  opts.seed = 3;
  const ModularityOperator op(g, 1.0);
  const auto pair = leading_eigenpair(op, opts);
  const double norm2 = dot(pair.vector, pair.vector);
  CHECK(std::abs(norm2 - 3000.0) <= 1e-8 * 3000.0);
  CHECK(pair.residual <= 1e-8);

  const auto bx = modularity_matvec(op, pair.vector);
  double r = 0.0;
  for (std::size_t i = 0; i < bx.size(); ++i) r += (bx[i] - pair.value * pair.vector[i]) * (bx[i] - pair.value * pair.vector[i]);
  CHECK(std::sqrt(r / norm2) <= 1e-8 * 1.01);

  std::size_t arg = 0;
  for (std::size_t i = 1; i < pair.vector.size(); ++i) {
    if (std::abs(pair.vector[i]) > std::abs(pair.vector[arg])) arg = i;
  }
  CHECK(pair.vector[arg] > 0);
}

TEST_CASE("canonical sign breaks near ties by lowest index") {
  std::vector<double> x{0.5, -1.0, 1.0, 0.2};
  canonicalize_sign(x);
  CHECK(x[1] > 0);
  std::vector<double> y{-0.5, 1.0, -1.0};
  canonicalize_sign(y);
  CHECK(y[1] > 0);
}

TEST_CASE("leading eigenpair reports non-convergence with its best residual") {
  const Graph g = planted_regular(5000, 3, 0.3, 9);
  LanczosOptions opts;
  opts.max_iter = 12;
  opts.tol = 1e-12;
  try {
    (void)leading_eigenpair(ModularityOperator(g, 1.0), opts);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.best_residual() > 0.0);
    CHECK(std::isfinite(e.best_residual()));
  }
}

TEST_CASE("normalized Laplacian λ₂") {
  const auto k4 = second_smallest_normalized_laplacian(oracle::complete(4));
  CHECK(k4.lambda2 == doctest::Approx(4.0 / 3.0).epsilon(1e-8));
  CHECK(k4.cheeger_lower_bound == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
  CHECK_FALSE(k4.disconnected);

  const auto split = second_smallest_normalized_laplacian(oracle::two_k4());
  CHECK(split.lambda2 == 0.0);
  CHECK(split.disconnected);

  const auto c4 = second_smallest_normalized_laplacian(oracle::cycle(4));
  CHECK(c4.lambda2 == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("normalized Laplacian λ₂ matches the dense oracle") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    const Graph g = oracle::random_connected(8 + rep, 0.35, rng);
    const auto dense = oracle::jacobi_eigenvalues(oracle::dense_normalized_laplacian(g));
    const auto gap = second_smallest_normalized_laplacian(g, 1e-10, rep);
    CHECK(gap.lambda2 == doctest::Approx(dense[1]).epsilon(1e-7));
  }
}

TEST_CASE("partition from vector") {
  auto p = partition_from_vector(std::vector<double>{0.3, -0.1, 0.7});
  CHECK(p.labels == Labels{1, 2, 1});
  CHECK_FALSE(p.unpartitioned);
  p = partition_from_vector(std::vector<double>{0.3, 0.1, 0.7});
  CHECK(p.labels == Labels{1, 1, 1});
  CHECK(p.unpartitioned);
  p = partition_from_vector(std::vector<double>{0.3, 0.0, 0.7});
  CHECK(p.labels == Labels{1, 1, 1});
  CHECK(p.unpartitioned);
  p = partition_from_vector(std::vector<double>{-0.3, 0.0, -0.7});
  CHECK(p.labels == Labels{2, 2, 2});
  CHECK(p.unpartitioned);
  p = partition_from_vector(std::vector<double>{-0.3, 0.0, 0.7});
  CHECK(p.labels == Labels{2, 1, 1});
  CHECK_THROWS_AS(partition_from_vector(std::vector<double>{0.0, 0.0}), DegenerateVectorError);
}

TEST_CASE("negating the vector swaps the partition and keeps the overlap") {
  std::mt19937_64 rng(4);
  const auto x = random_vector(101, rng);
  std::vector<double> neg(x);
  for (auto& v : neg) v = -v;
  const auto a = partition_from_vector(x);
  const auto b = partition_from_vector(neg);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(a.labels[i] == 3 - b.labels[i]);
  Labels planted(101, 1);
  for (std::size_t i = 50; i < 101; ++i) planted[i] = 2;
  CHECK(overlap(a.labels, planted) == overlap(b.labels, planted));
}

TEST_CASE("overlap") {
  const Labels a{1, 1, 2, 2};
  CHECK(overlap(a, a) == 1.0);
  CHECK(overlap(Labels{2, 2, 1, 1}, a) == 1.0);
  CHECK(overlap(Labels{1, 2, 1, 2}, a) == 0.5);

  std::mt19937_64 rng(12);
  std::bernoulli_distribution coin(0.5);
  Labels x(10000), y(10000);
  for (std::size_t i = 0; i < 10000; ++i) {
    x[i] = coin(rng) ? 1 : 2;
    y[i] = i < 5000 ? 1 : 2;
  }
  CHECK(std::abs(overlap(x, y) - 0.5) <= 0.02);
}

TEST_CASE("inverse participation ratio") {
  CHECK(ipr(std::vector<double>(50, 1.0)) == doctest::Approx(1.0 / 50).epsilon(1e-15));
  std::vector<double> hot(50, 0.0);
  hot[7] = 3.0;
  CHECK(ipr(hot) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ipr(std::vector<double>{1, 1, 0, 0}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ipr(std::vector<double>{2, 2, 0, 0}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(ipr(std::vector<double>{0, 0}), DegenerateVectorError);
}

TEST_CASE("spectral outcome ranges") {
  const Graph g = gen_sbm(PlantedSpec{3000, 0.5, SbmKind{9.0, 3.0}, 2});
  const auto o = spectral_bisection(g, 1.0);
  CHECK(o.ipr >= 1.0 / 3000);
  CHECK(o.ipr <= 1.0);
  REQUIRE(o.overlap.has_value());
  CHECK(*o.overlap >= 0.5);
  CHECK(*o.overlap <= 1.0);
  CHECK(std::abs(dot(o.vector, o.vector) - 3000.0) <= 1e-8 * 3000.0);
  // Isolated nodes keep exact zeros.
  for (NodeId v = 0; v < g.n_nodes(); ++v) {
    if (g.degree(v) == 0) CHECK(o.vector[v] == 0.0);
  }
  bool pos = false, neg = false;
  for (double v : o.vector) {
    pos |= v > 0;
    neg |= v < 0;
  }
  CHECK(o.unpartitioned == !(pos && neg));
}

TEST_CASE("unpartitioned phase aligns with the ones vector") {
  const Graph g = planted_regular(4000, 3, 0.3, 6);
  const auto o = spectral_bisection(g, 0.02);
  CHECK(o.unpartitioned);
  CHECK(o.ones_alignment >= 0.99);
  CHECK(o.lambda1 == doctest::Approx(3.0 * 0.98).epsilon(1e-8));
}

TEST_CASE("detectable phase is orthogonal to the ones vector") {
  const Graph g = planted_regular(10000, 3, 0.9, 6);
  const auto o = spectral_bisection(g, 1.0);
  CHECK_FALSE(o.unpartitioned);
  CHECK(o.ones_alignment <= 0.02);
  REQUIRE(o.overlap.has_value());
  CHECK(*o.overlap > 0.9);
}

TEST_CASE("eigenvector dump format") {
  std::ostringstream out;
  write_eigenvector(out, 3.0, 1e-9, std::vector<double>{0.1, -2.0});
  CHECK(out.str() == "# lambda=3 residual=1.0000000000000001e-09 n=2\n0.10000000000000001\n-2\n");
}
