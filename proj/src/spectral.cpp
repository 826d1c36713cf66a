#include "specphase/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "specphase/error.hpp"
#include "specphase/format.hpp"
#include "specphase/rng.hpp"

namespace specphase {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double norm(std::span<const double> x) { return std::sqrt(dot(x, x)); }

}  // namespace

ModularityOperator::ModularityOperator(const Graph& g, double theta) : graph_(&g), theta_(theta) {
  if (!(theta > 0.0)) throw ParameterError("θ must be positive");
  if (g.total_degree() == 0) throw OperatorError("modularity operator: graph has no edges (K = 0)");
  inv_k_ = 1.0 / static_cast<double>(g.total_degree());
}

void ModularityOperator::apply(std::span<const double> x, std::span<double> y) const {
  const Graph& g = *graph_;
  const auto deg = g.degrees();
  double cx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) cx += deg[i] * x[i];
  const double scale = theta_ * cx * inv_k_;
  for (NodeId i = 0; i < x.size(); ++i) {
    double s = 0.0;
    for (NodeId j : g.neighbors(i)) s += x[j];
    y[i] = s - scale * deg[i];
  }
}

std::vector<double> modularity_matvec(const ModularityOperator& op, std::span<const double> x) {
  if (x.size() != op.dim()) throw ParameterError("modularity_matvec: length mismatch");
  std::vector<double> y(x.size());
  op.apply(x, y);
  return y;
}

void canonicalize_sign(std::span<double> x) {
  double biggest = 0.0;
  for (double v : x) biggest = std::max(biggest, std::abs(v));
  if (biggest == 0.0) return;
  for (double& v : x) {
    if (std::abs(v) >= biggest * (1.0 - 1e-9)) {
      if (v < 0.0) {
        for (double& w : x) w = -w;
      }
      return;
    }
  }
}

Eigenpair leading_eigenpair(const SymmetricOperator& op, const LanczosOptions& options) {
  const std::size_t n = op.dim();
  if (n == 0) throw ParameterError("leading_eigenpair: empty operator");
  if (!(options.tol > 0.0)) throw ParameterError("leading_eigenpair: tol must be positive");
  const int max_iter = options.max_iter > 0
                           ? options.max_iter
                           : static_cast<int>(10.0 * std::sqrt(static_cast<double>(n))) + 200;
  const std::size_t m = std::min<std::size_t>(n, options.basis_size > 0 ? options.basis_size : 64);
  const std::size_t keep_max = std::max<std::size_t>(1, m / 3);

  // Basis columns, column i at [i*n, (i+1)*n).
  std::vector<double> basis((m + 1) * n, 0.0);
  auto col = [&](std::size_t i) { return std::span<double>(basis.data() + i * n, n); };

  {
    auto v0 = col(0);
    if (!options.start.empty()) {
      if (options.start.size() != n) throw ParameterError("leading_eigenpair: start vector length");
      std::copy(options.start.begin(), options.start.end(), v0.begin());
    } else {
      Engine rng = make_engine(options.seed);
      for (double& v : v0) v = 2.0 * uniform01(rng) - 1.0;
    }
    const double s = norm(v0);
    if (s == 0.0) throw DegenerateVectorError("leading_eigenpair: zero start vector");
    for (double& v : v0) v /= s;
  }

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  std::vector<double> w(n), x(n), bx(n);
  std::size_t kept = 0;
  int matvecs = 0;
  double best_residual = std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz;

  while (true) {
    std::size_t size = kept;
    double beta = 0.0;
    bool invariant = false;
    bool converged = false;
    std::size_t top = 0;

    for (std::size_t j = kept; j < m; ++j) {
      op.apply(col(j), w);
      ++matvecs;
      for (std::size_t i = 0; i <= j; ++i) h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 0.0;
      // Two Gram-Schmidt passes keep the basis orthogonal to working precision.
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i <= j; ++i) {
          const double d = dot(col(i), w);
          h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += d;
          axpy(-d, col(i), w);
        }
      }
      for (std::size_t i = 0; i < j; ++i) {
        h(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
            h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
      beta = norm(w);
      size = j + 1;
      const double scale = std::max(1.0, std::abs(h(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j))));
      invariant = beta <= 1e-13 * scale || size == n;
      if (!invariant) {
        auto next = col(j + 1);
        for (std::size_t i = 0; i < n; ++i) next[i] = w[i] / beta;
      }
      if (invariant || size == m || (size - kept) % 8 == 0 || matvecs >= max_iter) {
        ritz.compute(h.topLeftCorner(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size)));
        top = size - 1;
        const double est = invariant ? 0.0 : std::abs(beta * ritz.eigenvectors()(static_cast<Eigen::Index>(size - 1), static_cast<Eigen::Index>(top)));
        best_residual = std::min(best_residual, est);
        if (est <= options.tol) {
          converged = true;
          break;
        }
        if (invariant || matvecs >= max_iter) break;
      }
    }

    if (converged || invariant) {
      std::fill(x.begin(), x.end(), 0.0);
      for (std::size_t i = 0; i < size; ++i) {
        axpy(ritz.eigenvectors()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(top)), col(i), x);
      }
      const double s = norm(x);
      for (double& v : x) v /= s;
      op.apply(x, bx);
      const double lambda = dot(x, bx);
      axpy(-lambda, x, bx);
      const double residual = norm(bx);
      best_residual = std::min(best_residual, residual);
      if (residual <= options.tol || invariant) {
        Eigenpair out;
        out.value = lambda;
        out.residual = residual;
        out.matvecs = matvecs;
        out.ritz_gap = size > 1 ? ritz.eigenvalues()(static_cast<Eigen::Index>(top)) -
                                      ritz.eigenvalues()(static_cast<Eigen::Index>(top - 1))
                                : std::numeric_limits<double>::infinity();
        out.degenerate = out.ritz_gap < 10.0 * options.tol;
        const double root_n = std::sqrt(static_cast<double>(n));
        for (double& v : x) v *= root_n;
        canonicalize_sign(x);
        out.vector = std::move(x);
        return out;
      }
    }
    if (matvecs >= max_iter) {
      throw ConvergenceError("Lanczos did not converge in " + std::to_string(matvecs) +
                                 " matvecs (best residual " + format_double(best_residual) + ")",
                             best_residual);
    }

    // Thick restart: keep the top Ritz vectors plus the current residual direction.
    const std::size_t keep = std::min(keep_max, size - 1);
    std::vector<double> kept_vectors(keep * n, 0.0);
    for (std::size_t r = 0; r < keep; ++r) {
      const auto idx = static_cast<Eigen::Index>(size - 1 - r);
      std::span<double> u(kept_vectors.data() + r * n, n);
      for (std::size_t i = 0; i < size; ++i) axpy(ritz.eigenvectors()(static_cast<Eigen::Index>(i), idx), col(i), u);
    }
    const std::vector<double> residual_dir(col(size).begin(), col(size).end());
    std::copy(kept_vectors.begin(), kept_vectors.end(), basis.begin());
    std::copy(residual_dir.begin(), residual_dir.end(), col(keep).begin());
    h.setZero();
    for (std::size_t r = 0; r < keep; ++r) {
      const auto idx = static_cast<Eigen::Index>(size - 1 - r);
      const auto rr = static_cast<Eigen::Index>(r);
      const auto kk = static_cast<Eigen::Index>(keep);
      h(rr, rr) = ritz.eigenvalues()(idx);
      h(rr, kk) = h(kk, rr) = beta * ritz.eigenvectors()(static_cast<Eigen::Index>(size - 1), idx);
    }
    kept = keep;
  }
}

SignPartition partition_from_vector(std::span<const double> x) {
  if (x.empty()) throw ParameterError("partition_from_vector: empty vector");
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (double v : x) {
    if (v > 0.0) ++pos;
    if (v < 0.0) ++neg;
  }
  if (pos == 0 && neg == 0) throw DegenerateVectorError("partition_from_vector: all-zero vector");
  const int zero_label = pos >= neg ? 1 : 2;
  SignPartition out;
  out.labels.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.labels[i] = x[i] > 0.0 ? 1 : (x[i] < 0.0 ? 2 : zero_label);
  }
  out.unpartitioned = pos == 0 || neg == 0;
  return out;
}

double overlap(const Labels& partition, const Labels& planted) {
  if (partition.size() != planted.size()) throw ParameterError("overlap: length mismatch");
  if (partition.empty()) throw ParameterError("overlap: empty labels");
  std::size_t same = 0;
  for (std::size_t i = 0; i < partition.size(); ++i) same += partition[i] == planted[i];
  const std::size_t best = std::max(same, partition.size() - same);
  return static_cast<double>(best) / static_cast<double>(partition.size());
}

double ipr(std::span<const double> x) {
  double s2 = 0.0;
  double s4 = 0.0;
  for (double v : x) {
    const double v2 = v * v;
    s2 += v2;
    s4 += v2 * v2;
  }
  if (s2 == 0.0) throw DegenerateVectorError("ipr: zero vector");
  return s4 / (s2 * s2);
}

double ones_alignment(std::span<const double> x) {
  const double sum = std::accumulate(x.begin(), x.end(), 0.0);
  return std::abs(sum) / static_cast<double>(x.size());
}

SpectralOutcome spectral_bisection(const Graph& g, double theta, const LanczosOptions& options) {
  const ModularityOperator op(g, theta);
  const std::size_t n = g.n_nodes();
  const auto deg = g.degrees();

  std::vector<double> start;
  LanczosOptions opts = options;
  if (opts.start.empty()) {
    start.resize(n);
    Engine rng = make_engine(options.seed);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = 2.0 * uniform01(rng) - 1.0;
      start[i] = deg[i] > 0 ? r : 0.0;
    }
    opts.start = start;
  }
  Eigenpair pair = leading_eigenpair(op, opts);

  // Isolated nodes span the null space of B. When everything else is
  // negative the leading eigenvector is a unit vector on one of them.
  if (pair.value < 0.0 && g.isolated_count() > 0) {
    const auto it = std::find(deg.begin(), deg.end(), 0);
    pair.vector.assign(n, 0.0);
    pair.vector[static_cast<std::size_t>(it - deg.begin())] = std::sqrt(static_cast<double>(n));
    pair.value = 0.0;
    pair.residual = 0.0;
  }

  SpectralOutcome out;
  out.lambda1 = pair.value;
  out.residual = pair.residual;
  out.degenerate = pair.degenerate;
  out.matvecs = pair.matvecs;
  auto part = partition_from_vector(pair.vector);
  out.partition = std::move(part.labels);
  out.unpartitioned = part.unpartitioned;
  if (g.has_labels()) out.overlap = overlap(out.partition, g.labels());
  out.ipr = ipr(pair.vector);
  out.ones_alignment = ones_alignment(pair.vector);
  out.vector = std::move(pair.vector);
  return out;
}

namespace {

// D^{-1/2} A D^{-1/2} - 2 u uᵀ with u = D^{1/2} 1 / sqrt(K). The Perron
// vector is moved to eigenvalue -1, the bottom of the spectrum.
class DeflatedNormalizedAdjacency final : public SymmetricOperator {
 public:
  explicit DeflatedNormalizedAdjacency(const Graph& g) : graph_(&g), inv_sqrt_deg_(g.n_nodes()), perron_(g.n_nodes()) {
    const double inv_sqrt_k = 1.0 / std::sqrt(static_cast<double>(g.total_degree()));
    for (NodeId i = 0; i < g.n_nodes(); ++i) {
      const int d = g.degree(i);
      inv_sqrt_deg_[i] = d > 0 ? 1.0 / std::sqrt(static_cast<double>(d)) : 0.0;
      perron_[i] = std::sqrt(static_cast<double>(d)) * inv_sqrt_k;
    }
  }

  std::size_t dim() const override { return graph_->n_nodes(); }

  void apply(std::span<const double> x, std::span<double> y) const override {
    const double ux = dot(perron_, x);
    for (NodeId i = 0; i < x.size(); ++i) {
      double s = 0.0;
      for (NodeId j : graph_->neighbors(i)) s += inv_sqrt_deg_[j] * x[j];
      y[i] = inv_sqrt_deg_[i] * s - 2.0 * ux * perron_[i];
    }
  }

  std::span<const double> perron() const { return perron_; }

 private:
  const Graph* graph_;
  std::vector<double> inv_sqrt_deg_;
  std::vector<double> perron_;
};

bool connected_on_support(const Graph& g) {
  const std::size_t n = g.n_nodes();
  NodeId root = 0;
  while (root < n && g.degree(root) == 0) ++root;
  if (root == n) return false;
  std::vector<char> seen(n, 0);
  std::vector<NodeId> stack{root};
  seen[root] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    for (NodeId u : g.neighbors(v)) {
      if (!seen[u]) {
        seen[u] = 1;
        ++reached;
        stack.push_back(u);
      }
    }
  }
  return reached == n - g.isolated_count();
}

}  // namespace

NormalizedLaplacianGap second_smallest_normalized_laplacian(const Graph& g, double tol, std::uint64_t seed) {
  NormalizedLaplacianGap out;
  if (!connected_on_support(g)) {
    out.disconnected = true;
    return out;
  }
  const DeflatedNormalizedAdjacency op(g);
  const std::size_t n = g.n_nodes();
  std::vector<double> start(n);
  Engine rng = make_engine(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = 2.0 * uniform01(rng) - 1.0;
    start[i] = g.degree(static_cast<NodeId>(i)) > 0 ? r : 0.0;
  }
  axpy(-dot(op.perron(), start), op.perron(), start);

  LanczosOptions opts;
  opts.tol = tol;
  opts.seed = seed;
  opts.start = start;
  const Eigenpair pair = leading_eigenpair(op, opts);
  out.lambda2 = 1.0 - pair.value;
  out.cheeger_lower_bound = out.lambda2 / 2.0;
  return out;
}

void write_eigenvector(std::ostream& out, double lambda, double residual, std::span<const double> x) {
  out << "# lambda=" << format_double(lambda) << " residual=" << format_double(residual)
      << " n=" << x.size() << '\n';
  for (double v : x) out << format_double(v) << '\n';
}

}  // namespace specphase
