#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specphase/graph.hpp"

namespace specphase {

/// Symmetric linear map on R^n, applied without materializing a matrix.
class SymmetricOperator {
 public:
  virtual ~SymmetricOperator() = default;
  virtual std::size_t dim() const = 0;
  /// y = M x. x and y have length dim() and do not alias.
  virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
};

/// B = A - θ c cᵀ / K over a graph that must outlive the operator.
class ModularityOperator final : public SymmetricOperator {
 public:
  /// Throws OperatorError when K = 0 and ParameterError when θ <= 0.
  ModularityOperator(const Graph& g, double theta);

  std::size_t dim() const override { return graph_->n_nodes(); }
  void apply(std::span<const double> x, std::span<double> y) const override;

  const Graph& graph() const noexcept { return *graph_; }
  double theta() const noexcept { return theta_; }

 private:
  const Graph* graph_;
  double theta_;
  double inv_k_;
};

std::vector<double> modularity_matvec(const ModularityOperator& op, std::span<const double> x);

struct LanczosOptions {
  double tol = 1e-8;
  /// Matrix-vector product budget; 0 selects 10 sqrt(N) + 200.
  int max_iter = 0;
  std::uint64_t seed = 0;
  /// Krylov basis size before a thick restart; 0 selects min(N, 64).
  int basis_size = 0;
  /// Optional start vector; a seeded uniform vector otherwise.
  std::span<const double> start = {};
};

struct Eigenpair {
  double value = 0.0;
  std::vector<double> vector;  // Σ x_i² = N, largest-magnitude entry positive
  double residual = 0.0;       // ‖Mx - λx‖ / ‖x‖
  int matvecs = 0;
  bool degenerate = false;     // top Ritz gap below 10 tol
  double ritz_gap = 0.0;
};

/// Largest algebraic eigenpair by thick-restart Lanczos with full
/// reorthogonalization. Throws ConvergenceError carrying the best residual
/// when the matvec budget runs out.
Eigenpair leading_eigenpair(const SymmetricOperator& op, const LanczosOptions& options = {});

/// Flips the sign so the largest-magnitude entry is positive; near ties
/// (relative 1e-9) go to the lowest index.
void canonicalize_sign(std::span<double> x);

struct SignPartition {
  Labels labels;
  bool unpartitioned = false;
};

/// Label 1 for positive entries, 2 for negative; exact zeros join the
/// majority sign (label 1 on a tie). Throws DegenerateVectorError on an
/// all-zero vector.
SignPartition partition_from_vector(std::span<const double> x);

/// Fraction of matching labels, maximized over the global label swap.
double overlap(const Labels& partition, const Labels& planted);

/// Σx⁴ / (Σx²)². Throws DegenerateVectorError on a zero vector.
double ipr(std::span<const double> x);

/// |Σ x_i| / N for a vector normalized to Σx² = N.
double ones_alignment(std::span<const double> x);

struct SpectralOutcome {
  double lambda1 = 0.0;
  std::vector<double> vector;
  double residual = 0.0;
  Labels partition;
  bool unpartitioned = false;
  std::optional<double> overlap;
  double ipr = 0.0;
  double ones_alignment = 0.0;
  bool degenerate = false;
  int matvecs = 0;
};

/// Leading eigenvector of the modularity matrix and the statistics of its
/// sign partition. Isolated nodes get exact zero entries: the start vector
/// vanishes there and B never fills them in.
SpectralOutcome spectral_bisection(const Graph& g, double theta, const LanczosOptions& options = {});

struct NormalizedLaplacianGap {
  double lambda2 = 0.0;
  double cheeger_lower_bound = 0.0;  // λ₂ / 2, a lower bound on the optimal normalized cut
  bool disconnected = false;
};

/// Second-smallest eigenvalue of L = I - D^{-1/2} A D^{-1/2} on the
/// non-isolated nodes, with the Perron vector D^{1/2} 1 deflated.
/// Disconnected graphs return 0 with the flag set.
NormalizedLaplacianGap second_smallest_normalized_laplacian(const Graph& g, double tol = 1e-8,
                                                           std::uint64_t seed = 0);

/// Header `# lambda=<float> residual=<float> n=<int>` then one entry per line.
void write_eigenvector(std::ostream& out, double lambda, double residual, std::span<const double> x);

}  // namespace specphase
