#pragma once

// Effective-medium saddle point of the leading modularity eigenvalue on
// planted two-block ensembles. All solves are one-dimensional: for fixed â
// the R1 condition fixes φ uniquely, and the phase condition is then a
// scalar equation in â.
//
//   R_n(φ, â) = Σ_t b_t c_tⁿ / (φ - c_t â)
//   S_n(φ, â) = Σ_t b_t c_tⁿ / (φ - c_t â)²
//
//   every phase:    R1 = c̄ â / (1 - â²)
//   detectable:     R2 = c̄ (â + 1/Γ) / (1 - â²)
//   undetectable:   S2 = c̄ (1 + â²) / (1 - â²)²   (also the D/U boundary)
//   unpartitioned:  R2 = c̄ / (1 - θ - â)
//
// and the average leading eigenvalue is φ throughout.

#include <optional>
#include <string>

#include "specphase/graph.hpp"

namespace specphase::ema {

enum class Phase { detectable, undetectable, unpartitioned };

/// "D", "U" or "N".
char phase_code(Phase p);
std::string phase_name(Phase p);

/// R_n and S_n. Throw DomainError naming the degree when φ - c_t â <= 0.
double r_n(const DegreeDistribution& dist, double phi, double a_hat, int n);
double s_n(const DegreeDistribution& dist, double phi, double a_hat, int n);

/// One root (φ, â) of a phase's stationarity conditions.
struct SaddlePoint {
  double phi = 0.0;
  double a_hat = 0.0;
  double residual_r1 = 0.0;     // relative residual of the R1 condition
  double residual_phase = 0.0;  // relative residual of the phase condition
};

/// φ solving the R1 condition at fixed â in (0, 1). Unique because R1 is
/// strictly decreasing in φ above the largest pole c_max â.
double phi_for_a_hat(const DegreeDistribution& dist, double a_hat);

/// Root of the undetectable-phase conditions. Throws ConvergenceError if
/// no root exists in (0, 1).
SaddlePoint solve_undetectable(const DegreeDistribution& dist, double tol = 1e-14);

/// Root of the detectable-phase conditions at structure Γ, searched on
/// (0, â_U]. Empty when Γ is below the detectability threshold.
std::optional<SaddlePoint> solve_detectable(const DegreeDistribution& dist, double structure,
                                            double tol = 1e-14);

/// Root of the unpartitioned-phase conditions at resolution θ, searched on
/// (0, min(â_U, 1 - θ)), the range shared with the detectable branch.
/// Empty when no such root exists.
std::optional<SaddlePoint> solve_unpartitioned(const DegreeDistribution& dist, double theta,
                                               double tol = 1e-14);

/// Γ* from the undetectable root: 1/Γ* = R2 (1 - â²) / c̄ - â. Takes no θ:
/// the threshold is the same for every resolution.
double detectability_threshold(const DegreeDistribution& dist, double tol = 1e-14);

struct PhaseQuery {
  const DegreeDistribution* dist = nullptr;
  double structure = 0.0;  // Γ in [0, 1]
  double theta = 1.0;
  double p1 = 0.5;
};

struct EmaSolution {
  Phase phase = Phase::undetectable;
  double phi = 0.0;
  double a_hat = 0.0;
  double lambda1 = 0.0;                 // = phi
  std::optional<double> m_hat_sq;       // regular detectable: closed form; 0 when undetectable
  bool omega_hat_zero = true;           // false only in the unpartitioned phase
  double gamma_star = 0.0;              // detectability threshold of the distribution
  std::optional<double> competing_phi;  // the other phase's φ when the selection was a tie
};

/// Evaluates every feasible phase and keeps the one with the largest φ;
/// detectable versus undetectable is decided by Γ against Γ*. Ties (within
/// 1e-12 relative) go to the phase reached by increasing Γ.
EmaSolution classify_phase(const PhaseQuery& query, double tol = 1e-14);

/// Exact random-regular-graph results.
struct RegularClosedForms {
  double lambda_detectable;             // (c-1)Γ + 1/Γ
  double m_hat_sq;                      // p2/(c p1) (1 - 1/((c-1)²Γ²)) ((c-1)Γ² - 1)
  double lambda_undetectable;           // 2 sqrt(c-1)
  double gamma_star;                    // 1 / sqrt(c-1)
  std::optional<double> gamma_unpartitioned;  // absent when c²(1-θ)² < 4(c-1)
  double theta_max;                     // 1 - 2 sqrt(c-1) / c
  double ones_eigenvalue;               // c (1 - θ)
};

/// Throws DomainError for c < 3, Γ outside (0, 1] or p1 outside (0, 1).
RegularClosedForms regular_closed_forms(int c, double structure, double theta, double p1 = 0.5);

/// Γ_un(θ) for c-regular graphs, absent above θ_max.
std::optional<double> regular_unpartitioned_boundary(int c, double theta);

/// Poisson(c̄) restricted to degrees >= 1, cut at the smallest t_max whose
/// upper tail P(X > t_max) is below epsilon, then renormalized. The cut and
/// the removed mass (degree 0 plus tail) are recorded on the result.
DegreeDistribution poisson_truncated(double mean_degree, double epsilon);

/// Fraction of correctly classified nodes for a c-regular planted graph
/// under a Gaussian model of the eigenvector entries. Block r has mean
/// μ_r and common variance σ²:
///   μ₁ = c m̂₁₁ â / (1 - â²)   (cavity field c m̂₁₁ over φ - c â)
///   p₁ μ₁ + p₂ μ₂ = 0,  σ² = 1 - p₁μ₁² - p₂μ₂²
///   overlap = p₁ Φ(μ₁/σ) + p₂ Φ(|μ₂|/σ)
/// Γ = 1 gives σ = 0 (overlap 1); Γ <= Γ* gives 1/2.
double predicted_overlap_regular(int c, double structure, double p1 = 0.5);

/// Dense-graph detectability estimate c_in - c_out = 2 sqrt(c̄) for two
/// equal blocks, kept for comparison output.
double dense_threshold_cin_minus_cout(double mean_degree);

}  // namespace specphase::ema
