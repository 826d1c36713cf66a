#pragma once

#include <cstddef>
#include <cstdint>

#include "specphase/graph.hpp"

namespace specphase {

/// Planted two-block c-regular graph. Block 1 is nodes [0, round(p1 N)).
/// Exactly round(γN) edges cross the blocks, γ = c p1 p2 (1 - Γ), rounded
/// half to even. If the intra-block stub counts come out odd, one cross
/// edge is removed (or added when γN rounds to zero but Γ < 1).
///
/// Throws InfeasibleError when the degree/parity constraints cannot be met
/// and GenerationError when stub matching keeps failing.
Graph gen_planted_regular(const PlantedSpec& spec);

/// Sparse SBM: within-block pairs connect with probability c_in/N and
/// cross-block pairs with c_out/N. Edges are drawn by geometric skipping.
Graph gen_sbm(const PlantedSpec& spec);

/// Dispatches on spec.kind.
Graph generate(const PlantedSpec& spec);

/// Γ, γ and c_in - c_out at fixed mean degree and block fraction.
struct StructureValues {
  double structure;        // Γ = 1 - γ / (c̄ p1 p2)
  double gamma;            // cross edges per node
  double cin_minus_cout;   // c̄ Γ / (p1² + p2²); equals 2 c̄ Γ for p1 = 1/2
};

StructureValues from_structure(double mean_degree, double p1, double structure);
StructureValues from_gamma(double mean_degree, double p1, double gamma);
StructureValues from_cin_minus_cout(double mean_degree, double p1, double difference);

/// (c_in, c_out) of the SBM with the given mean degree and Γ.
struct SbmRates {
  double c_in;
  double c_out;
};
SbmRates sbm_rates(double mean_degree, double p1, double structure);

/// Degree histogram of g as a distribution over degrees >= 1. Isolated
/// nodes are dropped (their fraction is kept in dropped_mass); without
/// isolated nodes the mean equals K / N exactly.
DegreeDistribution empirical_degree_distribution(const Graph& g);

}  // namespace specphase
