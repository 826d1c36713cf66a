#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "specphase/ema.hpp"
#include "specphase/graph.hpp"

namespace specphase::lab {

enum class EnsembleKind { regular, sbm };
enum class Axis { structure, cin_minus_cout };

std::string ensemble_name(EnsembleKind kind);

/// Monte Carlo grid. Text form is flat `key = value` lines; repeated
/// `theta` and `output` keys form lists, `#` starts a comment.
///
///   ensemble = regular | sbm
///   n = 10000
///   degree = 3            (c for regular, c̄ for sbm; alias mean_degree)
///   p1 = 0.5
///   axis = gamma | cin_minus_cout
///   axis_min = 0.3
///   axis_max = 1.0
///   axis_steps = 15
///   theta = 1             (repeatable)
///   samples = 20
///   base_seed = 1
///   output = overlap      (repeatable; default: all observables)
///   tol = 1e-8
///   trunc_eps = 5e-5      (sbm EMA truncation; default 1/N)
///   cheeger = false
///   max_cell_seconds = 0  (0 disables)
///   max_work = 1000000    (cap on axis_steps * thetas * samples)
struct SweepSpec {
  EnsembleKind ensemble = EnsembleKind::regular;
  std::size_t n = 0;
  double degree = 3.0;
  double p1 = 0.5;
  Axis axis = Axis::structure;
  double axis_min = 0.0;
  double axis_max = 1.0;
  int axis_steps = 1;
  std::vector<double> thetas;
  int samples = 1;
  std::uint64_t base_seed = 0;
  std::set<std::string> outputs;  // subset of observable_names(); empty means all
  double tol = 1e-8;
  std::optional<double> trunc_eps;
  bool cheeger = false;
  double max_cell_seconds = 0.0;
  std::size_t max_work = 1000000;

  /// Axis value at grid index j; steps = 1 gives axis_min.
  double axis_value(int j) const;
  /// Γ and c_in - c_out at grid index j.
  double structure_at(int j) const;
  double cin_minus_cout_at(int j) const;
  bool wants(const std::string& observable) const;

  /// Throws ParameterError on invalid combinations, including any grid
  /// point with c_out < 0 or Γ < 0.
  void validate() const;
  /// Canonical `key = value` text; parsing it yields an equal spec.
  std::string canonical_text() const;
};

/// lambda1, overlap, ipr, unpartitioned_rate, ones_alignment, ema.
const std::vector<std::string>& observable_names();

SweepSpec parse_sweep_spec(std::istream& in);
SweepSpec parse_sweep_spec_file(const std::string& path);

/// 64-bit FNV-1a of the canonical text, as 16 hex digits.
std::string spec_hash(const SweepSpec& spec);

/// One CSV row. Per-sample rows have sample_index >= 0 and a seed;
/// aggregate rows have sample_index = -1, means in the observable columns
/// and standard errors in the *_se columns.
struct SweepRecord {
  std::string ensemble;
  std::size_t n = 0;
  double degree = 0.0;
  double p1 = 0.5;
  double theta = 1.0;
  double gamma_struct = 0.0;
  double cin_minus_cout = 0.0;
  int sample_index = 0;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda1, overlap, ipr, unpartitioned, ones_alignment;
  std::optional<std::string> ema_phase;
  std::optional<double> ema_lambda1, ema_overlap;
  std::optional<double> cheeger_lower_bound_theta;
  std::string spec_hash;
  std::string error;
  std::optional<double> lambda1_se, overlap_se, ipr_se, unpartitioned_se, ones_alignment_se,
      cheeger_lower_bound_theta_se;
};

struct RunOptions {
  int threads = 1;
};

/// Runs the grid. Sample k at grid index j uses seed h(base_seed, j, k) and
/// the same graph serves every θ. Rows come out grouped by grid index,
/// then θ, samples in order followed by the aggregate row; the result does
/// not depend on the thread count. Per-sample failures land in the error
/// column and the run continues.
std::vector<SweepRecord> run_sweep(const SweepSpec& spec, const RunOptions& options = {});

/// EMA columns for one grid cell.
struct EmaCell {
  ema::EmaSolution solution;
  std::optional<double> predicted_overlap;  // regular ensembles only
};
EmaCell ema_cell(const SweepSpec& spec, double structure, double theta);

/// Degree distribution the EMA uses for the sweep's ensemble: the c-regular
/// atom, or Poisson(c̄) truncated at trunc_eps (default 1/N).
DegreeDistribution ema_distribution(const SweepSpec& spec);

/// Mean and standard error (sample standard deviation over sqrt(n); 0 for n = 1).
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};
MeanSe mean_se(const std::vector<double>& values);

const std::vector<std::string>& sweep_csv_columns();
void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records);
void write_sweep_json(std::ostream& out, const std::vector<SweepRecord>& records);

/// Phase diagram over (structure axis) x (θ axis). Monte Carlo columns are
/// added when samples > 0; the Cheeger column then holds the sample mean of
/// λ₂/2 of the normalized Laplacian.
struct PhaseDiagramSpec {
  SweepSpec grid;  // ensemble, n, degree, p1, structure axis, samples, seed, tol, trunc_eps
  double theta_min = 0.01;
  double theta_max = 2.0;
  int theta_steps = 1;

  double theta_at(int i) const;
};

struct PhaseDiagramRow {
  double gamma_struct = 0.0;
  double cin_minus_cout = 0.0;
  double theta = 1.0;
  ema::EmaSolution solution;
  std::optional<double> mc_overlap, mc_overlap_se, cheeger_lower_bound_theta;
  std::string error;
};

/// Rows ordered by θ index, then structure index.
std::vector<PhaseDiagramRow> run_phase_diagram(const PhaseDiagramSpec& spec,
                                               const RunOptions& options = {});

void write_phase_diagram_csv(std::ostream& out, const std::vector<PhaseDiagramRow>& rows,
                             bool with_monte_carlo);
void write_phase_diagram_json(std::ostream& out, const std::vector<PhaseDiagramRow>& rows,
                              bool with_monte_carlo);

}  // namespace specphase::lab
