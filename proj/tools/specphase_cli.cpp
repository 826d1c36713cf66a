// specphase command-line driver: graph generation, spectral bisection,
// effective-medium predictions and Monte Carlo sweeps.

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "specphase/ema.hpp"
#include "specphase/ensembles.hpp"
#include "specphase/error.hpp"
#include "specphase/format.hpp"
#include "specphase/graph.hpp"
#include "specphase/lab.hpp"
#include "specphase/spectral.hpp"

namespace {

using namespace specphase;
using nlohmann::json;

enum ExitCode { kOk = 0, kNumerical = 1, kUsage = 2 };

struct Globals {
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out;
  std::string format;  // empty selects the command's default
};

// Output sink: --out file, or stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw ParameterError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  bool to_file() const { return file_ != nullptr; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void emit_key_values(std::ostream& out, const json& obj, const std::string& format) {
  if (format == "csv") {
    out << "key,value\n";
    for (const auto& [k, v] : obj.items()) {
      out << k << ',';
      if (v.is_number_float()) out << format_double(v.get<double>());
      else if (v.is_string()) out << v.get<std::string>();
      else if (!v.is_null()) out << v.dump();
      out << '\n';
    }
  } else {
    out << obj.dump(2) << '\n';
  }
}

// gen -----------------------------------------------------------------------

struct GenArgs {
  bool regular = false;
  bool sbm = false;
  std::size_t n = 0;
  int degree = 3;
  double p1 = 0.5;
  std::optional<double> structure;
  std::optional<double> cin;
  std::optional<double> cout;
};

int run_gen(const GenArgs& a, const Globals& g) {
  if (a.regular == a.sbm) throw ParameterError("gen: choose exactly one of --regular or --sbm");
  PlantedSpec spec;
  spec.n_nodes = a.n;
  spec.p1 = a.p1;
  spec.seed = g.seed.value_or(0);
  if (a.regular) {
    if (!a.structure) throw ParameterError("gen --regular needs --gamma-struct");
    spec.kind = RegularKind{a.degree, *a.structure};
  } else {
    if (!a.cin || !a.cout) throw ParameterError("gen --sbm needs --cin and --cout");
    spec.kind = SbmKind{*a.cin, *a.cout};
  }
  const Graph graph = generate(spec);
  Sink sink(g.out);
  write_edge_list(sink.stream(), graph);
  std::ostream& report = sink.to_file() ? std::cout : std::cerr;
  if (g.format == "json") {
    report << json{{"n", graph.n_nodes()}, {"k", graph.total_degree()}, {"edges", graph.edge_count()},
                   {"cross_edges", graph.cross_edge_count()}}
                  .dump()
           << '\n';
  } else {
    report << "N=" << graph.n_nodes() << " K=" << graph.total_degree() << " cross_edges=" << graph.cross_edge_count()
           << '\n';
  }
  return kOk;
}

// spectral ------------------------------------------------------------------

struct SpectralArgs {
  std::string graph_path;
  double theta = 1.0;
  double tol = 1e-8;
  std::string eigenvector_path;
  bool cheeger = false;
};

int run_spectral(const SpectralArgs& a, const Globals& g) {
  Graph graph;
  try {
    graph = read_edge_list_file(a.graph_path);
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
  LanczosOptions opts;
  opts.tol = a.tol;
  opts.seed = g.seed.value_or(0);
  const SpectralOutcome o = spectral_bisection(graph, a.theta, opts);

  json out{{"n", graph.n_nodes()},
           {"k", graph.total_degree()},
           {"theta", a.theta},
           {"lambda1", o.lambda1},
           {"residual", o.residual},
           {"matvecs", o.matvecs},
           {"overlap", opt(o.overlap)},
           {"ipr", o.ipr},
           {"unpartitioned", o.unpartitioned},
           {"ones_alignment", o.ones_alignment},
           {"degenerate", o.degenerate}};
  if (a.cheeger) {
    const auto gap = second_smallest_normalized_laplacian(graph, a.tol, opts.seed);
    out["laplacian_lambda2"] = gap.lambda2;
    out["cheeger_lower_bound_theta"] = gap.cheeger_lower_bound;
    out["disconnected"] = gap.disconnected;
  }
  if (!a.eigenvector_path.empty()) {
    std::ofstream vec(a.eigenvector_path, std::ios::binary);
    if (!vec) throw ParameterError("cannot open eigenvector file '" + a.eigenvector_path + "'");
    write_eigenvector(vec, o.lambda1, o.residual, o.vector);
    out["eigenvector_path"] = a.eigenvector_path;
  } else {
    out["eigenvector_path"] = nullptr;
  }
  Sink sink(g.out);
  emit_key_values(sink.stream(), out, g.format.empty() ? "json" : g.format);
  return kOk;
}

// ema -----------------------------------------------------------------------

struct EmaArgs {
  std::optional<int> regular;
  std::optional<double> poisson;
  double trunc_eps = 1e-12;
  std::optional<std::size_t> size;
  std::optional<double> structure;
  std::optional<double> cin_minus_cout;
  double theta = 1.0;
  double p1 = 0.5;
  bool thresholds = false;
};

int run_ema(const EmaArgs& a, const Globals& g) {
  if (a.regular.has_value() == a.poisson.has_value()) {
    throw ParameterError("ema: choose exactly one of --regular or --poisson");
  }
  if (a.structure && a.cin_minus_cout) throw ParameterError("ema: give --gamma-struct or --cin-minus-cout, not both");
  double eps = a.trunc_eps;
  if (a.size) {
    if (*a.size < 2) throw ParameterError("ema: --size must be at least 2");
    eps = 1.0 / static_cast<double>(*a.size);
  }
  const DegreeDistribution dist =
      a.regular ? DegreeDistribution::regular(*a.regular) : ema::poisson_truncated(*a.poisson, eps);
  // Γ <-> c_in - c_out uses the graph's mean degree, not the truncated one.
  const double mean = a.regular ? static_cast<double>(*a.regular) : *a.poisson;

  json out;
  out["distribution"] = a.regular ? "regular" : "poisson";
  out["mean_degree"] = mean;
  out["distribution_mean"] = dist.mean_degree();
  if (dist.tail_cutoff) {
    out["trunc_eps"] = eps;
    out["tail_cutoff"] = *dist.tail_cutoff;
    out["dropped_mass"] = dist.dropped_mass;
  }
  out["theta"] = a.theta;

  std::optional<double> structure = a.structure;
  if (a.cin_minus_cout) structure = from_cin_minus_cout(mean, a.p1, *a.cin_minus_cout).structure;
  if (structure) {
    if (!(*structure >= 0.0 && *structure <= 1.0)) throw ParameterError("ema: Γ must lie in [0, 1]");
    const auto s = ema::classify_phase({&dist, *structure, a.theta, a.p1});
    out["gamma_struct"] = *structure;
    out["cin_minus_cout"] = from_structure(mean, a.p1, *structure).cin_minus_cout;
    out["phase"] = std::string(1, ema::phase_code(s.phase));
    out["phase_name"] = ema::phase_name(s.phase);
    out["phi"] = s.phi;
    out["lambda1"] = s.lambda1;
    out["a_hat"] = s.a_hat;
    out["m_hat_sq"] = opt(s.m_hat_sq);
    out["omega_hat_zero"] = s.omega_hat_zero;
    out["competing_phi"] = opt(s.competing_phi);
    if (a.regular && s.phase == ema::Phase::detectable) {
      out["predicted_overlap"] = ema::predicted_overlap_regular(*a.regular, *structure, a.p1);
    }
  } else if (!a.thresholds) {
    throw ParameterError("ema: give --gamma-struct, --cin-minus-cout or --thresholds");
  }

  if (a.thresholds || structure) {
    const double gamma_star = ema::detectability_threshold(dist);
    out["gamma_star"] = gamma_star;
    out["cin_minus_cout_star"] = from_structure(mean, a.p1, gamma_star).cin_minus_cout;
    if (a.regular) {
      const auto forms = ema::regular_closed_forms(*a.regular, 1.0, a.theta, a.p1);
      out["theta_max"] = forms.theta_max;
      out["gamma_unpartitioned"] = opt(forms.gamma_unpartitioned);
    } else {
      out["dense_cin_minus_cout"] = ema::dense_threshold_cin_minus_cout(mean);
    }
  }
  Sink sink(g.out);
  emit_key_values(sink.stream(), out, g.format.empty() ? "json" : g.format);
  return kOk;
}

// sweep ---------------------------------------------------------------------

struct SweepArgs {
  std::string spec_path;
  std::optional<double> max_cell_seconds;
};

int run_sweep_cmd(const SweepArgs& a, const Globals& g) {
  lab::SweepSpec spec = lab::parse_sweep_spec_file(a.spec_path);
  if (g.seed) spec.base_seed = *g.seed;
  if (a.max_cell_seconds) spec.max_cell_seconds = *a.max_cell_seconds;
  spec.validate();
  const auto rows = lab::run_sweep(spec, {g.threads});
  Sink sink(g.out);
  if (g.format == "json") lab::write_sweep_json(sink.stream(), rows);
  else lab::write_sweep_csv(sink.stream(), rows);
  return kOk;
}

// phase-diagram -------------------------------------------------------------

struct PhaseArgs {
  std::optional<int> regular;
  std::optional<double> sbm;
  std::size_t n = 0;
  double p1 = 0.5;
  std::optional<double> trunc_eps;
  std::string axis = "gamma";
  double axis_min = 0.0;
  double axis_max = 1.0;
  int axis_steps = 11;
  double theta_min = 0.01;
  double theta_max = 2.0;
  int theta_steps = 11;
  int samples = 0;
};

int run_phase(const PhaseArgs& a, const Globals& g) {
  if (a.regular.has_value() == a.sbm.has_value()) {
    throw ParameterError("phase-diagram: choose exactly one of --regular or --sbm");
  }
  lab::PhaseDiagramSpec spec;
  auto& grid = spec.grid;
  grid.ensemble = a.regular ? lab::EnsembleKind::regular : lab::EnsembleKind::sbm;
  grid.degree = a.regular ? *a.regular : *a.sbm;
  grid.n = a.n;
  grid.p1 = a.p1;
  grid.trunc_eps = a.trunc_eps;
  if (a.axis == "gamma") grid.axis = lab::Axis::structure;
  else if (a.axis == "cin_minus_cout") grid.axis = lab::Axis::cin_minus_cout;
  else throw ParameterError("phase-diagram: --axis must be gamma or cin_minus_cout");
  grid.axis_min = a.axis_min;
  grid.axis_max = a.axis_max;
  grid.axis_steps = a.axis_steps;
  grid.samples = a.samples;
  grid.base_seed = g.seed.value_or(0);
  if (a.samples > 0 && a.n < 2) throw ParameterError("phase-diagram: Monte Carlo needs -N");
  if (a.samples == 0 && a.n == 0 && !a.trunc_eps && a.sbm) {
    throw ParameterError("phase-diagram --sbm needs -N or --trunc-eps for the Poisson truncation");
  }
  spec.theta_min = a.theta_min;
  spec.theta_max = a.theta_max;
  spec.theta_steps = a.theta_steps;
  const auto rows = lab::run_phase_diagram(spec, {g.threads});
  Sink sink(g.out);
  if (g.format == "json") lab::write_phase_diagram_json(sink.stream(), rows, a.samples > 0);
  else lab::write_phase_diagram_csv(sink.stream(), rows, a.samples > 0);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral modularity bisection on planted two-block random graphs"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals globals;
  app.add_option("--seed", globals.seed, "Random seed (sweep: overrides base_seed)");
  app.add_option("--threads", globals.threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option("-o,--out", globals.out, "Output file (default: stdout)");
  app.add_option("--format", globals.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a planted graph as an edge list");
  gen_cmd->add_flag("--regular", gen.regular, "Planted c-regular graph");
  gen_cmd->add_flag("--sbm", gen.sbm, "Two-block stochastic block model");
  gen_cmd->add_option("-N,--nodes", gen.n, "Number of nodes")->required();
  gen_cmd->add_option("-c,--degree", gen.degree, "Degree of the regular graph");
  gen_cmd->add_option("--p1", gen.p1, "Fraction of nodes in block 1");
  gen_cmd->add_option("--gamma-struct", gen.structure, "Structure strength Γ in [0, 1]");
  gen_cmd->add_option("--cin", gen.cin, "SBM within-block rate c_in");
  gen_cmd->add_option("--cout", gen.cout, "SBM cross-block rate c_out");

  SpectralArgs spectral;
  auto* spec_cmd = app.add_subcommand("spectral", "Leading modularity eigenvector of an edge-list graph");
  spec_cmd->add_option("graph", spectral.graph_path, "Edge-list file")->required();
  spec_cmd->add_option("--theta", spectral.theta, "Resolution parameter");
  spec_cmd->add_option("--tol", spectral.tol, "Residual tolerance");
  spec_cmd->add_option("--eigenvector", spectral.eigenvector_path, "Write the eigenvector to this file");
  spec_cmd->add_flag("--cheeger", spectral.cheeger, "Also report λ₂ of the normalized Laplacian");

  EmaArgs ema_args;
  auto* ema_cmd = app.add_subcommand("ema", "Effective-medium prediction of the leading eigenvalue");
  ema_cmd->add_option("--regular", ema_args.regular, "c-regular degree distribution");
  ema_cmd->add_option("--poisson", ema_args.poisson, "Poisson mean degree");
  ema_cmd->add_option("--trunc-eps", ema_args.trunc_eps, "Poisson tail truncation");
  ema_cmd->add_option("--size", ema_args.size, "Graph size N; sets the truncation to 1/N");
  ema_cmd->add_option("--gamma-struct", ema_args.structure, "Structure strength Γ");
  ema_cmd->add_option("--cin-minus-cout", ema_args.cin_minus_cout, "c_in - c_out instead of Γ");
  ema_cmd->add_option("--theta", ema_args.theta, "Resolution parameter");
  ema_cmd->add_option("--p1", ema_args.p1, "Fraction of nodes in block 1");
  ema_cmd->add_flag("--thresholds", ema_args.thresholds, "Report phase boundaries");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Monte Carlo sweep from a key = value spec file");
  sweep_cmd->add_option("spec", sweep.spec_path, "Sweep spec file")->required();
  sweep_cmd->add_option("--max-cell-seconds", sweep.max_cell_seconds, "Per-cell time budget");

  PhaseArgs phase;
  auto* phase_cmd = app.add_subcommand("phase-diagram", "EMA phase labels over structure x resolution");
  phase_cmd->add_option("--regular", phase.regular, "c-regular ensemble");
  phase_cmd->add_option("--sbm", phase.sbm, "SBM with this mean degree");
  phase_cmd->add_option("-N,--nodes", phase.n, "Graph size for Monte Carlo and Poisson truncation");
  phase_cmd->add_option("--p1", phase.p1, "Fraction of nodes in block 1");
  phase_cmd->add_option("--trunc-eps", phase.trunc_eps, "Poisson tail truncation (default 1/N)");
  phase_cmd->add_option("--axis", phase.axis, "gamma or cin_minus_cout");
  phase_cmd->add_option("--axis-min", phase.axis_min, "Structure axis start");
  phase_cmd->add_option("--axis-max", phase.axis_max, "Structure axis end");
  phase_cmd->add_option("--axis-steps", phase.axis_steps, "Structure axis points");
  phase_cmd->add_option("--theta-min", phase.theta_min, "θ axis start");
  phase_cmd->add_option("--theta-max", phase.theta_max, "θ axis end");
  phase_cmd->add_option("--theta-steps", phase.theta_steps, "θ axis points");
  phase_cmd->add_option("--samples", phase.samples, "Monte Carlo samples per cell (0: EMA only)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (gen_cmd->parsed()) return run_gen(gen, globals);
    if (spec_cmd->parsed()) return run_spectral(spectral, globals);
    if (ema_cmd->parsed()) return run_ema(ema_args, globals);
    if (sweep_cmd->parsed()) return run_sweep_cmd(sweep, globals);
    if (phase_cmd->parsed()) return run_phase(phase, globals);
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << " (best residual " << format_double(e.best_residual()) << ")\n";
    return kNumerical;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: infeasible: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}
