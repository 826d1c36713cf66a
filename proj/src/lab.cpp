#include "specphase/lab.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "specphase/ensembles.hpp"
#include "specphase/error.hpp"
#include "specphase/format.hpp"
#include "specphase/rng.hpp"
#include "specphase/spectral.hpp"

namespace specphase::lab {

std::string ensemble_name(EnsembleKind kind) { return kind == EnsembleKind::regular ? "regular" : "sbm"; }

const std::vector<std::string>& observable_names() {
  static const std::vector<std::string> names{"lambda1", "overlap", "ipr", "unpartitioned_rate", "ones_alignment",
                                              "ema"};
  return names;
}

double SweepSpec::axis_value(int j) const {
  if (axis_steps <= 1) return axis_min;
  return axis_min + (axis_max - axis_min) * j / (axis_steps - 1);
}

double SweepSpec::structure_at(int j) const {
  const double x = axis_value(j);
  return axis == Axis::structure ? x : from_cin_minus_cout(degree, p1, x).structure;
}

double SweepSpec::cin_minus_cout_at(int j) const {
  const double x = axis_value(j);
  return axis == Axis::cin_minus_cout ? x : from_structure(degree, p1, x).cin_minus_cout;
}

bool SweepSpec::wants(const std::string& observable) const {
  return outputs.empty() || outputs.count(observable) > 0;
}

void SweepSpec::validate() const {
  if (n < 2) throw ParameterError("sweep: n must be at least 2");
  if (!(degree > 0.0)) throw ParameterError("sweep: degree must be positive");
  if (ensemble == EnsembleKind::regular && degree != std::floor(degree)) {
    throw ParameterError("sweep: regular degree must be an integer");
  }
  if (!(p1 > 0.0 && p1 < 1.0)) throw ParameterError("sweep: p1 must lie in (0, 1)");
  if (axis_steps < 1) throw ParameterError("sweep: axis_steps must be >= 1");
  if (samples < 1) throw ParameterError("sweep: samples must be >= 1");
  if (thetas.empty()) throw ParameterError("sweep: at least one theta is required");
  for (double t : thetas) {
    if (!(t > 0.0)) throw ParameterError("sweep: theta must be positive");
  }
  for (const auto& o : outputs) {
    const auto& names = observable_names();
    if (std::find(names.begin(), names.end(), o) == names.end()) {
      throw ParameterError("sweep: unknown output '" + o + "'");
    }
  }
  if (!(tol > 0.0)) throw ParameterError("sweep: tol must be positive");
  if (trunc_eps && !(*trunc_eps > 0.0 && *trunc_eps < 1.0)) {
    throw ParameterError("sweep: trunc_eps must lie in (0, 1)");
  }
  if (max_cell_seconds < 0.0) throw ParameterError("sweep: max_cell_seconds must be >= 0");
  const double work = static_cast<double>(axis_steps) * static_cast<double>(thetas.size()) * samples;
  if (work > static_cast<double>(max_work)) {
    throw ParameterError("sweep: work " + format_double(work) + " exceeds max_work " + std::to_string(max_work));
  }
  for (int j = 0; j < axis_steps; ++j) {
    double s = 0.0;
    try {
      s = structure_at(j);
    } catch (const DomainError& e) {
      throw ParameterError("sweep: grid point " + std::to_string(j) + ": " + e.what());
    }
    if (!(s >= 0.0 && s <= 1.0 + 1e-12)) {
      throw ParameterError("sweep: grid point " + std::to_string(j) + " has Γ = " + format_double(s) +
                           " outside [0, 1] (c_out < 0 or c_in < c_out)");
    }
  }
}

std::string SweepSpec::canonical_text() const {
  std::ostringstream out;
  out << "ensemble = " << ensemble_name(ensemble) << '\n';
  out << "n = " << n << '\n';
  out << "degree = " << format_double(degree) << '\n';
  out << "p1 = " << format_double(p1) << '\n';
  out << "axis = " << (axis == Axis::structure ? "gamma" : "cin_minus_cout") << '\n';
  out << "axis_min = " << format_double(axis_min) << '\n';
  out << "axis_max = " << format_double(axis_max) << '\n';
  out << "axis_steps = " << axis_steps << '\n';
  for (double t : thetas) out << "theta = " << format_double(t) << '\n';
  out << "samples = " << samples << '\n';
  out << "base_seed = " << base_seed << '\n';
  for (const auto& o : outputs) out << "output = " << o << '\n';
  out << "tol = " << format_double(tol) << '\n';
  if (trunc_eps) out << "trunc_eps = " << format_double(*trunc_eps) << '\n';
  out << "cheeger = " << (cheeger ? "true" : "false") << '\n';
  out << "max_cell_seconds = " << format_double(max_cell_seconds) << '\n';
  out << "max_work = " << max_work << '\n';
  return out.str();
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ParameterError("sweep spec: '" + key + "' expects a number, got '" + v + "'");
  }
}

std::uint64_t to_unsigned(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v.front() == '-') throw std::invalid_argument(v);
    const unsigned long long u = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return u;
  } catch (const std::exception&) {
    throw ParameterError("sweep spec: '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParameterError("sweep spec: '" + key + "' expects true or false, got '" + v + "'");
}

}  // namespace

SweepSpec parse_sweep_spec(std::istream& in) {
  SweepSpec spec;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("sweep spec line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "mean_degree") key = "degree";
    if (key == "steps") key = "axis_steps";
    const bool list_key = key == "theta" || key == "output";
    if (!list_key && !seen.insert(key).second) {
      throw ParameterError("sweep spec line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    if (key == "ensemble") {
      if (value == "regular") spec.ensemble = EnsembleKind::regular;
      else if (value == "sbm") spec.ensemble = EnsembleKind::sbm;
      else throw ParameterError("sweep spec: unknown ensemble '" + value + "'");
    } else if (key == "n") {
      spec.n = to_unsigned(key, value);
    } else if (key == "degree") {
      spec.degree = to_double(key, value);
    } else if (key == "p1") {
      spec.p1 = to_double(key, value);
    } else if (key == "axis") {
      if (value == "gamma" || value == "Gamma" || value == "structure") spec.axis = Axis::structure;
      else if (value == "cin_minus_cout") spec.axis = Axis::cin_minus_cout;
      else throw ParameterError("sweep spec: unknown axis '" + value + "'");
    } else if (key == "axis_min") {
      spec.axis_min = to_double(key, value);
    } else if (key == "axis_max") {
      spec.axis_max = to_double(key, value);
    } else if (key == "axis_steps") {
      spec.axis_steps = static_cast<int>(to_unsigned(key, value));
    } else if (key == "theta") {
      spec.thetas.push_back(to_double(key, value));
    } else if (key == "samples") {
      spec.samples = static_cast<int>(to_unsigned(key, value));
    } else if (key == "base_seed") {
      spec.base_seed = to_unsigned(key, value);
    } else if (key == "output") {
      spec.outputs.insert(value);
    } else if (key == "tol") {
      spec.tol = to_double(key, value);
    } else if (key == "trunc_eps") {
      spec.trunc_eps = to_double(key, value);
    } else if (key == "cheeger") {
      spec.cheeger = to_bool(key, value);
    } else if (key == "max_cell_seconds") {
      spec.max_cell_seconds = to_double(key, value);
    } else if (key == "max_work") {
      spec.max_work = to_unsigned(key, value);
    } else {
      throw ParameterError("sweep spec line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  if (seen.count("n") == 0) throw ParameterError("sweep spec: 'n' is required");
  spec.validate();
  return spec;
}

SweepSpec parse_sweep_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open sweep spec '" + path + "'");
  return parse_sweep_spec(in);
}

std::string spec_hash(const SweepSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : spec.canonical_text()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

MeanSe mean_se(const std::vector<double>& values) {
  MeanSe out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.se = std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
  }
  return out;
}

DegreeDistribution ema_distribution(const SweepSpec& spec) {
  if (spec.ensemble == EnsembleKind::regular) return DegreeDistribution::regular(static_cast<int>(spec.degree));
  const double eps = spec.trunc_eps.value_or(1.0 / static_cast<double>(spec.n));
  return ema::poisson_truncated(spec.degree, eps);
}

namespace {

EmaCell ema_cell_with(const SweepSpec& spec, const DegreeDistribution& dist, double structure, double theta) {
  EmaCell cell;
  cell.solution = ema::classify_phase({&dist, structure, theta, spec.p1});
  if (spec.ensemble == EnsembleKind::regular) {
    const int c = static_cast<int>(spec.degree);
    switch (cell.solution.phase) {
      case ema::Phase::detectable:
        cell.predicted_overlap = ema::predicted_overlap_regular(c, structure, spec.p1);
        break;
      case ema::Phase::undetectable:
        cell.predicted_overlap = 0.5;
        break;
      case ema::Phase::unpartitioned:
        // Uniform sign puts every node on one side.
        cell.predicted_overlap = std::max(spec.p1, 1.0 - spec.p1);
        break;
    }
  }
  return cell;
}

PlantedSpec planted_at(const SweepSpec& spec, double structure, std::uint64_t seed) {
  PlantedSpec p;
  p.n_nodes = spec.n;
  p.p1 = spec.p1;
  p.seed = seed;
  if (spec.ensemble == EnsembleKind::regular) {
    p.kind = RegularKind{static_cast<int>(spec.degree), std::min(structure, 1.0)};
  } else {
    const auto rates = sbm_rates(spec.degree, spec.p1, std::min(structure, 1.0));
    p.kind = SbmKind{rates.c_in, std::max(rates.c_out, 0.0)};
  }
  return p;
}

// One sampled graph evaluated at every θ.
struct SampleResult {
  std::uint64_t seed = 0;
  std::vector<SweepRecord> per_theta;
};

SampleResult run_sample(const SweepSpec& spec, int j, int k) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto over_budget = [&] {
    return spec.max_cell_seconds > 0.0 &&
           std::chrono::duration<double>(clock::now() - start).count() > spec.max_cell_seconds;
  };

  SampleResult out;
  out.seed = derive_seed(spec.base_seed, {static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(k)});
  out.per_theta.resize(spec.thetas.size());

  Graph g;
  std::string failure;
  std::optional<double> cheeger;
  try {
    g = generate(planted_at(spec, spec.structure_at(j), out.seed));
    if (spec.cheeger) {
      cheeger = second_smallest_normalized_laplacian(g, spec.tol, derive_seed(out.seed, {2})).cheeger_lower_bound;
    }
  } catch (const Error& e) {
    failure = e.what();
  }

  for (std::size_t t = 0; t < spec.thetas.size(); ++t) {
    SweepRecord& r = out.per_theta[t];
    r.sample_index = k;
    r.seed = out.seed;
    if (failure.empty() && over_budget()) {
      failure = "cell exceeded max_cell_seconds = " + format_double(spec.max_cell_seconds);
    }
    if (!failure.empty()) {
      r.error = failure;
      continue;
    }
    r.cheeger_lower_bound_theta = cheeger;
    try {
      LanczosOptions opts;
      opts.tol = spec.tol;
      opts.seed = derive_seed(out.seed, {1});
      const SpectralOutcome o = spectral_bisection(g, spec.thetas[t], opts);
      if (spec.wants("lambda1")) r.lambda1 = o.lambda1;
      if (spec.wants("overlap")) r.overlap = o.overlap;
      if (spec.wants("ipr")) r.ipr = o.ipr;
      if (spec.wants("unpartitioned_rate")) r.unpartitioned = o.unpartitioned ? 1.0 : 0.0;
      if (spec.wants("ones_alignment")) r.ones_alignment = o.ones_alignment;
    } catch (const Error& e) {
      r.error = e.what();
    }
  }
  return out;
}

void fill_aggregate(SweepRecord& agg, const std::vector<const SweepRecord*>& rows) {
  agg.sample_index = -1;
  auto collect = [&](auto member) {
    std::vector<double> v;
    for (const auto* r : rows) {
      if (r->error.empty() && (r->*member)) v.push_back(*(r->*member));
    }
    return v;
  };
  auto set = [&](auto member, auto se_member) {
    const auto v = collect(member);
    if (v.empty()) return;
    const auto m = mean_se(v);
    agg.*member = m.mean;
    agg.*se_member = m.se;
  };
  set(&SweepRecord::lambda1, &SweepRecord::lambda1_se);
  set(&SweepRecord::overlap, &SweepRecord::overlap_se);
  set(&SweepRecord::ipr, &SweepRecord::ipr_se);
  set(&SweepRecord::unpartitioned, &SweepRecord::unpartitioned_se);
  set(&SweepRecord::ones_alignment, &SweepRecord::ones_alignment_se);
  set(&SweepRecord::cheeger_lower_bound_theta, &SweepRecord::cheeger_lower_bound_theta_se);
  std::size_t failed = 0;
  for (const auto* r : rows) failed += r->error.empty() ? 0 : 1;
  if (failed > 0) agg.error = std::to_string(failed) + " of " + std::to_string(rows.size()) + " samples failed";
}

template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

EmaCell ema_cell(const SweepSpec& spec, double structure, double theta) {
  const DegreeDistribution dist = ema_distribution(spec);
  return ema_cell_with(spec, dist, structure, theta);
}

std::vector<SweepRecord> run_sweep(const SweepSpec& spec, const RunOptions& options) {
  spec.validate();
  const std::string hash = spec_hash(spec);
  const int steps = spec.axis_steps;
  const int samples = spec.samples;

  std::vector<SampleResult> results(static_cast<std::size_t>(steps) * samples);
  parallel_for(results.size(), options.threads, [&](std::size_t idx) {
    results[idx] = run_sample(spec, static_cast<int>(idx / samples), static_cast<int>(idx % samples));
  });

  std::optional<DegreeDistribution> dist;
  if (spec.wants("ema")) dist = ema_distribution(spec);

  std::vector<SweepRecord> rows;
  rows.reserve(static_cast<std::size_t>(steps) * spec.thetas.size() * (samples + 1));
  for (int j = 0; j < steps; ++j) {
    const double structure = spec.structure_at(j);
    for (std::size_t t = 0; t < spec.thetas.size(); ++t) {
      SweepRecord base;
      base.ensemble = ensemble_name(spec.ensemble);
      base.n = spec.n;
      base.degree = spec.degree;
      base.p1 = spec.p1;
      base.theta = spec.thetas[t];
      base.gamma_struct = structure;
      base.cin_minus_cout = spec.cin_minus_cout_at(j);
      base.spec_hash = hash;
      std::string ema_error;
      if (dist) {
        try {
          const EmaCell cell = ema_cell_with(spec, *dist, std::min(structure, 1.0), spec.thetas[t]);
          base.ema_phase = std::string(1, ema::phase_code(cell.solution.phase));
          base.ema_lambda1 = cell.solution.lambda1;
          base.ema_overlap = cell.predicted_overlap;
        } catch (const Error& e) {
          ema_error = std::string("ema: ") + e.what();
        }
      }

      const std::size_t first = rows.size();
      for (int k = 0; k < samples; ++k) {
        const SweepRecord& sample = results[static_cast<std::size_t>(j) * samples + k].per_theta[t];
        SweepRecord r = base;
        r.sample_index = k;
        r.seed = sample.seed;
        r.lambda1 = sample.lambda1;
        r.overlap = sample.overlap;
        r.ipr = sample.ipr;
        r.unpartitioned = sample.unpartitioned;
        r.ones_alignment = sample.ones_alignment;
        r.cheeger_lower_bound_theta = sample.cheeger_lower_bound_theta;
        r.error = sample.error;
        rows.push_back(std::move(r));
      }
      std::vector<const SweepRecord*> members;
      for (std::size_t i = first; i < rows.size(); ++i) members.push_back(&rows[i]);
      SweepRecord agg = base;
      fill_aggregate(agg, members);
      if (!ema_error.empty()) agg.error = agg.error.empty() ? ema_error : agg.error + "; " + ema_error;
      rows.push_back(std::move(agg));
    }
  }
  return rows;
}

namespace {

std::string csv_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::string csv_text(std::string s) {
  for (char& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ';';
  }
  return s;
}

}  // namespace

const std::vector<std::string>& sweep_csv_columns() {
  static const std::vector<std::string> cols{
      "ensemble",       "n",
      "degree",         "p1",
      "theta",          "gamma_struct",
      "cin_minus_cout", "sample_index",
      "seed",           "lambda1",
      "overlap",        "ipr",
      "unpartitioned",  "ones_alignment",
      "ema_phase",      "ema_lambda1",
      "ema_overlap",    "cheeger_lower_bound_theta",
      "lambda1_se",     "overlap_se",
      "ipr_se",         "unpartitioned_se",
      "ones_alignment_se", "cheeger_lower_bound_theta_se",
      "spec_hash",      "error"};
  return cols;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records) {
  const auto& cols = sweep_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : records) {
    out << r.ensemble << ',' << r.n << ',' << format_double(r.degree) << ',' << format_double(r.p1) << ','
        << format_double(r.theta) << ',' << format_double(r.gamma_struct) << ',' << format_double(r.cin_minus_cout)
        << ',' << r.sample_index << ',' << (r.seed ? std::to_string(*r.seed) : std::string()) << ','
        << csv_field(r.lambda1) << ',' << csv_field(r.overlap) << ',' << csv_field(r.ipr) << ','
        << csv_field(r.unpartitioned) << ',' << csv_field(r.ones_alignment) << ',' << r.ema_phase.value_or("")
        << ',' << csv_field(r.ema_lambda1) << ',' << csv_field(r.ema_overlap) << ','
        << csv_field(r.cheeger_lower_bound_theta) << ',' << csv_field(r.lambda1_se) << ','
        << csv_field(r.overlap_se) << ',' << csv_field(r.ipr_se) << ',' << csv_field(r.unpartitioned_se) << ','
        << csv_field(r.ones_alignment_se) << ',' << csv_field(r.cheeger_lower_bound_theta_se) << ','
        << r.spec_hash << ',' << csv_text(r.error) << '\n';
  }
}

namespace {

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

void write_sweep_json(std::ostream& out, const std::vector<SweepRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json o;
    o["ensemble"] = r.ensemble;
    o["n"] = r.n;
    o["degree"] = r.degree;
    o["p1"] = r.p1;
    o["theta"] = r.theta;
    o["gamma_struct"] = r.gamma_struct;
    o["cin_minus_cout"] = r.cin_minus_cout;
    o["sample_index"] = r.sample_index;
    o["seed"] = r.seed ? nlohmann::json(*r.seed) : nlohmann::json(nullptr);
    o["lambda1"] = opt_json(r.lambda1);
    o["overlap"] = opt_json(r.overlap);
    o["ipr"] = opt_json(r.ipr);
    o["unpartitioned"] = opt_json(r.unpartitioned);
    o["ones_alignment"] = opt_json(r.ones_alignment);
    o["ema_phase"] = r.ema_phase ? nlohmann::json(*r.ema_phase) : nlohmann::json(nullptr);
    o["ema_lambda1"] = opt_json(r.ema_lambda1);
    o["ema_overlap"] = opt_json(r.ema_overlap);
    o["cheeger_lower_bound_theta"] = opt_json(r.cheeger_lower_bound_theta);
    o["lambda1_se"] = opt_json(r.lambda1_se);
    o["overlap_se"] = opt_json(r.overlap_se);
    o["ipr_se"] = opt_json(r.ipr_se);
    o["unpartitioned_se"] = opt_json(r.unpartitioned_se);
    o["ones_alignment_se"] = opt_json(r.ones_alignment_se);
    o["cheeger_lower_bound_theta_se"] = opt_json(r.cheeger_lower_bound_theta_se);
    o["spec_hash"] = r.spec_hash;
    o["error"] = r.error;
    arr.push_back(std::move(o));
  }
  out << arr.dump(2) << '\n';
}

double PhaseDiagramSpec::theta_at(int i) const {
  if (theta_steps <= 1) return theta_min;
  return theta_min + (theta_max - theta_min) * i / (theta_steps - 1);
}

std::vector<PhaseDiagramRow> run_phase_diagram(const PhaseDiagramSpec& spec, const RunOptions& options) {
  if (spec.theta_steps < 1) throw ParameterError("phase diagram: theta_steps must be >= 1");
  if (!(spec.theta_min > 0.0) || spec.theta_max < spec.theta_min) {
    throw ParameterError("phase diagram: need 0 < theta_min <= theta_max");
  }
  SweepSpec grid = spec.grid;
  grid.thetas.clear();
  for (int i = 0; i < spec.theta_steps; ++i) grid.thetas.push_back(spec.theta_at(i));
  const bool monte_carlo = grid.samples > 0;
  if (!monte_carlo) {
    grid.samples = 1;  // validation only
    if (grid.n < 2) grid.n = 2;
  }
  grid.validate();

  std::vector<SweepRecord> aggregates;
  if (monte_carlo) {
    SweepSpec mc = grid;
    mc.outputs = {"overlap"};
    mc.cheeger = true;
    for (auto& r : run_sweep(mc, options)) {
      if (r.sample_index == -1) aggregates.push_back(std::move(r));
    }
  }

  const DegreeDistribution dist = ema_distribution(grid);
  std::vector<PhaseDiagramRow> rows;
  for (int i = 0; i < spec.theta_steps; ++i) {
    for (int j = 0; j < grid.axis_steps; ++j) {
      PhaseDiagramRow row;
      row.gamma_struct = grid.structure_at(j);
      row.cin_minus_cout = grid.cin_minus_cout_at(j);
      row.theta = grid.thetas[i];
      row.solution = ema::classify_phase({&dist, std::min(row.gamma_struct, 1.0), row.theta, grid.p1});
      if (monte_carlo) {
        // Sweep rows are grouped by structure index, then θ.
        const SweepRecord& agg = aggregates[static_cast<std::size_t>(j) * grid.thetas.size() + i];
        row.mc_overlap = agg.overlap;
        row.mc_overlap_se = agg.overlap_se;
        row.cheeger_lower_bound_theta = agg.cheeger_lower_bound_theta;
        row.error = agg.error;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_phase_diagram_csv(std::ostream& out, const std::vector<PhaseDiagramRow>& rows, bool with_monte_carlo) {
  out << "gamma_struct,theta,phase,phi,lambda1,a_hat,m_hat_sq";
  if (with_monte_carlo) out << ",mc_overlap,mc_overlap_se,cheeger_lower_bound_theta,error";
  out << '\n';
  for (const auto& r : rows) {
    const auto& s = r.solution;
    out << format_double(r.gamma_struct) << ',' << format_double(r.theta) << ',' << ema::phase_code(s.phase) << ','
        << format_double(s.phi) << ',' << format_double(s.lambda1) << ',' << format_double(s.a_hat) << ','
        << csv_field(s.m_hat_sq);
    if (with_monte_carlo) {
      out << ',' << csv_field(r.mc_overlap) << ',' << csv_field(r.mc_overlap_se) << ','
          << csv_field(r.cheeger_lower_bound_theta) << ',' << csv_text(r.error);
    }
    out << '\n';
  }
}

void write_phase_diagram_json(std::ostream& out, const std::vector<PhaseDiagramRow>& rows, bool with_monte_carlo) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    const auto& s = r.solution;
    nlohmann::json o;
    o["gamma_struct"] = r.gamma_struct;
    o["cin_minus_cout"] = r.cin_minus_cout;
    o["theta"] = r.theta;
    o["phase"] = std::string(1, ema::phase_code(s.phase));
    o["phi"] = s.phi;
    o["lambda1"] = s.lambda1;
    o["a_hat"] = s.a_hat;
    o["m_hat_sq"] = opt_json(s.m_hat_sq);
    if (with_monte_carlo) {
      o["mc_overlap"] = opt_json(r.mc_overlap);
      o["mc_overlap_se"] = opt_json(r.mc_overlap_se);
      o["cheeger_lower_bound_theta"] = opt_json(r.cheeger_lower_bound_theta);
      o["cheeger_source"] = "sampled instances";
      o["error"] = r.error;
    }
    arr.push_back(std::move(o));
  }
  out << arr.dump(2) << '\n';
}

}  // namespace specphase::lab
