#include "fracfv/cartesian.hpp"
#include "fracfv/error.hpp"
#include "fracfv/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace fracfv {

#ifndef FRACFV_GIT_DESCRIBE
#define FRACFV_GIT_DESCRIBE "unknown"
#endif

const char* build_version() { return FRACFV_GIT_DESCRIBE; }

const char* to_string(DiscChoice choice) {
  switch (choice) {
    case DiscChoice::Tpfa: return "tpfa";
    case DiscChoice::Mpfa: return "mpfa";
    case DiscChoice::Hybrid: return "hybrid";
  }
  return "?";
}

DiscChoice parse_disc_choice(const std::string& text) {
  if (text == "tpfa") return DiscChoice::Tpfa;
  if (text == "mpfa") return DiscChoice::Mpfa;
  if (text == "hybrid") return DiscChoice::Hybrid;
  throw UsageError("unknown discretization '" + text + "' (expected tpfa, mpfa or hybrid)");
}

std::vector<FluxMethod> flux_methods(const MixedDimensionalMesh& mesh, DiscChoice choice) {
  std::vector<FluxMethod> out;
  for (const auto& g : mesh.subdomains) {
    switch (choice) {
      case DiscChoice::Tpfa: out.push_back(FluxMethod::Tpfa); break;
      case DiscChoice::Mpfa: out.push_back(FluxMethod::Mpfa); break;
      case DiscChoice::Hybrid: out.push_back(g.dim == mesh.ambient_dim ? FluxMethod::Tpfa : FluxMethod::Mpfa); break;
    }
  }
  return out;
}

// ---------------------------------------------------------------- parameters

const std::vector<std::string>& case_ids() {
  static const std::vector<std::string> ids{"1.1", "1.2-lite", "1.3", "2", "3", "4"};
  return ids;
}

const std::map<std::string, double>& case_parameters(const std::string& id) {
  static const std::map<std::string, std::map<std::string, double>> table{
      {"1.1", {{"k_h", 1.0}, {"k_v", 1.0}, {"k_i", -1.0}, {"aperture", 1e-2}, {"distance_correction", 0.0}}},
      {"1.2-lite", {{"k_conducting", 1e4}, {"k_blocking", 1e-4}, {"aperture", 1e-4}, {"reference_resolution", 80.0}}},
      {"1.3",
       {{"k_conducting", 1e6}, {"k_blocking", 1e-6}, {"aperture", 1e-6}, {"t_final", 0.5}, {"steps", 200.0}, {"reduced_fluxes", 1.0}}},
      {"2",
       {{"ratio", 1.0}, {"angle", 30.0}, {"k_fracture", 1e4}, {"aperture", 1e-3}, {"reference_resolution", 128.0},
        {"distance_correction", 1.0}}},
      {"3", {{"aperture", 1e-3}, {"k_scale", 1e3}, {"t_final", 30.0}, {"steps", 200.0}}},
      {"4",
       {{"k_conducting", 1e5}, {"k_blocking", 1e-5}, {"k_upper", 1e-2}, {"k_lower", 1e-3}, {"aperture", 1e-6}, {"rate", 0.2},
        {"t_final", 2.0}, {"steps", 200.0}, {"reduced_fluxes", 0.0}}},
  };
  const auto it = table.find(id);
  if (it == table.end()) throw UsageError("unknown case '" + id + "'");
  return it->second;
}

std::map<std::string, double> resolve_parameters(const CaseSpec& spec) {
  std::map<std::string, double> params = case_parameters(spec.id);
  for (const auto& [key, value] : spec.overrides) {
    const auto it = params.find(key);
    if (it == params.end()) {
      std::ostringstream os;
      os << "no parameter '" << key << "' (parameters:";
      for (const auto& [k, v] : params) os << ' ' << k;
      os << ')';
      throw UsageError(os.str());
    }
    if (!std::isfinite(value)) throw UsageError("override '" + key + "' must be finite");
    it->second = value;
  }
  return params;
}

std::pair<std::string, double> parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("override '" + text + "' is not of the form key=value");
  const std::string key = text.substr(0, eq);
  const std::string value = text.substr(eq + 1);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) throw UsageError("override '" + key + "' needs a numeric value, got '" + value + "'");
  return {key, v};
}

int default_resolution(const std::string& id) {
  if (id == "1.1" || id == "1.2-lite") return 20;
  if (id == "2") return 16;
  case_parameters(id);
  return 8;
}

DiscChoice default_disc(const std::string& id) {
  if (id == "2") return DiscChoice::Mpfa;
  if (id == "3") return DiscChoice::Hybrid;
  case_parameters(id);
  return DiscChoice::Tpfa;
}

double ErrorReport::error(const std::string& name) const {
  for (const auto& e : errors) {
    if (e.name == name) return e.value;
  }
  throw UsageError("report has no error '" + name + "'");
}

double ErrorReport::metric(const std::string& name) const {
  for (const auto& [k, v] : metrics) {
    if (k == name) return v;
  }
  throw UsageError("report has no metric '" + name + "'");
}

bool ErrorReport::has_error(const std::string& name) const {
  return std::any_of(errors.begin(), errors.end(), [&](const ErrorEntry& e) { return e.name == name; });
}

bool ErrorReport::has_metric(const std::string& name) const {
  return std::any_of(metrics.begin(), metrics.end(), [&](const auto& m) { return m.first == name; });
}

// ---------------------------------------------------------------- geometry presets

namespace {

constexpr double kTol = 1e-12;

bool near(double a, double b) { return std::abs(a - b) <= kTol; }

int integer_parameter(const std::map<std::string, double>& p, const std::string& key, int min) {
  const double v = p.at(key);
  if (v != std::floor(v) || v < min) {
    throw UsageError("parameter '" + key + "' must be an integer >= " + std::to_string(min));
  }
  return static_cast<int>(v);
}

void require_multiple(const std::string& id, int resolution, int factor) {
  if (resolution <= 0 || resolution % factor != 0) {
    throw UsageError("case " + id + " needs a resolution that is a positive multiple of " + std::to_string(factor));
  }
}

FracturePatch patch(std::string name, int axis, double position, Vec3 lower, Vec3 upper, double aperture, PermeabilityTensor k) {
  FracturePatch p;
  p.name = std::move(name);
  p.normal_axis = axis;
  p.position = position;
  p.lower = lower;
  p.upper = upper;
  p.aperture = aperture;
  p.permeability = std::move(k);
  return p;
}

Problem finish(MixedDimensionalMesh mesh, const FractureNetworkSpec& spec, const std::function<PermeabilityTensor(const Vec3&)>& matrix_k,
               DiscChoice disc) {
  auto k = assign_permeability(mesh, spec, matrix_k);
  Problem p = make_problem(std::move(mesh), std::move(k), FluxMethod::Tpfa);
  p.methods = flux_methods(p.mesh, disc);
  return p;
}

Problem build_11(const std::map<std::string, double>& prm, int n, DiscChoice disc) {
  require_multiple("1.1", n, 2);
  const double a = prm.at("aperture");
  FractureNetworkSpec spec;
  spec.dim = 2;
  spec.fractures.push_back(patch("vertical", 0, 0.5, Vec3::Zero(), Vec3::Ones(), a, PermeabilityTensor::isotropic(2, prm.at("k_v"))));
  spec.fractures.push_back(patch("horizontal", 1, 0.5, Vec3::Zero(), Vec3::Ones(), a, PermeabilityTensor::isotropic(2, prm.at("k_h"))));
  if (prm.at("k_i") > 0.0) {
    spec.intersection_rule.kind = IntersectionRule::Kind::Explicit;
    spec.intersection_rule.tensor = PermeabilityTensor::isotropic(2, prm.at("k_i"));
  } else {
    spec.intersection_rule.kind = IntersectionRule::Kind::FromPatch;
    spec.intersection_rule.patch = 0;
  }
  Problem p = finish(build_cartesian_with_fractures(spec, {n, n, 1}), spec,
                     [](const Vec3&) { return PermeabilityTensor::isotropic(2, 1.0); }, disc);
  set_boundary(p, [](const Vec3& x) { return near(x[0], 0.0) || near(x[0], 1.0); },
               [](const Vec3& x) { return BoundaryCondition{BcKind::Dirichlet, 1.0 - x[0]}; });
  p.coupling.distance_correction = prm.at("distance_correction") != 0.0;
  return p;
}

FractureNetworkSpec network_12(const std::map<std::string, double>& prm) {
  const double a = prm.at("aperture");
  const auto kc = PermeabilityTensor::isotropic(2, prm.at("k_conducting"));
  const auto kb = PermeabilityTensor::isotropic(2, prm.at("k_blocking"));
  FractureNetworkSpec spec;
  spec.dim = 2;
  // Horizontal fractures have normal axis 1 and span [lo, hi] in x; vertical ones the reverse.
  auto h = [&](const char* name, double y, double lo, double hi, const PermeabilityTensor& k) {
    spec.fractures.push_back(patch(name, 1, y, Vec3(lo, 0, 0), Vec3(hi, 1, 0), a, k));
  };
  auto v = [&](const char* name, double x, double lo, double hi, const PermeabilityTensor& k) {
    spec.fractures.push_back(patch(name, 0, x, Vec3(0, lo, 0), Vec3(1, hi, 0), a, k));
  };
  h("c1", 0.5, 0.1, 0.9, kc);
  h("c2", 0.25, 0.05, 0.6, kc);
  h("c3", 0.75, 0.4, 0.95, kc);
  v("c4", 0.3, 0.15, 0.85, kc);
  v("c5", 0.7, 0.15, 0.85, kc);
  h("c6", 0.9, 0.1, 0.5, kc);
  v("c7", 0.15, 0.6, 0.95, kc);
  h("c8", 0.1, 0.5, 0.9, kc);
  v("b1", 0.5, 0.05, 0.95, kb);
  h("b2", 0.6, 0.6, 0.95, kb);
  spec.intersection_rule.kind = IntersectionRule::Kind::HarmonicMean;
  return spec;
}

Problem build_12(const std::map<std::string, double>& prm, int n, DiscChoice disc) {
  require_multiple("1.2-lite", n, 20);
  const FractureNetworkSpec spec = network_12(prm);
  Problem p = finish(build_cartesian_with_fractures(spec, {n, n, 1}), spec,
                     [](const Vec3&) { return PermeabilityTensor::isotropic(2, 1.0); }, disc);
  set_boundary(p, [](const Vec3& x) { return near(x[0], 0.0) || near(x[0], 1.0); },
               [](const Vec3& x) { return BoundaryCondition{BcKind::Dirichlet, near(x[0], 0.0) ? 1.0 : 0.0}; });
  return p;
}

Problem build_13(const std::map<std::string, double>& prm, int n, DiscChoice disc) {
  require_multiple("1.3", n, 2);
  const double a = prm.at("aperture");
  FractureNetworkSpec spec;
  spec.dim = 3;
  spec.fractures.push_back(patch("xy", 2, 0.5, Vec3::Zero(), Vec3::Ones(), a, PermeabilityTensor::isotropic(3, prm.at("k_conducting"))));
  spec.fractures.push_back(patch("yz", 0, 0.5, Vec3::Zero(), Vec3::Ones(), a, PermeabilityTensor::isotropic(3, prm.at("k_blocking"))));
  spec.intersection_rule.kind = IntersectionRule::Kind::LeastPermeable;
  Problem p = finish(build_cartesian_with_fractures(spec, {n, n, n}), spec,
                     [](const Vec3&) { return PermeabilityTensor::isotropic(3, 1.0); }, disc);
  set_boundary(p, [](const Vec3& x) { return near(x[0], 0.0) || near(x[0], 1.0); },
               [](const Vec3& x) { return BoundaryCondition{BcKind::Dirichlet, near(x[0], 0.0) ? 1.0 : 0.0}; });
  set_tracer_boundary(p, [](const Vec3&) { return true; }, 0.0);
  return p;
}

PermeabilityTensor case2_matrix_k(const std::map<std::string, double>& prm) {
  const double ratio = prm.at("ratio");
  if (!(ratio >= 1.0)) throw UsageError("anisotropy ratio must be at least 1");
  const double principal[2] = {ratio, 1.0};
  return PermeabilityTensor::rotated(principal, prm.at("angle") * std::numbers::pi / 180.0);
}

bool case2_source_face(const Vec3& x) { return (near(x[0], 0.0) && x[1] < 0.25) || (near(x[1], 0.0) && x[0] < 0.25); }
bool case2_sink_face(const Vec3& x) { return (near(x[0], 1.0) && x[1] > 0.75) || (near(x[1], 1.0) && x[0] > 0.75); }

void case2_boundary(Problem& p) {
  set_boundary(p, [](const Vec3& x) { return case2_source_face(x) || case2_sink_face(x); },
               [](const Vec3& x) { return BoundaryCondition{BcKind::Dirichlet, case2_source_face(x) ? 1.0 : 0.0}; });
}

Problem build_2(const std::map<std::string, double>& prm, int n, DiscChoice disc) {
  require_multiple("2", n, 4);
  FractureNetworkSpec spec;
  spec.dim = 2;
  spec.fractures.push_back(
      patch("fracture", 1, 0.5, Vec3::Zero(), Vec3::Ones(), prm.at("aperture"), PermeabilityTensor::isotropic(2, prm.at("k_fracture"))));
  const PermeabilityTensor km = case2_matrix_k(prm);
  Problem p = finish(build_cartesian_with_fractures(spec, {n, n, 1}), spec, [&](const Vec3&) { return km; }, disc);
  case2_boundary(p);
  p.coupling.distance_correction = prm.at("distance_correction") != 0.0;
  return p;
}

/// Equi-dimensional reference: the fracture is a strip of cells of width a.
Problem build_2_reference(const std::map<std::string, double>& prm) {
  const int n = integer_parameter(prm, "reference_resolution", 2);
  if (n % 2 != 0) throw UsageError("reference_resolution must be even");
  const double a = prm.at("aperture");
  FractureNetworkSpec spec;
  spec.dim = 2;
  AxisCoordinates axes;
  const int half = n / 2;
  for (int i = 0; i <= n; ++i) axes[0].push_back(static_cast<double>(i) / n);
  axes[0].back() = 1.0;
  const double lo = 0.5 - 0.5 * a;
  const double hi = 0.5 + 0.5 * a;
  for (int j = 0; j <= half; ++j) axes[1].push_back(lo * j / half);
  for (int j = 0; j <= half; ++j) axes[1].push_back(hi + (1.0 - hi) * j / half);
  axes[1].back() = 1.0;
  const PermeabilityTensor km = case2_matrix_k(prm);
  const PermeabilityTensor kf = PermeabilityTensor::isotropic(2, prm.at("k_fracture"));
  Problem p = finish(build_cartesian_with_fractures(spec, axes), spec,
                     [&](const Vec3& x) { return std::abs(x[1] - 0.5) < a ? kf : km; }, DiscChoice::Mpfa);
  case2_boundary(p);
  return p;
}

Problem build_3(const std::map<std::string, double>& prm, int n, DiscChoice disc) {
  require_multiple("3", n, 4);
  Mat3 k;
  k << 2.0 / 3.0, -1.0 / 3.0, 0.0, -1.0 / 3.0, 2.0 / 3.0, 0.0, 0.0, 0.0, 1.0;
  FractureNetworkSpec spec;
  spec.dim = 3;
  spec.fractures.push_back(patch("fracture", 2, 0.5, Vec3::Zero(), Vec3::Ones(), prm.at("aperture"),
                                 PermeabilityTensor::from_matrix(3, k * prm.at("k_scale"))));
  Problem p = finish(build_cartesian_with_fractures(spec, {n, n, n}), spec,
                     [](const Vec3&) { return PermeabilityTensor::isotropic(3, 1.0); }, disc);
  auto inflow = [](const Vec3& x) { return near(x[2], 0.0) && x[0] < 0.25 && x[1] < 0.25; };
  auto outflow = [](const Vec3& x) { return near(x[2], 1.0) && x[0] > 0.75 && x[1] > 0.75; };
  set_boundary(p, [&](const Vec3& x) { return inflow(x) || outflow(x); },
               [&](const Vec3& x) { return BoundaryCondition{BcKind::Dirichlet, inflow(x) ? 1.0 : 0.0}; });
  set_tracer_boundary(p, [](const Vec3&) { return true; }, 0.0);
  return p;
}

FractureNetworkSpec network_4(const std::map<std::string, double>& prm) {
  const double a = prm.at("aperture");
  const auto kc = PermeabilityTensor::isotropic(3, prm.at("k_conducting"));
  const auto kb = PermeabilityTensor::isotropic(3, prm.at("k_blocking"));
  FractureNetworkSpec spec;
  spec.dim = 3;
  const Vec3 lo = Vec3::Constant(0.125);
  const Vec3 hi = Vec3::Constant(0.875);
  spec.fractures.push_back(patch("x-plane", 0, 0.5, lo, hi, a, kc));
  spec.fractures.push_back(patch("y-plane", 1, 0.5, lo, hi, a, kc));
  spec.fractures.push_back(patch("lower", 2, 0.25, lo, hi, a, kc));
  spec.fractures.push_back(patch("upper", 2, 0.75, lo, hi, a, kc));
  spec.fractures.push_back(patch("blocking", 2, 0.5, Vec3::Constant(0.25), Vec3::Constant(0.75), a, kb));
  spec.intersection_rule.kind = IntersectionRule::Kind::LeastPermeable;
  return spec;
}

/// Injection cells: the two segments of the vertical intersection line adjacent to the centre.
std::vector<int> case4_wells(const MixedDimensionalMesh& mesh, double h) {
  const std::vector<Vec3> centres = dof_centres(mesh);
  std::vector<int> line_cells;
  for (int dof = 0; dof < mesh.num_dofs(); ++dof) {
    if (mesh.dof_dim(dof) == 1) line_cells.push_back(dof);
  }
  return {resolve_probe(centres, line_cells, Vec3(0.5, 0.5, 0.5 - 0.5 * h)),
          resolve_probe(centres, line_cells, Vec3(0.5, 0.5, 0.5 + 0.5 * h))};
}

Problem build_4(const std::map<std::string, double>& prm, int n, DiscChoice disc) {
  require_multiple("4", n, 8);
  const FractureNetworkSpec spec = network_4(prm);
  const double ku = prm.at("k_upper");
  const double kl = prm.at("k_lower");
  Problem p = finish(build_cartesian_with_fractures(spec, {n, n, n}), spec,
                     [&](const Vec3& x) { return PermeabilityTensor::isotropic(3, x[2] > 0.5 ? ku : kl); }, disc);
  auto horizontal = [](const Vec3& x) { return near(x[2], 0.0) || near(x[2], 1.0); };
  set_boundary(p, horizontal, [](const Vec3&) { return BoundaryCondition{BcKind::Dirichlet, 0.0}; });
  set_tracer_boundary(p, horizontal, 0.0);
  for (int w : case4_wells(p.mesh, 1.0 / n)) {
    p.sources[w] = 0.5 * prm.at("rate");
    p.source_concentration[w] = 1.0;
  }
  return p;
}

}  // namespace

Problem build_case_problem(const std::string& id, const std::map<std::string, double>& parameters, int resolution, DiscChoice disc) {
  if (id == "1.1") return build_11(parameters, resolution, disc);
  if (id == "1.2-lite") return build_12(parameters, resolution, disc);
  if (id == "1.3") return build_13(parameters, resolution, disc);
  if (id == "2") return build_2(parameters, resolution, disc);
  if (id == "3") return build_3(parameters, resolution, disc);
  if (id == "4") return build_4(parameters, resolution, disc);
  throw UsageError("unknown case '" + id + "'");
}

// ---------------------------------------------------------------- pipeline helpers

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string group_name(int dim, int ambient) {
  if (dim == ambient) return "matrix";
  if (dim == ambient - 1) return "fracture";
  return "intersection";
}

/// Embeds kept values into a full-size vector with NaN elsewhere.
Vector embed(const std::vector<int>& kept, const Vector& values, int size) {
  Vector out = Vector::Constant(size, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < kept.size(); ++i) out[kept[i]] = values[static_cast<int>(i)];
  return out;
}

/// Error over `subset` plus one entry per dimension group present in it.
void add_group_errors(ErrorReport& report, const std::string& quantity, const Vector& field, const Vector& reference,
                      const Vector& weights, const std::vector<int>& subset, const std::vector<int>& dims, int ambient) {
  report.add_error(quantity, l2_error(field, reference, weights, subset));
  std::map<std::string, std::vector<int>> groups;
  for (int i : subset) groups[group_name(dims[i], ambient)].push_back(i);
  for (const char* g : {"matrix", "fracture", "intersection"}) {
    const auto it = groups.find(g);
    if (it != groups.end()) report.add_error(quantity + "." + g, l2_error(field, reference, weights, it->second));
  }
}

double condition(const SparseMatrix& a) {
  return condition_number(a, a.rows() <= kDenseConditionLimit ? ConditionMode::Dense : ConditionMode::Estimate);
}

void add_condition_metrics(ErrorReport& report, const FlowSolution& sol) {
  const double full = condition(sol.system.a);
  report.add_metric("condition.full", full);
  if (sol.reduced && !sol.reduced->eliminated.empty()) {
    const double reduced = condition(sol.reduced->a_r);
    report.add_metric("condition.reduced", reduced);
    report.add_metric("condition.ratio", full / reduced);
  }
}

void add_flow_metrics(ErrorReport& report, const std::string& prefix, const FlowSolution& sol) {
  report.add_metric(prefix + "solve_residual", sol.solve.residual);
  if (!sol.reduced) {
    report.add_metric(prefix + "balance", flow_balance_error(sol.system, sol.pressure));
  }
  report.add_timing(prefix + "discretize", sol.timings.discretize);
  report.add_timing(prefix + "assemble", sol.timings.assemble);
  report.add_timing(prefix + "eliminate", sol.timings.eliminate);
  report.add_timing(prefix + "solve", sol.timings.solve);
}

struct TracerResult {
  Vector final_full;  ///< NaN on cells outside the transport field
  TransportRun run;
  double flow_imbalance = 0.0;
};

/// Runs transport on the full field, or on the kept cells with fluxes from the reduced system.
TracerResult run_tracer(const Problem& problem, const FlowSolution& sol, bool reduced_fluxes, double initial, double t_final,
                        int steps, int probe_dof) {
  const int n = problem.mesh.num_dofs();
  const bool on_kept = sol.reduced && reduced_fluxes;
  FlowField flow = on_kept ? reduced_flow_field(problem, sol) : full_flow_field(problem, sol.system, sol.pressure);
  const double imbalance = flow.flow_imbalance();
  double fill = initial;
  for (const auto& b : flow.boundary) {
    if (b.kind == TracerBcKind::Concentration && b.flux < 0.0) fill = std::min(fill, b.value);
  }
  for (const auto& src : flow.sources) {
    if (src.rate > 0.0) fill = std::min(fill, src.concentration);
  }
  close_imbalance(flow, fill);
  int probe = probe_dof;
  if (on_kept && probe >= 0) {
    probe = sol.reduced->kept_index[probe_dof];
    if (probe < 0) throw UsageError("probe cell is eliminated");
  }
  TracerResult out;
  out.flow_imbalance = imbalance;
  out.run = run_transport(flow, Vector::Constant(flow.size(), initial), t_final / steps, steps, probe);
  if (on_kept) {
    out.final_full = embed(sol.kept, out.run.final_state.concentration, n);
  } else {
    out.final_full = out.run.final_state.concentration;
  }
  return out;
}

void add_transport_metrics(ErrorReport& report, const std::string& prefix, const TracerResult& t) {
  report.add_metric(prefix + "mass_balance", t.run.max_mass_balance_error);
  report.add_metric(prefix + "flow_imbalance", t.flow_imbalance);
  report.add_metric(prefix + "min", t.run.min_value);
  report.add_metric(prefix + "max", t.run.max_value);
  report.add_metric(prefix + "maximum_principle", t.run.maximum_principle ? 1.0 : 0.0);
}

int probe_cell(const MixedDimensionalMesh& mesh, const Vec3& point) {
  const std::vector<Vec3> centres = dof_centres(mesh);
  std::vector<int> matrix;
  for (int dof = 0; dof < mesh.num_dofs(); ++dof) {
    if (mesh.dof_dim(dof) == mesh.ambient_dim) matrix.push_back(dof);
  }
  return resolve_probe(centres, matrix, point);
}

/// Injection of coarse values onto fine cells; `target[i]` is the coarse
/// subdomain of fine dof i (-1: skipped, value NaN).
Vector inject_onto(const MixedDimensionalMesh& coarse, const Vector& coarse_field, const std::vector<Vec3>& fine_centres,
                   const std::vector<int>& target) {
  Vector out = Vector::Constant(static_cast<int>(fine_centres.size()), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t s = 0; s < coarse.subdomains.size(); ++s) {
    std::vector<int> fine;
    std::vector<Vec3> points;
    for (std::size_t i = 0; i < target.size(); ++i) {
      if (target[i] == static_cast<int>(s)) {
        fine.push_back(static_cast<int>(i));
        points.push_back(fine_centres[i]);
      }
    }
    if (fine.empty()) continue;
    const auto& g = coarse.subdomains[s];
    const std::vector<int> map = injection_map(g.cell_centres, points);
    for (std::size_t k = 0; k < fine.size(); ++k) out[fine[k]] = coarse_field[coarse.dof(static_cast<int>(s), map[k])];
  }
  return out;
}

struct CaseContext {
  CaseResult result;
  Problem problem;
};

CaseContext start_case(const CaseSpec& spec) {
  CaseContext ctx;
  ctx.result.spec = spec;
  ctx.result.parameters = resolve_parameters(spec);
  ctx.result.resolution = spec.resolution > 0 ? spec.resolution : default_resolution(spec.id);
  ctx.result.disc = spec.disc.value_or(default_disc(spec.id));
  if (spec.threads < 1) throw UsageError("thread count must be positive");
  ctx.problem = build_case_problem(spec.id, ctx.result.parameters, ctx.result.resolution, ctx.result.disc);
  ctx.result.mesh = ctx.problem.mesh;
  return ctx;
}

void note_empty_elimination(ErrorReport& report, const FlowSolution& sol) {
  if (sol.reduced && sol.reduced->eliminated.empty()) report.notes.push_back("the mesh has no intersection cells; elimination is the identity");
}

/// Cases compared against a no-elimination run on the same mesh, with optional transport.
CaseResult run_against_full(const CaseSpec& spec, double initial_tracer, std::optional<Vec3> probe_point) {
  CaseContext ctx = start_case(spec);
  CaseResult& res = ctx.result;
  const Problem& problem = ctx.problem;
  ErrorReport& rep = res.report;
  const auto& prm = res.parameters;
  const int n = problem.mesh.num_dofs();
  const int ambient = problem.mesh.ambient_dim;
  const Vector volumes = dof_volumes(problem.mesh);
  const std::vector<int> dims = dof_dims(problem.mesh);

  const FlowSolution reference = solve_flow(problem, EliminationMode::None, spec.threads);
  const FlowSolution sol = spec.elimination == EliminationMode::None ? reference : solve_flow(problem, spec.elimination, spec.threads);
  note_empty_elimination(rep, sol);
  const Vector kept_pressure = embed(sol.kept, sol.kept_pressure, n);
  add_group_errors(rep, "pressure", kept_pressure, reference.pressure, volumes, sol.kept, dims, ambient);
  if (spec.id == "1.1") {
    Vector linear(n);
    const auto centres = dof_centres(problem.mesh);
    for (int i = 0; i < n; ++i) linear[i] = 1.0 - centres[i][0];
    rep.add_error("pressure.vs_linear", l2_error(kept_pressure, linear, volumes, sol.kept));
  }
  if (spec.condition_numbers) add_condition_metrics(rep, sol);
  add_flow_metrics(rep, "flow.reference.", reference);
  if (sol.reduced) add_flow_metrics(rep, "flow.", sol);
  res.fields.push_back({"pressure", sol.pressure});
  res.fields.push_back({"reference_pressure", reference.pressure});

  if (prm.count("t_final")) {
    const double t_final = prm.at("t_final");
    const int steps = integer_parameter(prm, "steps", 1);
    const bool reduced = prm.at("reduced_fluxes") != 0.0 || spec.elimination == EliminationMode::StarDelta;
    if (spec.elimination == EliminationMode::StarDelta && prm.at("reduced_fluxes") == 0.0) {
      rep.notes.push_back("Star-Delta transport always uses fluxes between kept cells");
    }
    const int probe = probe_point ? probe_cell(problem.mesh, *probe_point) : -1;
    const auto start = std::chrono::steady_clock::now();
    const TracerResult ref_t = run_tracer(problem, reference, false, initial_tracer, t_final, steps, probe);
    const TracerResult t = spec.elimination == EliminationMode::None
                               ? ref_t
                               : run_tracer(problem, sol, reduced, initial_tracer, t_final, steps, probe);
    rep.add_timing("transport", seconds_since(start));
    add_group_errors(rep, "tracer", t.final_full, ref_t.final_full, volumes, sol.kept, dims, ambient);
    add_transport_metrics(rep, "transport.reference.", ref_t);
    add_transport_metrics(rep, "transport.", t);
    if (sol.reduced) {
      rep.add_metric("flow.reduced_imbalance", reduced ? t.flow_imbalance : reduced_flow_field(problem, sol).flow_imbalance());
    }
    if (spec.elimination == EliminationMode::Schur && !reduced) {
      const TracerResult alt = run_tracer(problem, sol, true, initial_tracer, t_final, steps, -1);
      rep.add_metric("tracer.reduced_flux_error", l2_error(alt.final_full, ref_t.final_full, volumes, sol.kept).value);
    }
    res.fields.push_back({"tracer", t.final_full});
    res.fields.push_back({"reference_tracer", ref_t.final_full});
    if (probe >= 0) {
      res.series.push_back({"probe", t.run.series});
      res.series.push_back({"reference_probe", ref_t.run.series});
    }
    if (spec.id == "4") {
      double upper = 0.0;
      double lower = 0.0;
      const auto centres = dof_centres(problem.mesh);
      for (int i = 0; i < n; ++i) {
        if (dims[i] != ambient || std::isnan(t.final_full[i])) continue;
        (centres[i][2] > 0.5 ? upper : lower) += volumes[i] * t.final_full[i];
      }
      rep.add_metric("tracer.mass_upper_matrix", upper);
      rep.add_metric("tracer.mass_lower_matrix", lower);
    }
  }
  return res;
}

CaseResult run_12(const CaseSpec& spec) {
  CaseContext ctx = start_case(spec);
  CaseResult& res = ctx.result;
  ErrorReport& rep = res.report;
  const int fine_n = integer_parameter(res.parameters, "reference_resolution", 20);
  if (fine_n % res.resolution != 0) throw UsageError("reference_resolution must be a multiple of the resolution");
  const FlowSolution sol = solve_flow(ctx.problem, spec.elimination, spec.threads);
  const Problem fine = build_case_problem("1.2-lite", res.parameters, fine_n, res.disc);
  const FlowSolution ref = solve_flow(fine, EliminationMode::None, spec.threads);

  const std::vector<int> fine_dims = dof_dims(fine.mesh);
  std::vector<int> target(fine.mesh.num_dofs(), -1);
  std::vector<int> subset;
  for (std::size_t s = 0; s < fine.mesh.subdomains.size(); ++s) {
    if (fine.mesh.subdomains[s].dim < fine.mesh.ambient_dim - 1) continue;
    for (int c = 0; c < fine.mesh.subdomains[s].num_cells(); ++c) {
      const int dof = fine.mesh.dof(static_cast<int>(s), c);
      target[dof] = static_cast<int>(s);
      subset.push_back(dof);
    }
  }
  const Vector injected = inject_onto(ctx.problem.mesh, sol.pressure, dof_centres(fine.mesh), target);
  add_group_errors(rep, "pressure", injected, ref.pressure, dof_volumes(fine.mesh), subset, fine_dims, fine.mesh.ambient_dim);
  if (spec.condition_numbers) add_condition_metrics(rep, sol);
  add_flow_metrics(rep, "flow.", sol);
  add_flow_metrics(rep, "flow.reference.", ref);
  rep.add_metric("matrix_density", static_cast<double>(sol.reduced ? sol.reduced->a_r.nonZeros() : sol.system.a.nonZeros()) /
                                       std::pow(static_cast<double>(sol.reduced ? sol.reduced->a_r.rows() : sol.system.a.rows()), 2));
  res.fields.push_back({"pressure", sol.pressure});
  return res;
}

CaseResult run_2(const CaseSpec& spec) {
  CaseContext ctx = start_case(spec);
  CaseResult& res = ctx.result;
  ErrorReport& rep = res.report;
  const int fine_n = integer_parameter(res.parameters, "reference_resolution", 4);
  if (fine_n % res.resolution != 0) throw UsageError("reference_resolution must be a multiple of the resolution");
  const FlowSolution sol = solve_flow(ctx.problem, spec.elimination, spec.threads);
  note_empty_elimination(rep, sol);
  const Problem fine = build_2_reference(res.parameters);
  const FlowSolution ref = solve_flow(fine, EliminationMode::None, spec.threads);

  const double a = res.parameters.at("aperture");
  const std::vector<Vec3> fine_centres = dof_centres(fine.mesh);
  std::vector<int> target(fine_centres.size());
  std::vector<int> fine_dims(fine_centres.size());
  std::vector<int> all(fine_centres.size());
  for (std::size_t i = 0; i < fine_centres.size(); ++i) {
    const bool strip = std::abs(fine_centres[i][1] - 0.5) < a;
    target[i] = strip ? 1 : 0;
    fine_dims[i] = strip ? 1 : 2;
    all[i] = static_cast<int>(i);
  }
  const Vector injected = inject_onto(ctx.problem.mesh, sol.pressure, fine_centres, target);
  add_group_errors(rep, "pressure", injected, ref.pressure, dof_volumes(fine.mesh), all, fine_dims, 2);
  rep.add_metric("h", 1.0 / res.resolution);
  if (spec.condition_numbers) add_condition_metrics(rep, sol);
  add_flow_metrics(rep, "flow.", sol);
  add_flow_metrics(rep, "flow.reference.", ref);
  if (fine_n < 256) rep.notes.push_back("reference resolution " + std::to_string(fine_n) + " is below the 256 x 256 reference of the original study");
  res.fields.push_back({"pressure", sol.pressure});
  return res;
}

CaseResult run_3(const CaseSpec& spec) {
  CaseContext ctx = start_case(spec);
  CaseResult& res = ctx.result;
  ErrorReport& rep = res.report;
  const auto& prm = res.parameters;
  const Problem& problem = ctx.problem;
  const int n = problem.mesh.num_dofs();
  Problem mpfa = problem;
  mpfa.methods = flux_methods(mpfa.mesh, DiscChoice::Mpfa);
  const FlowSolution ref = solve_flow(mpfa, EliminationMode::None, spec.threads);
  const FlowSolution sol = solve_flow(problem, spec.elimination, spec.threads);
  note_empty_elimination(rep, sol);
  const Vector volumes = dof_volumes(problem.mesh);
  const std::vector<int> dims = dof_dims(problem.mesh);
  add_group_errors(rep, "pressure", embed(sol.kept, sol.kept_pressure, n), ref.pressure, volumes, sol.kept, dims, 3);
  add_flow_metrics(rep, "flow.", sol);
  add_flow_metrics(rep, "flow.reference.", ref);
  if (spec.condition_numbers) add_condition_metrics(rep, sol);
  if (ref.timings.discretize > 0.0) rep.add_metric("discretize_time_relative", sol.timings.discretize / ref.timings.discretize);

  const double t_final = prm.at("t_final");
  const int steps = integer_parameter(prm, "steps", 1);
  const int probe = probe_cell(problem.mesh, Vec3(1.0, 1.0, 1.0));
  const auto start = std::chrono::steady_clock::now();
  const TracerResult ref_t = run_tracer(mpfa, ref, false, 1.0, t_final, steps, probe);
  const TracerResult t = run_tracer(problem, sol, true, 1.0, t_final, steps, probe);
  rep.add_timing("transport", seconds_since(start));
  add_group_errors(rep, "tracer", t.final_full, ref_t.final_full, volumes, sol.kept, dims, 3);
  add_transport_metrics(rep, "transport.reference.", ref_t);
  add_transport_metrics(rep, "transport.", t);
  res.fields.push_back({"pressure", sol.pressure});
  res.fields.push_back({"reference_pressure", ref.pressure});
  res.fields.push_back({"tracer", t.final_full});
  res.fields.push_back({"reference_tracer", ref_t.final_full});
  res.series.push_back({"probe", t.run.series});
  res.series.push_back({"reference_probe", ref_t.run.series});
  return res;
}

}  // namespace

CaseResult run_case(const CaseSpec& spec) {
  const auto start = std::chrono::steady_clock::now();
  case_parameters(spec.id);
  CaseResult res;
  try {
    if (spec.id == "1.1") {
      res = run_against_full(spec, 0.0, std::nullopt);
    } else if (spec.id == "1.2-lite") {
      res = run_12(spec);
    } else if (spec.id == "1.3") {
      const int n = spec.resolution > 0 ? spec.resolution : default_resolution("1.3");
      const double h = 1.0 / n;
      res = run_against_full(spec, 1.0, Vec3(1.0, 0.5 + 0.5 * h, 0.5 + 0.5 * h));
    } else if (spec.id == "2") {
      res = run_2(spec);
    } else if (spec.id == "3") {
      res = run_3(spec);
    } else {
      res = run_against_full(spec, 0.0, std::nullopt);
    }
  } catch (const Error& e) {
    const std::string context = "case " + spec.id + ": " + e.what();
    switch (e.category()) {
      case ErrorCategory::Mesh: throw MeshError(context);
      case ErrorCategory::Format: throw FormatError(context);
      case ErrorCategory::Assembly: throw AssemblyError(context);
      case ErrorCategory::Solver: throw SolverError(context);
      case ErrorCategory::Usage: throw UsageError(context);
      case ErrorCategory::Io: throw IoError(context);
    }
    throw;
  }
  res.report.add_timing("total", seconds_since(start));
  return res;
}

SweepResult run_sweep(const CaseSpec& base, const std::vector<double>& values) {
  const auto start = std::chrono::steady_clock::now();
  SweepResult out;
  for (double kh : values) {
    for (double kv : values) {
      CaseSpec spec = base;
      spec.id = "1.1";
      spec.overrides["k_h"] = kh;
      spec.overrides["k_v"] = kv;
      const auto prm = resolve_parameters(spec);
      const int n = spec.resolution > 0 ? spec.resolution : default_resolution("1.1");
      const Problem problem = build_case_problem("1.1", prm, n, spec.disc.value_or(DiscChoice::Tpfa));
      const FlowSolution full = solve_flow(problem, EliminationMode::None, spec.threads);
      const FlowSolution schur = solve_flow(problem, EliminationMode::Schur, spec.threads);
      const FlowSolution sd = solve_flow(problem, EliminationMode::StarDelta, spec.threads);
      const Vector volumes = dof_volumes(problem.mesh);
      const int dofs = problem.mesh.num_dofs();
      SweepPoint pt;
      pt.k_h = kh;
      pt.k_v = kv;
      pt.error_schur = l2_error(embed(schur.kept, schur.kept_pressure, dofs), full.pressure, volumes, schur.kept).value;
      pt.error_star_delta = l2_error(embed(sd.kept, sd.kept_pressure, dofs), full.pressure, volumes, sd.kept).value;
      pt.condition_full = condition(full.system.a);
      pt.rc_schur = pt.condition_full / condition(schur.reduced->a_r);
      pt.rc_star_delta = pt.condition_full / condition(sd.reduced->a_r);
      out.points.push_back(pt);
    }
  }
  out.seconds = seconds_since(start);
  return out;
}

}  // namespace fracfv
