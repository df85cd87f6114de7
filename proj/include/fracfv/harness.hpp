#pragma once

#include "fracfv/boundary.hpp"
#include "fracfv/coupling.hpp"
#include "fracfv/discretization.hpp"
#include "fracfv/elimination.hpp"
#include "fracfv/mesh.hpp"
#include "fracfv/permeability.hpp"
#include "fracfv/transport.hpp"

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fracfv {

/// Tag identifying the error norm used in every report.
inline constexpr const char* kNormVersion = "l2-volume-relative-v1";

/// `git describe` of the build.
const char* build_version();

// ---------------------------------------------------------------- L2 errors

struct L2Error {
  double value = 0.0;
  bool absolute = false;  ///< reference norm vanished; value is unnormalized
};

/// sqrt(sum V (x - r)^2) / sqrt(sum V r^2) over `subset` (all entries when empty).
L2Error l2_error(const Vector& field, const Vector& reference, const Vector& weights, const std::vector<int>& subset = {});

/// For every fine point, the index of the nearest coarse point (lowest index on
/// ties). For nested tensor grids this is the coarse cell containing the fine
/// centre.
std::vector<int> injection_map(const std::vector<Vec3>& coarse_centres, const std::vector<Vec3>& fine_centres);

/// Piecewise-constant injection of coarse values onto fine cells.
Vector inject(const Vector& coarse, const std::vector<int>& map);

/// Volume-weighted average of fine values over each coarse cell.
Vector restrict_average(const Vector& fine, const Vector& fine_volumes, const std::vector<int>& map, int coarse_size);

// ---------------------------------------------------------------- field output

/// Per-dof cell data of a mixed-dimensional mesh.
Vector dof_volumes(const MixedDimensionalMesh& mesh);
std::vector<Vec3> dof_centres(const MixedDimensionalMesh& mesh);
std::vector<int> dof_dims(const MixedDimensionalMesh& mesh);

/// CSV with columns x,y,z,dim,value (17 significant digits), one row per dof.
void export_field_csv(const MixedDimensionalMesh& mesh, const Vector& field, const std::string& path);

struct CsvField {
  std::vector<Vec3> centres;
  std::vector<int> dims;
  Vector values;
};
CsvField read_field_csv(const std::string& path);

/// Legacy VTK unstructured grid of the cells of all subdomains of dimension >= 2.
void export_field_vtk(const MixedDimensionalMesh& mesh, const Vector& field, const std::string& name, const std::string& path);

// ---------------------------------------------------------------- problems

/// A fully specified flow and transport problem on a mixed-dimensional mesh.
struct Problem {
  MixedDimensionalMesh mesh;
  std::vector<PermeabilityField> permeability;
  std::vector<BoundaryConditionSet> flow_bc;
  /// Per subdomain and face: tracer concentration entering through the face
  /// (NaN where none is prescribed).
  std::vector<std::vector<double>> tracer_bc;
  Vector sources;               ///< integrated injection rate per dof
  Vector source_concentration;  ///< tracer concentration of injected fluid per dof
  std::vector<FluxMethod> methods;
  std::optional<double> eta;
  CouplingOptions coupling;
};

/// Problem with default boundary data: homogeneous Neumann flow, no tracer data, no sources.
Problem make_problem(MixedDimensionalMesh mesh, std::vector<PermeabilityField> permeability, FluxMethod method);

/// Applies `bc` and the tracer value to every assignable face of every
/// subdomain whose centre satisfies `select`.
void set_boundary(Problem& problem, const std::function<bool(const Vec3&)>& select, const std::function<BoundaryCondition(const Vec3&)>& bc);
void set_tracer_boundary(Problem& problem, const std::function<bool(const Vec3&)>& select, double concentration);

struct FlowTimings {
  double discretize = 0.0;
  double assemble = 0.0;
  double eliminate = 0.0;
  double solve = 0.0;
};

struct FlowSolution {
  EliminationMode mode = EliminationMode::None;
  GlobalSystem system;
  std::optional<ReducedSystem> reduced;
  Vector pressure;       ///< full field; back-substituted when eliminated
  Vector kept_pressure;  ///< kept dofs (all dofs without elimination)
  std::vector<int> kept;
  SolveReport solve;
  FlowTimings timings;
};

GlobalSystem assemble_problem(const Problem& problem, int threads = 1, FlowTimings* timings = nullptr);

/// Solves the problem; eliminations remove all dofs of dimension <= N-2.
FlowSolution solve_flow(const Problem& problem, EliminationMode mode, int threads = 1);

/// Largest per-cell mass imbalance of the reconstructed fluxes, relative to ||b||.
double flow_balance_error(const GlobalSystem& system, const Vector& pressure);

/// Tracer flow field over all dofs from a full pressure field.
FlowField full_flow_field(const Problem& problem, const GlobalSystem& system, const Vector& pressure);

/// Tracer flow field over the kept dofs, with fluxes computed between kept
/// cells directly from the reduced system.
FlowField reduced_flow_field(const Problem& problem, const FlowSolution& solution);

// ---------------------------------------------------------------- cases

enum class DiscChoice { Tpfa, Mpfa, Hybrid };
const char* to_string(DiscChoice choice);
DiscChoice parse_disc_choice(const std::string& text);

/// Per-subdomain flux method: hybrid uses TPFA on the highest dimension and
/// MPFA below.
std::vector<FluxMethod> flux_methods(const MixedDimensionalMesh& mesh, DiscChoice choice);

struct CaseSpec {
  std::string id;
  int resolution = 0;  ///< 0 selects the case default
  std::optional<DiscChoice> disc;
  EliminationMode elimination = EliminationMode::None;
  std::map<std::string, double> overrides;
  int threads = 1;
  bool condition_numbers = true;
};

/// Case ids in presentation order.
const std::vector<std::string>& case_ids();

/// Free parameters of a case with their defaults.
const std::map<std::string, double>& case_parameters(const std::string& id);

/// Defaults merged with the overrides; throws UsageError for unknown cases or keys.
std::map<std::string, double> resolve_parameters(const CaseSpec& spec);

/// Parses "key=value" into an override.
std::pair<std::string, double> parse_override(const std::string& text);

struct ErrorEntry {
  std::string name;
  double value = 0.0;
  bool absolute = false;
};

struct ErrorReport {
  std::string norm_version = kNormVersion;
  std::vector<ErrorEntry> errors;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::pair<std::string, double>> timings;
  std::vector<std::string> notes;

  void add_error(const std::string& name, const L2Error& e) { errors.push_back({name, e.value, e.absolute}); }
  void add_metric(const std::string& name, double v) { metrics.emplace_back(name, v); }
  void add_timing(const std::string& name, double seconds) { timings.emplace_back(name, seconds); }

  /// Lookup by name; throws UsageError when missing.
  double error(const std::string& name) const;
  double metric(const std::string& name) const;
  bool has_error(const std::string& name) const;
  bool has_metric(const std::string& name) const;
};

struct NamedField {
  std::string name;
  Vector values;  ///< one value per dof of `CaseResult::mesh` (NaN where undefined)
};

struct NamedSeries {
  std::string name;
  TimeSeries series;
};

struct CaseResult {
  CaseSpec spec;
  std::map<std::string, double> parameters;
  int resolution = 0;
  DiscChoice disc = DiscChoice::Tpfa;
  ErrorReport report;
  MixedDimensionalMesh mesh;
  std::vector<NamedField> fields;
  std::vector<NamedSeries> series;
};

/// Builds the case problem for the given parameters, resolution and discretization.
Problem build_case_problem(const std::string& id, const std::map<std::string, double>& parameters, int resolution, DiscChoice disc);

int default_resolution(const std::string& id);
DiscChoice default_disc(const std::string& id);

/// Runs the full pipeline of a case; errors are measured against the
/// case-defined reference.
CaseResult run_case(const CaseSpec& spec);

struct SweepPoint {
  double k_h = 0.0;
  double k_v = 0.0;
  double error_schur = 0.0;
  double error_star_delta = 0.0;
  double condition_full = 0.0;
  double rc_schur = 0.0;
  double rc_star_delta = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  double seconds = 0.0;
};

/// Permeability sweep of the crossing-fracture case over k_h, k_v in `values`.
SweepResult run_sweep(const CaseSpec& base, const std::vector<double>& values = {1e-3, 1.0, 1e3});

// ---------------------------------------------------------------- reports

/// Writes report.json, field CSVs (and VTK when requested) and series CSVs into `dir`.
void write_artifacts(const CaseResult& result, const std::string& dir, bool vtk);
std::string report_json(const CaseResult& result);
std::string sweep_json(const SweepResult& result, const CaseSpec& base);
void write_sweep(const SweepResult& result, const CaseSpec& base, const std::string& dir);

}  // namespace fracfv
