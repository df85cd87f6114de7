#include "fracfv/error.hpp"
#include "fracfv/harness.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace fracfv {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

TracerBcKind tracer_kind(double value) { return std::isnan(value) ? TracerBcKind::None : TracerBcKind::Concentration; }

/// Boundary faces of subdomain s as tracer boundary flows, with `to_cell`
/// mapping local cells to flow-field indices.
template <class CellIndex>
void append_boundary_flows(const Problem& problem, const GlobalSystem& system, int s, const Vector& face_flux,
                           CellIndex to_cell, FlowField& flow) {
  const auto& g = problem.mesh.subdomains[s];
  const auto& disc = system.discretizations[s];
  for (int f = 0; f < g.num_faces(); ++f) {
    const FaceKind kind = g.face_kinds[f];
    if (kind != FaceKind::DomainBoundary && kind != FaceKind::Tip) continue;
    const double flux = disc.dirichlet[f] ? face_flux[f] : disc.boundary_data[f];
    if (flux == 0.0) continue;
    const double value = problem.tracer_bc[s][f];
    flow.boundary.push_back({to_cell(g.face_cells[f][0]), flux, tracer_kind(value), std::isnan(value) ? 0.0 : value});
  }
}

}  // namespace

Problem make_problem(MixedDimensionalMesh mesh, std::vector<PermeabilityField> permeability, FluxMethod method) {
  if (permeability.size() != mesh.subdomains.size()) throw AssemblyError("permeability given for a different number of subdomains");
  Problem p;
  p.mesh = std::move(mesh);
  p.permeability = std::move(permeability);
  for (const auto& g : p.mesh.subdomains) {
    p.flow_bc.emplace_back(g);
    p.tracer_bc.emplace_back(g.num_faces(), std::numeric_limits<double>::quiet_NaN());
  }
  p.sources = Vector::Zero(p.mesh.num_dofs());
  p.source_concentration = Vector::Zero(p.mesh.num_dofs());
  p.methods.assign(p.mesh.subdomains.size(), method);
  return p;
}

void set_boundary(Problem& problem, const std::function<bool(const Vec3&)>& select,
                  const std::function<BoundaryCondition(const Vec3&)>& bc) {
  for (auto& set : problem.flow_bc) set.assign(select, bc);
}

void set_tracer_boundary(Problem& problem, const std::function<bool(const Vec3&)>& select, double concentration) {
  for (std::size_t s = 0; s < problem.mesh.subdomains.size(); ++s) {
    const auto& g = problem.mesh.subdomains[s];
    for (int f = 0; f < g.num_faces(); ++f) {
      const FaceKind kind = g.face_kinds[f];
      if ((kind == FaceKind::DomainBoundary || kind == FaceKind::Tip) && select(g.face_centres[f])) {
        problem.tracer_bc[s][f] = concentration;
      }
    }
  }
}

GlobalSystem assemble_problem(const Problem& problem, int threads, FlowTimings* timings) {
  const auto& mesh = problem.mesh;
  if (problem.methods.size() != mesh.subdomains.size() || problem.flow_bc.size() != mesh.subdomains.size()) {
    throw AssemblyError("problem data does not match the mesh");
  }
  auto start = std::chrono::steady_clock::now();
  std::vector<SubdomainDiscretization> discs;
  discs.reserve(mesh.subdomains.size());
  for (std::size_t s = 0; s < mesh.subdomains.size(); ++s) {
    discs.push_back(discretize(mesh.subdomains[s], problem.permeability[s], problem.flow_bc[s], problem.methods[s], problem.eta, threads));
  }
  if (timings) timings->discretize = seconds_since(start);
  start = std::chrono::steady_clock::now();
  GlobalSystem sys = assemble_global(mesh, std::move(discs), problem.permeability, problem.sources, problem.coupling);
  if (timings) timings->assemble = seconds_since(start);
  return sys;
}

FlowSolution solve_flow(const Problem& problem, EliminationMode mode, int threads) {
  FlowSolution sol;
  sol.mode = mode;
  sol.system = assemble_problem(problem, threads, &sol.timings);
  const int n = sol.system.num_dofs();
  if (mode == EliminationMode::None) {
    const auto start = std::chrono::steady_clock::now();
    sol.pressure = direct_solve(sol.system.a, sol.system.b, &sol.solve);
    sol.timings.solve = seconds_since(start);
    sol.kept_pressure = sol.pressure;
    sol.kept.resize(n);
    for (int i = 0; i < n; ++i) sol.kept[i] = i;
    return sol;
  }
  const std::vector<int> eliminated = default_eliminated_set(sol.system);
  auto start = std::chrono::steady_clock::now();
  sol.reduced = mode == EliminationMode::Schur ? schur_reduce(sol.system, eliminated) : star_delta_reduce(sol.system, eliminated);
  sol.timings.eliminate = seconds_since(start);
  start = std::chrono::steady_clock::now();
  sol.kept_pressure = solve_reduced(*sol.reduced, &sol.solve);
  sol.timings.solve = seconds_since(start);
  sol.pressure = back_substitute(*sol.reduced, sol.kept_pressure);
  sol.kept = sol.reduced->kept;
  return sol;
}

double flow_balance_error(const GlobalSystem& system, const Vector& pressure) {
  const Vector lambda = interface_fluxes(system, pressure);
  const std::vector<Vector> u = subdomain_face_fluxes(system, pressure, lambda);
  Vector balance = -system.sources;
  for (std::size_t s = 0; s < system.discretizations.size(); ++s) {
    balance.segment(system.offsets[s], system.offsets[s + 1] - system.offsets[s]) += system.discretizations[s].div * u[s];
  }
  for (std::size_t k = 0; k < system.pairs.size(); ++k) balance[system.pairs[k].lower_dof] -= lambda[static_cast<int>(k)];
  const double scale = system.b.norm();
  const double worst = balance.size() ? balance.cwiseAbs().maxCoeff() : 0.0;
  return scale > 0.0 ? worst / scale : worst;
}

FlowField full_flow_field(const Problem& problem, const GlobalSystem& system, const Vector& pressure) {
  if (!pressure.allFinite()) throw AssemblyError("pressure field has undefined values; fluxes cannot be reconstructed");
  const Vector lambda = interface_fluxes(system, pressure);
  const std::vector<Vector> u = subdomain_face_fluxes(system, pressure, lambda);
  FlowField flow;
  flow.volumes = dof_volumes(problem.mesh);
  for (std::size_t si = 0; si < problem.mesh.subdomains.size(); ++si) {
    const int s = static_cast<int>(si);
    const auto& g = problem.mesh.subdomains[s];
    for (int f = 0; f < g.num_faces(); ++f) {
      if (g.face_kinds[f] != FaceKind::Interior) continue;
      flow.connections.push_back({problem.mesh.dof(s, g.face_cells[f][0]), problem.mesh.dof(s, g.face_cells[f][1]), u[s][f]});
    }
    append_boundary_flows(problem, system, s, u[s], [&](int c) { return problem.mesh.dof(s, c); }, flow);
  }
  for (std::size_t k = 0; k < system.pairs.size(); ++k) {
    flow.connections.push_back({system.pairs[k].higher_dof, system.pairs[k].lower_dof, lambda[static_cast<int>(k)]});
  }
  for (int i = 0; i < problem.sources.size(); ++i) {
    if (problem.sources[i] != 0.0) flow.sources.push_back({i, problem.sources[i], problem.source_concentration[i]});
  }
  return flow;
}

FlowField reduced_flow_field(const Problem& problem, const FlowSolution& solution) {
  if (!solution.reduced) return full_flow_field(problem, solution.system, solution.pressure);
  const ReducedSystem& r = *solution.reduced;
  const GlobalSystem& sys = solution.system;
  const ReducedFlows rf = reduced_fluxes(r, solution.kept_pressure);

  Vector p = Vector::Zero(sys.num_dofs());
  for (std::size_t i = 0; i < r.kept.size(); ++i) p[r.kept[i]] = solution.kept_pressure[static_cast<int>(i)];
  Vector lambda = Vector::Zero(static_cast<int>(sys.pairs.size()));
  std::vector<bool> kept_pair(sys.pairs.size(), false);
  for (std::size_t k = 0; k < sys.pairs.size(); ++k) {
    const auto& pr = sys.pairs[k];
    if (r.kept_index[pr.higher_dof] >= 0 && r.kept_index[pr.lower_dof] >= 0) {
      lambda[static_cast<int>(k)] = pr.trans.t * (p[pr.higher_dof] - p[pr.lower_dof]);
      kept_pair[k] = true;
    }
  }
  for (std::size_t b = 0; b < r.branches.size(); ++b) lambda[r.branches[b].pair] = rf.branch_flux[static_cast<int>(b)];
  const std::vector<Vector> u = subdomain_face_fluxes(sys, p, lambda);

  FlowField flow;
  const Vector volumes = dof_volumes(problem.mesh);
  flow.volumes.resize(static_cast<int>(r.kept.size()));
  for (std::size_t i = 0; i < r.kept.size(); ++i) flow.volumes[static_cast<int>(i)] = volumes[r.kept[i]];
  auto kept_of = [&](int dof) {
    const int i = r.kept_index[dof];
    if (i < 0) throw AssemblyError("reduced flow references eliminated dof " + std::to_string(dof));
    return i;
  };
  for (std::size_t si = 0; si < problem.mesh.subdomains.size(); ++si) {
    const int s = static_cast<int>(si);
    const auto& g = problem.mesh.subdomains[s];
    if (g.num_cells() == 0 || r.kept_index[problem.mesh.dof(s, 0)] < 0) continue;
    for (int f = 0; f < g.num_faces(); ++f) {
      if (g.face_kinds[f] != FaceKind::Interior) continue;
      flow.connections.push_back({kept_of(problem.mesh.dof(s, g.face_cells[f][0])), kept_of(problem.mesh.dof(s, g.face_cells[f][1])), u[s][f]});
    }
    append_boundary_flows(problem, sys, s, u[s], [&](int c) { return kept_of(problem.mesh.dof(s, c)); }, flow);
  }
  for (std::size_t k = 0; k < sys.pairs.size(); ++k) {
    if (kept_pair[k]) flow.connections.push_back({kept_of(sys.pairs[k].higher_dof), kept_of(sys.pairs[k].lower_dof), lambda[static_cast<int>(k)]});
  }
  for (const auto& pf : rf.pairwise) flow.connections.push_back({kept_of(pf.from_dof), kept_of(pf.to_dof), pf.flux});

  double injected = 0.0;
  double injected_tracer = 0.0;
  for (int dof : r.eliminated) {
    if (problem.sources[dof] > 0.0) {
      injected += problem.sources[dof];
      injected_tracer += problem.sources[dof] * problem.source_concentration[dof];
    }
  }
  const double external_concentration = injected > 0.0 ? injected_tracer / injected : 0.0;
  for (int dof : r.kept) {
    if (problem.sources[dof] != 0.0) flow.sources.push_back({kept_of(dof), problem.sources[dof], problem.source_concentration[dof]});
  }
  for (const auto& ex : rf.external) flow.sources.push_back({kept_of(ex.dof), -ex.outflow, external_concentration});
  return flow;
}

}  // namespace fracfv
