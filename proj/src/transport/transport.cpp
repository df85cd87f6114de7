#include "fracfv/transport.hpp"

#include "fracfv/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fracfv {

double FlowField::flow_imbalance() const {
  Vector net = Vector::Zero(size());
  Vector through = Vector::Zero(size());
  for (const auto& c : connections) {
    net[c.from] += c.flux;
    net[c.to] -= c.flux;
    through[c.from] += std::abs(c.flux);
    through[c.to] += std::abs(c.flux);
  }
  for (const auto& b : boundary) {
    net[b.cell] += b.flux;
    through[b.cell] += std::abs(b.flux);
  }
  for (const auto& s : sources) {
    net[s.cell] -= s.rate;
    through[s.cell] += std::abs(s.rate);
  }
  const double scale = through.size() ? through.maxCoeff() : 0.0;
  if (scale == 0.0) return 0.0;
  return net.cwiseAbs().maxCoeff() / scale;
}

void close_imbalance(FlowField& flow, double fill_concentration, double tolerance) {
  const int n = flow.size();
  Vector net = Vector::Zero(n);
  Vector through = Vector::Zero(n);
  for (const auto& c : flow.connections) {
    net[c.from] += c.flux;
    net[c.to] -= c.flux;
    through[c.from] += std::abs(c.flux);
    through[c.to] += std::abs(c.flux);
  }
  for (const auto& b : flow.boundary) {
    net[b.cell] += b.flux;
    through[b.cell] += std::abs(b.flux);
  }
  for (const auto& s : flow.sources) {
    net[s.cell] -= s.rate;
    through[s.cell] += std::abs(s.rate);
  }
  const double scale = n ? through.maxCoeff() : 0.0;
  for (int i = 0; i < n; ++i) {
    if (net[i] == 0.0) continue;
    if (std::abs(net[i]) > tolerance * scale) {
      std::ostringstream os;
      os << "flow field is not conservative in cell " << i << " (imbalance " << net[i] << ")";
      throw AssemblyError(os.str());
    }
    flow.sources.push_back({i, net[i], fill_concentration});
  }
}

UpwindOperator upwind_operator(const FlowField& flow) {
  const int n = flow.size();
  std::vector<Triplet> entries;
  UpwindOperator op;
  op.rhs = Vector::Zero(n);
  for (const auto& c : flow.connections) {
    if (c.flux > 0.0) {
      entries.emplace_back(c.from, c.from, c.flux);
      entries.emplace_back(c.to, c.from, -c.flux);
    } else if (c.flux < 0.0) {
      entries.emplace_back(c.to, c.to, -c.flux);
      entries.emplace_back(c.from, c.to, c.flux);
    }
  }
  for (const auto& b : flow.boundary) {
    switch (b.kind) {
      case TracerBcKind::TotalFlux:
        op.rhs[b.cell] -= b.value;
        break;
      case TracerBcKind::Concentration:
        if (b.flux > 0.0) {
          entries.emplace_back(b.cell, b.cell, b.flux);
        } else if (b.flux < 0.0) {
          op.rhs[b.cell] -= b.flux * b.value;
        }
        break;
      case TracerBcKind::None:
        if (b.flux > 0.0) {
          entries.emplace_back(b.cell, b.cell, b.flux);
        } else if (b.flux < 0.0) {
          std::ostringstream os;
          os << "inflow boundary face of cell " << b.cell << " (flux " << b.flux << ") has no tracer boundary condition";
          throw AssemblyError(os.str());
        }
        break;
    }
  }
  for (const auto& s : flow.sources) {
    if (s.rate > 0.0) {
      op.rhs[s.cell] += s.rate * s.concentration;
    } else if (s.rate < 0.0) {
      entries.emplace_back(s.cell, s.cell, -s.rate);
    }
  }
  op.u = assemble(n, n, entries);
  return op;
}

namespace {

SparseMatrix step_matrix(const UpwindOperator& op, const Vector& volumes, double dt) {
  if (!(dt > 0.0)) throw UsageError("time step must be positive");
  SparseMatrix m = op.u;
  const int n = static_cast<int>(volumes.size());
  std::vector<Triplet> diag;
  for (int i = 0; i < n; ++i) diag.emplace_back(i, i, volumes[i] / dt);
  m += assemble(n, n, diag);
  m.makeCompressed();
  return m;
}

}  // namespace

TransportState step_implicit_euler(const TransportState& state, const UpwindOperator& op, const Vector& volumes, double dt) {
  const SparseMatrix m = step_matrix(op, volumes, dt);
  TransportState next;
  const Vector rhs = volumes.cwiseProduct(state.concentration) / dt + op.rhs;
  try {
    next.concentration = direct_solve(m, rhs);
  } catch (const SolverError& e) {
    throw SolverError(std::string("transport step matrix is singular: ") + e.what());
  }
  next.time = state.time + dt;
  next.step = state.step + 1;
  return next;
}

TransportSolver::TransportSolver(FlowField flow, double dt) : flow_(std::move(flow)), op_(upwind_operator(flow_)), dt_(dt) {
  try {
    step_matrix_ = std::make_unique<SparseFactorization>(step_matrix(op_, flow_.volumes, dt_));
  } catch (const SolverError& e) {
    throw SolverError(std::string("transport step matrix is singular: ") + e.what());
  }
}

TransportState TransportSolver::step(const TransportState& state) const {
  TransportState next;
  const Vector rhs = flow_.volumes.cwiseProduct(state.concentration) / dt_ + op_.rhs;
  next.concentration = step_matrix_->solve(rhs);
  next.time = state.time + dt_;
  next.step = state.step + 1;
  return next;
}

double TransportSolver::mass_balance_error(const Vector& before, const Vector& after) const {
  const double storage = flow_.volumes.dot(after - before) / dt_;
  double inflow = op_.rhs.sum();
  double outflow = 0.0;
  for (const auto& b : flow_.boundary) {
    if (b.kind != TracerBcKind::TotalFlux && b.flux > 0.0) outflow += b.flux * after[b.cell];
  }
  for (const auto& s : flow_.sources) {
    if (s.rate < 0.0) outflow -= s.rate * after[s.cell];
  }
  const double scale = std::max({std::abs(storage), std::abs(inflow), std::abs(outflow)});
  const double err = std::abs(storage - (inflow - outflow));
  return scale > 0.0 ? err / scale : err;
}

int resolve_probe(const std::vector<Vec3>& centres, const std::vector<int>& candidates, const Vec3& point) {
  if (candidates.empty()) throw UsageError("probe has no candidate cells");
  double best = std::numeric_limits<double>::infinity();
  for (int c : candidates) best = std::min(best, (centres[c] - point).norm());
  const double tol = 1e-12 * std::max(1.0, best);
  std::vector<int> tied;
  for (int c : candidates) {
    if ((centres[c] - point).norm() <= best + tol) tied.push_back(c);
  }
  if (tied.size() > 1) {
    std::ostringstream os;
    os << "ambiguous probe at (" << point.transpose() << "): cells";
    for (int c : tied) os << ' ' << c;
    os << " are equally near";
    throw UsageError(os.str());
  }
  return tied.front();
}

void TimeSeries::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "time,concentration\n" << std::setprecision(17);
  for (std::size_t i = 0; i < time.size(); ++i) out << time[i] << ',' << value[i] << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

TransportRun run_transport(const FlowField& flow, const Vector& initial, double dt, int steps, int probe_cell) {
  if (initial.size() != flow.size()) throw UsageError("initial concentration does not match the flow field");
  if (steps < 0) throw UsageError("number of steps must be non-negative");
  const TransportSolver solver(flow, dt);
  TransportRun run;
  double hi = initial.size() ? initial.maxCoeff() : 0.0;
  double lo = initial.size() ? initial.minCoeff() : 0.0;
  for (const auto& b : flow.boundary) {
    if (b.kind == TracerBcKind::Concentration && b.flux < 0.0) {
      hi = std::max(hi, b.value);
      lo = std::min(lo, b.value);
    }
  }
  for (const auto& s : flow.sources) {
    if (s.rate > 0.0) {
      hi = std::max(hi, s.concentration);
      lo = std::min(lo, s.concentration);
    }
  }
  run.lower_bound = lo;
  run.upper_bound = hi;
  TransportState state{initial, 0.0, 0};
  run.min_value = lo;
  run.max_value = hi;
  if (initial.size()) {
    run.min_value = initial.minCoeff();
    run.max_value = initial.maxCoeff();
  }
  if (probe_cell >= 0) run.series.append(0.0, initial[probe_cell]);
  for (int k = 0; k < steps; ++k) {
    TransportState next = solver.step(state);
    run.max_mass_balance_error = std::max(run.max_mass_balance_error, solver.mass_balance_error(state.concentration, next.concentration));
    if (next.concentration.size()) {
      run.min_value = std::min(run.min_value, next.concentration.minCoeff());
      run.max_value = std::max(run.max_value, next.concentration.maxCoeff());
    }
    if (probe_cell >= 0) run.series.append(next.time, next.concentration[probe_cell]);
    state = std::move(next);
  }
  run.maximum_principle = run.min_value >= lo - 1e-12 && run.max_value <= hi + 1e-12;
  run.final_state = std::move(state);
  return run;
}

}  // namespace fracfv
