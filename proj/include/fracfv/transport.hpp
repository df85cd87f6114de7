#pragma once

#include "fracfv/geometry.hpp"
#include "fracfv/linsolve.hpp"

#include <memory>
#include <string>
#include <vector>

namespace fracfv {

/// Volumetric flux between two cells, positive from `from` to `to`.
struct Connection {
  int from = -1;
  int to = -1;
  double flux = 0.0;
};

enum class TracerBcKind { None, Concentration, TotalFlux };

/// Flow through a boundary face of `cell`; `flux` is positive outward.
/// Concentration faces advect `value` on inflow; TotalFlux faces prescribe the
/// outward tracer flux `value`; None is valid on outflow faces only.
struct BoundaryFlow {
  int cell = -1;
  double flux = 0.0;
  TracerBcKind kind = TracerBcKind::None;
  double value = 0.0;
};

/// Volumetric source: positive rates inject at `concentration`, negative rates
/// extract at the cell concentration.
struct PointSource {
  int cell = -1;
  double rate = 0.0;
  double concentration = 0.0;
};

/// Stationary flow field seen by the tracer.
struct FlowField {
  Vector volumes;
  std::vector<Connection> connections;
  std::vector<BoundaryFlow> boundary;
  std::vector<PointSource> sources;

  int size() const { return static_cast<int>(volumes.size()); }
  /// Largest |inflow - outflow| per cell divided by the largest cell throughput.
  double flow_imbalance() const;
};

/// Absorbs floating-point flux imbalances into explicit cell sources: cells
/// receiving more than they release get a sink of the excess, cells releasing
/// more get an injection at `fill_concentration`. Throws AssemblyError when an
/// imbalance exceeds `tolerance` times the largest cell throughput.
void close_imbalance(FlowField& flow, double fill_concentration, double tolerance = 1e-10);

/// Upwind advection U and inflow vector r: the semi-discrete balance reads
/// V dT/dt + U T = r.
struct UpwindOperator {
  SparseMatrix u;
  Vector rhs;
};

UpwindOperator upwind_operator(const FlowField& flow);

struct TransportState {
  Vector concentration;
  double time = 0.0;
  int step = 0;
};

/// One implicit Euler step (factorizes the step matrix).
TransportState step_implicit_euler(const TransportState& state, const UpwindOperator& op, const Vector& volumes, double dt);

/// Implicit Euler with a step matrix factorized once.
class TransportSolver {
public:
  TransportSolver(FlowField flow, double dt);

  TransportState step(const TransportState& state) const;

  /// |sum V (T1 - T0)/dt - (inflow - outflow + sources)| relative to the
  /// largest of those terms.
  double mass_balance_error(const Vector& before, const Vector& after) const;

  const FlowField& flow() const { return flow_; }
  const UpwindOperator& op() const { return op_; }
  double dt() const { return dt_; }

private:
  FlowField flow_;
  UpwindOperator op_;
  double dt_;
  std::unique_ptr<SparseFactorization> step_matrix_;
};

/// Resolves a probe point to the unique nearest cell among `candidates`;
/// throws UsageError listing the tied cells when several are equally near.
int resolve_probe(const std::vector<Vec3>& centres, const std::vector<int>& candidates, const Vec3& point);

struct TimeSeries {
  std::vector<double> time;
  std::vector<double> value;

  void append(double t, double v) {
    time.push_back(t);
    value.push_back(v);
  }
  void write_csv(const std::string& path) const;
};

struct TransportRun {
  TransportState final_state;
  TimeSeries series;
  double max_mass_balance_error = 0.0;
  double min_value = 0.0;
  double max_value = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  bool maximum_principle = true;
};

/// Runs `steps` implicit Euler steps from `initial`, monitoring `probe_cell`
/// (no series when negative) and checking mass balance and the discrete
/// maximum principle.
TransportRun run_transport(const FlowField& flow, const Vector& initial, double dt, int steps, int probe_cell);

}  // namespace fracfv
