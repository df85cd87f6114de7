#include "fracfv/error.hpp"
#include "fracfv/transport.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace fracfv {
namespace {

TEST(Upwind, FluxSignSelectsUpstreamCell) {
  FlowField flow;
  flow.volumes = Vector::Ones(3);
  flow.connections = {{0, 1, 2.0}, {1, 2, -3.0}};
  const auto op = upwind_operator(flow);
  EXPECT_DOUBLE_EQ(op.u.coeff(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(op.u.coeff(1, 0), -2.0);
  EXPECT_DOUBLE_EQ(op.u.coeff(2, 2), 3.0);
  EXPECT_DOUBLE_EQ(op.u.coeff(1, 2), -3.0);
  EXPECT_DOUBLE_EQ(op.u.coeff(1, 1), 0.0);
}

TEST(Upwind, ZeroFluxAdvectsNothing) {
  FlowField flow;
  flow.volumes = Vector::Ones(2);
  flow.connections = {{0, 1, 0.0}};
  const auto op = upwind_operator(flow);
  EXPECT_EQ(op.u.norm(), 0.0);
  EXPECT_EQ(op.rhs.norm(), 0.0);
}

FlowField one_cell() {
  FlowField flow;
  flow.volumes = Vector::Ones(1);
  flow.boundary = {{0, -1.0, TracerBcKind::Concentration, 0.0}, {0, 1.0, TracerBcKind::None, 0.0}};
  return flow;
}

TEST(ImplicitEuler, OneCellHandComputation) {
  const FlowField flow = one_cell();
  const TransportState s0{Vector::Ones(1), 0.0, 0};
  const auto s1 = step_implicit_euler(s0, upwind_operator(flow), flow.volumes, 1.0);
  EXPECT_DOUBLE_EQ(s1.concentration[0], 0.5);
  EXPECT_DOUBLE_EQ(s1.time, 1.0);
  EXPECT_EQ(s1.step, 1);
}

TEST(ImplicitEuler, NoFlowKeepsState) {
  FlowField flow;
  flow.volumes = Vector::Constant(3, 0.5);
  const TransportSolver solver(flow, 0.1);
  const TransportState s0{Vector{{0.1, 0.7, 0.3}}, 0.0, 0};
  EXPECT_EQ(solver.step(s0).concentration, s0.concentration);
}

FlowField chain_with_source() {
  // Inflow at cell 0 with concentration 1, well at cell 2, outflow at cell 3.
  FlowField flow;
  flow.volumes = Vector{{1.0, 0.5, 2.0, 1.0}};
  flow.boundary = {{0, -1.0, TracerBcKind::Concentration, 1.0}, {3, 1.5, TracerBcKind::None, 0.0}};
  flow.connections = {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.5}};
  flow.sources = {{2, 0.5, 0.25}};
  return flow;
}

TEST(Transport, MassBalanceAndMaximumPrinciple) {
  const FlowField flow = chain_with_source();
  EXPECT_LE(flow.flow_imbalance(), 1e-15);
  const auto run = run_transport(flow, Vector::Zero(4), 0.7, 40, 3);
  EXPECT_LE(run.max_mass_balance_error, 1e-10);
  EXPECT_TRUE(run.maximum_principle);
  EXPECT_GE(run.min_value, -1e-12);
  EXPECT_LE(run.max_value, 1.0 + 1e-12);
  ASSERT_EQ(run.series.value.size(), 41u);
  // Steady state: cell 2 mixes one unit at 1 with half a unit at 0.25.
  EXPECT_NEAR(run.final_state.concentration[2], 1.125 / 1.5, 1e-6);
}

TEST(Transport, ConstantStateGivesFlatSeries) {
  FlowField flow = chain_with_source();
  flow.boundary[0].value = 0.25;
  const auto run = run_transport(flow, Vector::Constant(4, 0.25), 0.5, 10, 2);
  for (double v : run.series.value) EXPECT_NEAR(v, 0.25, 1e-14);
}

TEST(Transport, CloseImbalanceAbsorbsRoundOff) {
  FlowField flow = chain_with_source();
  flow.connections[1].flux += 1e-13;
  EXPECT_GT(flow.flow_imbalance(), 0.0);
  close_imbalance(flow, 0.0);
  EXPECT_LE(flow.flow_imbalance(), 1e-15);
  FlowField broken = chain_with_source();
  broken.connections[1].flux += 1e-3;
  EXPECT_THROW(close_imbalance(broken, 0.0), AssemblyError);
}

TEST(Probe, CornerIsUniqueAndTiesAreReported) {
  std::vector<Vec3> centres;
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 4; ++i) centres.emplace_back((i + 0.5) / 4, (j + 0.5) / 4, 0.0);
  }
  std::vector<int> all(16);
  for (int i = 0; i < 16; ++i) all[i] = i;
  EXPECT_EQ(resolve_probe(centres, all, Vec3(1, 1, 0)), 15);
  EXPECT_EQ(resolve_probe(centres, all, Vec3(0, 0, 0)), 0);
  try {
    resolve_probe(centres, all, Vec3(0.5, 0.5, 0));
    FAIL() << "expected an ambiguous probe";
  } catch (const UsageError& e) {
    const std::string msg = e.what();
    for (const char* c : {"5", "6", "9", "10"}) EXPECT_NE(msg.find(c), std::string::npos) << msg;
  }
}

TEST(TimeSeries, CsvOutput) {
  TimeSeries ts;
  ts.append(0.0, 1.0);
  ts.append(0.5, 0.25);
  const auto path = (std::filesystem::temp_directory_path() / "fracfv_series_test.csv").string();
  ts.write_csv(path);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "time,concentration");
  EXPECT_EQ(row.substr(0, 2), "0,");
  std::remove(path.c_str());
}

}  // namespace
}  // namespace fracfv
