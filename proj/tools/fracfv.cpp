#include "fracfv/error.hpp"
#include "fracfv/harness.hpp"
#include "fracfv/mesh_io.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>

using namespace fracfv;

namespace {

void print_report(const CaseResult& r) {
  std::cout << "case " << r.spec.id << "  resolution " << r.resolution << "  disc " << to_string(r.disc) << "  elim "
            << to_string(r.spec.elimination) << "  norm " << r.report.norm_version << '\n';
  std::cout << std::setprecision(6) << std::scientific;
  for (const auto& e : r.report.errors) {
    std::cout << "  error  " << std::left << std::setw(40) << e.name << e.value << (e.absolute ? "  (absolute)" : "") << '\n';
  }
  for (const auto& [k, v] : r.report.metrics) std::cout << "  metric " << std::setw(40) << k << v << '\n';
  for (const auto& [k, v] : r.report.timings) std::cout << "  time   " << std::setw(40) << k << v << " s\n";
  for (const auto& n : r.report.notes) std::cout << "  note   " << n << '\n';
}

void print_sweep(const SweepResult& s) {
  std::cout << std::setprecision(3) << std::scientific;
  std::cout << "     k_h        k_v   err_schur  err_stardelta   R_C schur  R_C stardelta\n";
  for (const auto& p : s.points) {
    std::cout << std::setw(10) << p.k_h << ' ' << std::setw(10) << p.k_v << ' ' << std::setw(11) << p.error_schur << ' '
              << std::setw(14) << p.error_star_delta << ' ' << std::setw(11) << p.rc_schur << ' ' << std::setw(14)
              << p.rc_star_delta << '\n';
  }
  std::cout << std::defaultfloat << "sweep time " << s.seconds << " s\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-dimensional finite-volume flow and tracer transport in fractured porous media"};
  app.require_subcommand(1);

  std::string case_id;
  int resolution = 0;
  std::string disc;
  std::string elim = "none";
  std::string out_dir;
  std::vector<std::string> overrides;
  int threads = 1;
  bool vtk = false;
  bool no_condition = false;

  auto* run = app.add_subcommand("run", "Run one test case");
  run->add_option("case", case_id, "Case id: 1.1, 1.2-lite, 1.3, 2, 3 or 4")->required();
  run->add_option("--resolution", resolution, "Cells per axis (case default when omitted)");
  run->add_option("--disc", disc, "Flux discretization: tpfa, mpfa or hybrid");
  run->add_option("--elim", elim, "Intersection elimination: none, schur or star_delta");
  run->add_option("--out", out_dir, "Directory for report, fields and series");
  run->add_option("--override", overrides, "Case parameter override key=value (repeatable)");
  run->add_option("--threads", threads, "Worker threads for local discretization problems");
  run->add_flag("--vtk", vtk, "Also write legacy VTK files");
  run->add_flag("--no-condition", no_condition, "Skip condition number computation");

  int sweep_resolution = 0;
  std::string sweep_out;
  int sweep_threads = 1;
  auto* sweep = app.add_subcommand("sweep", "Permeability sweep of case 1.1 over k_h, k_v in {1e-3, 1, 1e3}");
  sweep->add_option("--resolution", sweep_resolution, "Cells per axis");
  sweep->add_option("--out", sweep_out, "Directory for sweep.json and sweep.csv");
  sweep->add_option("--threads", sweep_threads, "Worker threads");

  std::string mesh_file;
  auto* check = app.add_subcommand("validate-mesh", "Read and validate a conforming mesh file");
  check->add_option("file", mesh_file, "Mesh file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ErrorCategory::Usage);
  }

  try {
    if (run->parsed()) {
      CaseSpec spec;
      spec.id = case_id;
      spec.resolution = resolution;
      if (!disc.empty()) spec.disc = parse_disc_choice(disc);
      spec.elimination = parse_elimination_mode(elim);
      for (const auto& o : overrides) spec.overrides.insert(parse_override(o));
      spec.threads = threads;
      spec.condition_numbers = !no_condition;
      const CaseResult result = run_case(spec);
      print_report(result);
      if (!out_dir.empty()) write_artifacts(result, out_dir, vtk);
    } else if (sweep->parsed()) {
      CaseSpec spec;
      spec.id = "1.1";
      spec.resolution = sweep_resolution;
      spec.threads = sweep_threads;
      const SweepResult result = run_sweep(spec);
      print_sweep(result);
      if (!sweep_out.empty()) write_sweep(result, spec, sweep_out);
    } else if (check->parsed()) {
      const MixedDimensionalMesh mesh = import_conforming_mesh(mesh_file);
      std::cout << "valid mesh: ambient dimension " << mesh.ambient_dim << ", " << mesh.num_dofs() << " cells\n";
      for (const auto& g : mesh.subdomains) {
        std::cout << "  " << g.name << "  dim " << g.dim << "  cells " << g.num_cells() << "  faces " << g.num_faces() << '\n';
      }
      std::cout << "  interfaces " << mesh.interfaces.size() << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "fracfv: " << e.what() << '\n';
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "fracfv: internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
