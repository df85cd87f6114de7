#include "fracfv/error.hpp"
#include "fracfv/harness.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

namespace fracfv {

namespace {

using nlohmann::ordered_json;

ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json spec_json(const CaseSpec& spec, const std::map<std::string, double>& parameters, int resolution, DiscChoice disc) {
  ordered_json j;
  j["case"] = spec.id;
  j["resolution"] = resolution;
  j["discretization"] = to_string(disc);
  j["elimination"] = to_string(spec.elimination);
  j["threads"] = spec.threads;
  ordered_json overrides = ordered_json::object();
  for (const auto& [k, v] : spec.overrides) overrides[k] = v;
  j["overrides"] = overrides;
  ordered_json params = ordered_json::object();
  for (const auto& [k, v] : parameters) params[k] = v;
  j["parameters"] = params;
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

}  // namespace

std::string report_json(const CaseResult& result) {
  ordered_json j;
  j["norm_version"] = result.report.norm_version;
  j["build"] = build_version();
  j["spec"] = spec_json(result.spec, result.parameters, result.resolution, result.disc);
  ordered_json errors = ordered_json::array();
  for (const auto& e : result.report.errors) {
    errors.push_back({{"name", e.name}, {"value", number(e.value)}, {"absolute", e.absolute}});
  }
  j["errors"] = errors;
  ordered_json metrics = ordered_json::object();
  for (const auto& [k, v] : result.report.metrics) metrics[k] = number(v);
  j["metrics"] = metrics;
  ordered_json timings = ordered_json::object();
  for (const auto& [k, v] : result.report.timings) timings[k] = number(v);
  j["timings"] = timings;
  j["notes"] = result.report.notes;
  ordered_json mesh;
  mesh["ambient_dim"] = result.mesh.ambient_dim;
  mesh["dofs"] = result.mesh.num_dofs();
  ordered_json subs = ordered_json::array();
  for (const auto& g : result.mesh.subdomains) subs.push_back({{"name", g.name}, {"dim", g.dim}, {"cells", g.num_cells()}});
  mesh["subdomains"] = subs;
  j["mesh"] = mesh;
  return j.dump(2);
}

void write_artifacts(const CaseResult& result, const std::string& dir, bool vtk) {
  ensure_directory(dir);
  const std::filesystem::path base(dir);
  write_text((base / "report.json").string(), report_json(result));
  for (const auto& f : result.fields) {
    export_field_csv(result.mesh, f.values, (base / (f.name + ".csv")).string());
    if (vtk) export_field_vtk(result.mesh, f.values, f.name, (base / (f.name + ".vtk")).string());
  }
  for (const auto& s : result.series) s.series.write_csv((base / ("series_" + s.name + ".csv")).string());
}

std::string sweep_json(const SweepResult& result, const CaseSpec& base) {
  ordered_json j;
  j["norm_version"] = kNormVersion;
  j["build"] = build_version();
  j["case"] = "1.1";
  j["resolution"] = base.resolution > 0 ? base.resolution : default_resolution("1.1");
  ordered_json pts = ordered_json::array();
  for (const auto& p : result.points) {
    pts.push_back({{"k_h", p.k_h},
                   {"k_v", p.k_v},
                   {"error_schur", number(p.error_schur)},
                   {"error_star_delta", number(p.error_star_delta)},
                   {"condition_full", number(p.condition_full)},
                   {"rc_schur", number(p.rc_schur)},
                   {"rc_star_delta", number(p.rc_star_delta)}});
  }
  j["points"] = pts;
  j["seconds"] = result.seconds;
  return j.dump(2);
}

void write_sweep(const SweepResult& result, const CaseSpec& base, const std::string& dir) {
  ensure_directory(dir);
  const std::filesystem::path p(dir);
  write_text((p / "sweep.json").string(), sweep_json(result, base));
  std::ofstream csv((p / "sweep.csv").string());
  if (!csv) throw IoError("cannot open '" + (p / "sweep.csv").string() + "' for writing");
  csv << "k_h,k_v,error_schur,error_star_delta,condition_full,rc_schur,rc_star_delta\n";
  csv.precision(17);
  for (const auto& pt : result.points) {
    csv << pt.k_h << ',' << pt.k_v << ',' << pt.error_schur << ',' << pt.error_star_delta << ',' << pt.condition_full << ','
        << pt.rc_schur << ',' << pt.rc_star_delta << '\n';
  }
}

}  // namespace fracfv
