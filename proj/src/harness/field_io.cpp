#include "fracfv/error.hpp"
#include "fracfv/harness.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fracfv {

Vector dof_volumes(const MixedDimensionalMesh& mesh) {
  Vector v(mesh.num_dofs());
  for (std::size_t s = 0; s < mesh.subdomains.size(); ++s) {
    const auto& g = mesh.subdomains[s];
    for (int c = 0; c < g.num_cells(); ++c) v[mesh.dof(static_cast<int>(s), c)] = g.cell_volumes[c];
  }
  return v;
}

std::vector<Vec3> dof_centres(const MixedDimensionalMesh& mesh) {
  std::vector<Vec3> out;
  out.reserve(mesh.num_dofs());
  for (const auto& g : mesh.subdomains) out.insert(out.end(), g.cell_centres.begin(), g.cell_centres.end());
  return out;
}

std::vector<int> dof_dims(const MixedDimensionalMesh& mesh) {
  std::vector<int> out;
  out.reserve(mesh.num_dofs());
  for (const auto& g : mesh.subdomains) out.insert(out.end(), g.num_cells(), g.dim);
  return out;
}

void export_field_csv(const MixedDimensionalMesh& mesh, const Vector& field, const std::string& path) {
  if (field.size() != mesh.num_dofs()) throw UsageError("export_field_csv: field does not match the mesh");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "x,y,z,dim,value\n" << std::setprecision(17);
  int i = 0;
  for (const auto& g : mesh.subdomains) {
    for (int c = 0; c < g.num_cells(); ++c, ++i) {
      const Vec3& x = g.cell_centres[c];
      out << x[0] << ',' << x[1] << ',' << x[2] << ',' << g.dim << ',' << field[i] << '\n';
    }
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

CsvField read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "x,y,z,dim,value") throw FormatError("'" + path + "' lacks the field CSV header");
  CsvField out;
  std::vector<double> values;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell[5];
    for (auto& c : cell) {
      if (!std::getline(row, c, ',')) throw FormatError(path + ":" + std::to_string(lineno) + ": expected five columns");
    }
    try {
      out.centres.emplace_back(std::stod(cell[0]), std::stod(cell[1]), std::stod(cell[2]));
      out.dims.push_back(std::stoi(cell[3]));
      values.push_back(std::stod(cell[4]));
    } catch (const std::exception&) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  out.values = Eigen::Map<Vector>(values.data(), static_cast<int>(values.size()));
  return out;
}

namespace {

int vtk_cell_type(const SubdomainGrid& g, int c) {
  const auto n = g.cell_nodes[c].size();
  if (g.dim == 2) return n == 3 ? 5 : 8;  // triangle, pixel
  return n == 4 ? 10 : 11;               // tetra, voxel
}

std::vector<int> vtk_node_order(const SubdomainGrid& g, int c) {
  std::vector<int> nodes = g.cell_nodes[c];
  if (static_cast<int>(nodes.size()) == g.dim + 1) return nodes;
  std::sort(nodes.begin(), nodes.end(), [&](int a, int b) {
    const Vec3& p = g.nodes[a];
    const Vec3& q = g.nodes[b];
    if (p[2] != q[2]) return p[2] < q[2];
    if (p[1] != q[1]) return p[1] < q[1];
    return p[0] < q[0];
  });
  return nodes;
}

}  // namespace

void export_field_vtk(const MixedDimensionalMesh& mesh, const Vector& field, const std::string& name, const std::string& path) {
  if (field.size() != mesh.num_dofs()) throw UsageError("export_field_vtk: field does not match the mesh");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  std::vector<int> subs;
  int points = 0;
  int cells = 0;
  int conn = 0;
  for (std::size_t s = 0; s < mesh.subdomains.size(); ++s) {
    const auto& g = mesh.subdomains[s];
    if (g.dim < 2) continue;
    subs.push_back(static_cast<int>(s));
    points += g.num_nodes();
    cells += g.num_cells();
    for (const auto& cn : g.cell_nodes) conn += 1 + static_cast<int>(cn.size());
  }
  out << "# vtk DataFile Version 3.0\n" << name << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << std::setprecision(17);
  out << "POINTS " << points << " double\n";
  for (int s : subs) {
    for (const auto& x : mesh.subdomains[s].nodes) out << x[0] << ' ' << x[1] << ' ' << x[2] << '\n';
  }
  out << "CELLS " << cells << ' ' << conn << '\n';
  int base = 0;
  for (int s : subs) {
    const auto& g = mesh.subdomains[s];
    for (int c = 0; c < g.num_cells(); ++c) {
      const auto nodes = vtk_node_order(g, c);
      out << nodes.size();
      for (int n : nodes) out << ' ' << base + n;
      out << '\n';
    }
    base += g.num_nodes();
  }
  out << "CELL_TYPES " << cells << '\n';
  for (int s : subs) {
    const auto& g = mesh.subdomains[s];
    for (int c = 0; c < g.num_cells(); ++c) out << vtk_cell_type(g, c) << '\n';
  }
  out << "CELL_DATA " << cells << "\nSCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (int s : subs) {
    for (int c = 0; c < mesh.subdomains[s].num_cells(); ++c) out << field[mesh.dof(s, c)] << '\n';
  }
  out << "SCALARS dim int 1\nLOOKUP_TABLE default\n";
  for (int s : subs) {
    for (int c = 0; c < mesh.subdomains[s].num_cells(); ++c) out << mesh.subdomains[s].dim << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace fracfv
