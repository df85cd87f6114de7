#include "fracfv/mesh.hpp"

#include "fracfv/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace fracfv {

const char* to_string(FaceKind kind) {
  switch (kind) {
    case FaceKind::Interior: return "interior";
    case FaceKind::DomainBoundary: return "boundary";
    case FaceKind::Interface: return "interface";
    case FaceKind::Tip: return "tip";
  }
  return "?";
}

namespace {

std::vector<Vec3> gather(const SubdomainGrid& g, const std::vector<int>& ids) {
  std::vector<Vec3> pts;
  pts.reserve(ids.size());
  for (int i : ids) pts.push_back(g.nodes.at(i));
  return pts;
}

std::string where(const SubdomainGrid& g, const char* entity, int index) {
  std::ostringstream os;
  os << "subdomain '" << g.name << "' (dim " << g.dim << ") " << entity << ' ' << index;
  return os.str();
}

double entity_measure(const SubdomainGrid& g, const std::vector<Vec3>& pts, int dim, const std::string& label) {
  if (dim == 0) return 1.0;
  if (static_cast<int>(pts.size()) == dim + 1) return geometry::simplex_measure(pts);
  if (geometry::is_axis_aligned_box(pts, dim)) return geometry::box_measure(pts, dim);
  (void)g;
  throw MeshError(label + ": not a simplex or an axis-aligned box");
}

}  // namespace

void compute_geometry(SubdomainGrid& g) {
  const int nc = g.num_cells();
  const int nf = g.num_faces();
  const double weight_exp = g.ambient_dim - g.dim;
  if (static_cast<int>(g.apertures.size()) != nc) throw MeshError(where(g, "apertures", nc) + ": size mismatch");
  if (static_cast<int>(g.face_cells.size()) != nf || static_cast<int>(g.face_kinds.size()) != nf) {
    throw MeshError(where(g, "faces", nf) + ": face tables have inconsistent sizes");
  }
  if (g.cell_parents.size() != static_cast<std::size_t>(nc)) g.cell_parents.resize(nc);

  g.cell_centres.assign(nc, Vec3::Zero());
  g.cell_measures.assign(nc, 0.0);
  g.cell_volumes.assign(nc, 0.0);
  for (int c = 0; c < nc; ++c) {
    const auto pts = gather(g, g.cell_nodes[c]);
    if (pts.empty()) throw MeshError(where(g, "cell", c) + ": no nodes");
    if (g.dim == 0 && pts.size() != 1) throw MeshError(where(g, "cell", c) + ": 0D cell needs exactly one node");
    const double m = entity_measure(g, pts, g.dim, where(g, "cell", c));
    if (!(m > 0.0)) throw MeshError(where(g, "cell", c) + ": degenerate (zero measure)");
    g.cell_centres[c] = geometry::centroid(pts);
    g.cell_measures[c] = m;
    g.cell_volumes[c] = m * std::pow(g.apertures[c], weight_exp);
  }

  g.face_centres.assign(nf, Vec3::Zero());
  g.face_normals.assign(nf, Vec3::Zero());
  g.face_measures.assign(nf, 0.0);
  g.face_areas.assign(nf, 0.0);
  for (int f = 0; f < nf; ++f) {
    const auto pts = gather(g, g.face_nodes[f]);
    const int owner = g.face_cells[f][0];
    if (owner < 0 || owner >= nc) throw MeshError(where(g, "face", f) + ": invalid owner cell");
    const double m = entity_measure(g, pts, g.dim - 1, where(g, "face", f));
    if (!(m > 0.0)) throw MeshError(where(g, "face", f) + ": degenerate (zero measure)");
    g.face_centres[f] = geometry::centroid(pts);
    g.face_measures[f] = m;
    const Vec3 n = geometry::orthogonal_direction(g.face_centres[f] - g.cell_centres[owner], pts);
    if (n.isZero()) throw MeshError(where(g, "face", f) + ": face centre coincides with cell centre plane");
    g.face_normals[f] = n;
    g.face_areas[f] = m * std::pow(g.apertures[owner], weight_exp);
  }

  g.cell_faces.assign(nc, {});
  for (int f = 0; f < nf; ++f) {
    for (int side = 0; side < 2; ++side) {
      const int c = g.face_cells[f][side];
      if (c >= 0) g.cell_faces[c].emplace_back(f, side == 0 ? 1 : -1);
    }
  }
  g.node_faces.assign(g.num_nodes(), {});
  g.node_cells.assign(g.num_nodes(), {});
  for (int f = 0; f < nf; ++f) {
    for (int n : g.face_nodes[f]) g.node_faces[n].push_back(f);
  }
  for (int c = 0; c < nc; ++c) {
    for (int n : g.cell_nodes[c]) g.node_cells[n].push_back(c);
  }
}

void MixedDimensionalMesh::rebuild_dof_map() {
  offsets.assign(subdomains.size() + 1, 0);
  for (std::size_t s = 0; s < subdomains.size(); ++s) offsets[s + 1] = offsets[s] + subdomains[s].num_cells();
}

std::pair<int, int> MixedDimensionalMesh::locate(int dof) const {
  auto it = std::upper_bound(offsets.begin(), offsets.end(), dof);
  const int s = static_cast<int>(it - offsets.begin()) - 1;
  return {s, dof - offsets[s]};
}

int MixedDimensionalMesh::highest_index() const {
  int best = 0;
  for (std::size_t s = 0; s < subdomains.size(); ++s) {
    if (subdomains[s].dim > subdomains[best].dim) best = static_cast<int>(s);
  }
  return best;
}

const SubdomainGrid& MixedDimensionalMesh::highest() const { return subdomains.at(highest_index()); }

double MixedDimensionalMesh::domain_diameter() const {
  const auto& g = highest();
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::max());
  Vec3 hi = -lo;
  for (const auto& p : g.nodes) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

void validate(const SubdomainGrid& g) {
  const double weight_exp = g.ambient_dim - g.dim;
  for (int f = 0; f < g.num_faces(); ++f) {
    const auto& fc = g.face_cells[f];
    if (fc[0] < 0) throw MeshError(where(g, "face", f) + ": no adjacent cell");
    const bool two = fc[1] >= 0;
    if (two != (g.face_kinds[f] == FaceKind::Interior)) {
      throw MeshError(where(g, "face", f) + ": kind '" + to_string(g.face_kinds[f]) + "' inconsistent with adjacency");
    }
    if (std::abs(g.face_normals[f].norm() - 1.0) > 1e-12) throw MeshError(where(g, "face", f) + ": normal not unit");
    if (!(g.face_areas[f] > 0.0)) throw MeshError(where(g, "face", f) + ": non-positive area");
  }
  for (int c = 0; c < g.num_cells(); ++c) {
    if (!(g.cell_volumes[c] > 0.0)) throw MeshError(where(g, "cell", c) + ": non-positive volume");
    const double expected = std::pow(g.apertures[c], weight_exp);
    if (std::abs(g.cell_volumes[c] / g.cell_measures[c] - expected) > 1e-14 * expected) {
      throw MeshError(where(g, "cell", c) + ": volume not scaled by a^(N-d)");
    }
    if (g.dim == 0) continue;
    Vec3 closure = Vec3::Zero();
    double scale = 0.0;
    for (auto [f, sign] : g.cell_faces[c]) {
      closure += sign * g.face_measures[f] * g.face_normals[f];
      scale = std::max(scale, g.face_measures[f]);
    }
    if (closure.norm() > 1e-12 * scale) throw MeshError(where(g, "cell", c) + ": faces do not close the cell");
  }
}

void validate(const MixedDimensionalMesh& mesh) {
  if (mesh.subdomains.empty()) throw MeshError("mesh has no subdomains");
  const auto& top = mesh.highest();
  for (double a : top.apertures) {
    if (a != 1.0) throw MeshError("highest-dimensional subdomain must have aperture 1");
  }
  for (const auto& g : mesh.subdomains) {
    if (g.ambient_dim != mesh.ambient_dim) throw MeshError("subdomain '" + g.name + "': ambient dimension mismatch");
    validate(g);
  }
  if (static_cast<int>(mesh.offsets.size()) != static_cast<int>(mesh.subdomains.size()) + 1) {
    throw MeshError("global dof map out of date");
  }
  for (std::size_t s = 0; s < mesh.subdomains.size(); ++s) {
    if (mesh.offsets[s + 1] - mesh.offsets[s] != mesh.subdomains[s].num_cells()) {
      throw MeshError("global dof map is not a bijection");
    }
  }

  const double tol = 1e-10 * mesh.domain_diameter();
  std::vector<std::vector<char>> paired(mesh.subdomains.size());
  for (std::size_t s = 0; s < mesh.subdomains.size(); ++s) paired[s].assign(mesh.subdomains[s].num_faces(), 0);

  for (std::size_t i = 0; i < mesh.interfaces.size(); ++i) {
    const auto& intf = mesh.interfaces[i];
    const int ns = static_cast<int>(mesh.subdomains.size());
    if (intf.higher < 0 || intf.higher >= ns || intf.lower < 0 || intf.lower >= ns) {
      throw MeshError("interface " + std::to_string(i) + ": invalid subdomain index");
    }
    const auto& hi = mesh.subdomains[intf.higher];
    const auto& lo = mesh.subdomains[intf.lower];
    if (hi.dim != lo.dim + 1) throw MeshError("interface " + std::to_string(i) + ": dimensions must differ by one");
    for (std::size_t k = 0; k < intf.pairs.size(); ++k) {
      const auto [f, c] = intf.pairs[k];
      std::ostringstream label;
      label << "interface " << i << " pair " << k << " (face " << f << ", cell " << c << ")";
      if (f < 0 || f >= hi.num_faces() || c < 0 || c >= lo.num_cells()) throw MeshError(label.str() + ": index out of range");
      if (hi.face_kinds[f] != FaceKind::Interface) throw MeshError(label.str() + ": face is not an internal boundary");
      if (paired[intf.higher][f]) throw MeshError(label.str() + ": face mapped to more than one cell");
      paired[intf.higher][f] = 1;
      const double gap = (hi.face_centres[f] - lo.cell_centres[c]).norm();
      if (gap > tol) {
        std::ostringstream os;
        os << label.str() << ": centroid mismatch " << gap << " exceeds tolerance " << tol;
        throw MeshError(os.str());
      }
    }
  }
  for (std::size_t s = 0; s < mesh.subdomains.size(); ++s) {
    const auto& g = mesh.subdomains[s];
    for (int f = 0; f < g.num_faces(); ++f) {
      if (g.face_kinds[f] == FaceKind::Interface && !paired[s][f]) {
        throw MeshError(where(g, "face", f) + ": internal boundary face without interface pair");
      }
    }
  }
}

double min_cell_diameter(const MixedDimensionalMesh& mesh) {
  const auto& g = mesh.highest();
  double h = std::numeric_limits<double>::infinity();
  for (int c = 0; c < g.num_cells(); ++c) h = std::min(h, geometry::max_pairwise_distance(gather(g, g.cell_nodes[c])));
  return h;
}

std::vector<int> dofs_with_dim_at_most(const MixedDimensionalMesh& mesh, int max_dim) {
  std::vector<int> out;
  for (std::size_t s = 0; s < mesh.subdomains.size(); ++s) {
    if (mesh.subdomains[s].dim > max_dim) continue;
    for (int c = 0; c < mesh.subdomains[s].num_cells(); ++c) out.push_back(mesh.dof(static_cast<int>(s), c));
  }
  return out;
}

}  // namespace fracfv
