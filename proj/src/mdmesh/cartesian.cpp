#include "fracfv/cartesian.hpp"

#include "fracfv/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace fracfv {

namespace {

const char* axis_name(int a) { return a == 0 ? "x" : (a == 1 ? "y" : "z"); }

int find_grid_index(const std::vector<double>& coords, double value, double tol) {
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (std::abs(coords[i] - value) <= tol) return static_cast<int>(i);
  }
  return -1;
}

using EntityKey = std::array<int, 2>;  // sorted node ids; second = -1 for a single node

struct Incidence {
  int patch;
  int cell;
};

class CartesianBuilder {
public:
  CartesianBuilder(const FractureNetworkSpec& spec, const AxisCoordinates& axes) : spec_(spec), axes_(axes) {
    dim_ = spec.dim;
    if (dim_ != 2 && dim_ != 3) throw MeshError("Cartesian builder supports 2D and 3D domains only");
    for (int a = 0; a < 3; ++a) {
      if (a < dim_) {
        if (axes_[a].size() < 2) throw MeshError(std::string("axis ") + axis_name(a) + " needs at least one cell");
        if (!std::is_sorted(axes_[a].begin(), axes_[a].end())) throw MeshError("axis coordinates must increase");
        n_[a] = static_cast<int>(axes_[a].size()) - 1;
      } else {
        axes_[a] = {0.0};
        n_[a] = 0;
      }
    }
    scale_ = 0.0;
    for (int a = 0; a < dim_; ++a) scale_ = std::max(scale_, axes_[a].back() - axes_[a].front());
    tol_ = 1e-10 * scale_;
  }

  MixedDimensionalMesh build() {
    mark_fractures();
    MixedDimensionalMesh mesh;
    mesh.ambient_dim = dim_;
    mesh.subdomains.push_back(build_matrix());
    for (std::size_t p = 0; p < spec_.fractures.size(); ++p) mesh.subdomains.push_back(build_fracture(static_cast<int>(p)));
    build_intersections(mesh);
    for (auto& g : mesh.subdomains) compute_geometry(g);
    mesh.rebuild_dof_map();
    validate(mesh);
    return mesh;
  }

private:
  int cells_along(int a) const { return a < dim_ ? n_[a] : 1; }
  int node_id(int i, int j, int k) const { return i + (n_[0] + 1) * (j + (n_[1] + 1) * k); }
  int cell_id(int i, int j, int k) const { return i + n_[0] * (j + n_[1] * k); }
  Vec3 node_pos(int id) const {
    const int i = id % (n_[0] + 1);
    const int j = (id / (n_[0] + 1)) % (n_[1] + 1);
    const int k = id / ((n_[0] + 1) * (n_[1] + 1));
    return Vec3(axes_[0][i], axes_[1][j], axes_[2][k]);
  }

  // Other axes of a face normal to `a`, in increasing order.
  std::array<int, 2> others(int a) const {
    if (dim_ == 2) return {a == 0 ? 1 : 0, 2};
    std::array<int, 2> o{};
    int m = 0;
    for (int b = 0; b < 3; ++b) {
      if (b != a) o[m++] = b;
    }
    return o;
  }

  // Iterates faces normal to axis a in canonical order (p outermost, then r, then q).
  template <typename Fn>
  void for_each_face(int a, Fn&& fn) const {
    const auto [b, c] = others(a);
    const int nq = cells_along(b);
    const int nr = dim_ == 3 ? cells_along(c) : 1;
    for (int p = 0; p <= n_[a]; ++p) {
      for (int r = 0; r < nr; ++r) {
        for (int q = 0; q < nq; ++q) fn(p, q, r);
      }
    }
  }

  std::size_t face_slot(int a, int p, int q, int r) const {
    const auto [b, c] = others(a);
    const int nq = cells_along(b);
    const int nr = dim_ == 3 ? cells_along(c) : 1;
    return (static_cast<std::size_t>(p) * nr + r) * nq + q;
  }

  std::vector<int> face_grid_nodes(int a, int p, int q, int r) const {
    const auto [b, c] = others(a);
    auto at = [&](int qq, int rr) {
      std::array<int, 3> idx{0, 0, 0};
      idx[a] = p;
      idx[b] = qq;
      if (dim_ == 3) idx[c] = rr;
      return node_id(idx[0], idx[1], idx[2]);
    };
    if (dim_ == 2) return {at(q, 0), at(q + 1, 0)};
    return {at(q, r), at(q + 1, r), at(q + 1, r + 1), at(q, r + 1)};
  }

  int adjacent_cell(int a, int p, int q, int r) const {
    const auto [b, c] = others(a);
    std::array<int, 3> idx{0, 0, 0};
    idx[a] = p;
    idx[b] = q;
    if (dim_ == 3) idx[c] = r;
    return cell_id(idx[0], idx[1], idx[2]);
  }

  void mark_fractures() {
    for (int a = 0; a < dim_; ++a) {
      const auto [b, c] = others(a);
      const std::size_t count = static_cast<std::size_t>(n_[a] + 1) * cells_along(b) * (dim_ == 3 ? cells_along(c) : 1);
      frac_of_face_[a].assign(count, -1);
      frac_cell_of_face_[a].assign(count, -1);
    }
    patch_faces_.assign(spec_.fractures.size(), {});

    for (std::size_t pi = 0; pi < spec_.fractures.size(); ++pi) {
      const auto& fr = spec_.fractures[pi];
      const int a = fr.normal_axis;
      const std::string label = "fracture '" + (fr.name.empty() ? std::to_string(pi) : fr.name) + "'";
      if (a < 0 || a >= dim_) throw MeshError(label + ": invalid normal axis");
      if (!(fr.aperture > 0.0)) throw MeshError(label + ": aperture must be positive");
      const int p = find_grid_index(axes_[a], fr.position, tol_);
      if (p < 0) {
        std::ostringstream os;
        os << label << ": plane " << axis_name(a) << "=" << fr.position << " does not coincide with a grid plane";
        throw MeshError(os.str());
      }
      if (p == 0 || p == n_[a]) throw MeshError(label + ": plane lies on the domain boundary");
      const auto oth = others(a);
      std::array<int, 2> lo{0, 0}, hi{1, 1};
      for (int m = 0; m < (dim_ == 3 ? 2 : 1); ++m) {
        const int b = oth[m];
        lo[m] = find_grid_index(axes_[b], fr.lower[b], tol_);
        hi[m] = find_grid_index(axes_[b], fr.upper[b], tol_);
        if (lo[m] < 0 || hi[m] < 0 || hi[m] <= lo[m]) {
          std::ostringstream os;
          os << label << ": extent along " << axis_name(b) << " [" << fr.lower[b] << ", " << fr.upper[b]
             << "] is not aligned with grid lines";
          throw MeshError(os.str());
        }
      }
      for (int r = lo[1]; r < hi[1]; ++r) {
        for (int q = lo[0]; q < hi[0]; ++q) {
          auto& slot = frac_of_face_[a][face_slot(a, p, q, r)];
          if (slot >= 0) {
            throw MeshError("fracture patches '" + spec_.fractures[slot].name + "' and '" + fr.name + "' overlap");
          }
          slot = static_cast<int>(pi);
        }
      }
    }
    // canonical numbering of fracture cells
    for (int a = 0; a < dim_; ++a) {
      for_each_face(a, [&](int p, int q, int r) {
        const std::size_t s = face_slot(a, p, q, r);
        const int pi = frac_of_face_[a][s];
        if (pi < 0) return;
        frac_cell_of_face_[a][s] = static_cast<int>(patch_faces_[pi].size());
        patch_faces_[pi].push_back(face_grid_nodes(a, p, q, r));
      });
    }
  }

  SubdomainGrid build_matrix() {
    SubdomainGrid g;
    g.dim = dim_;
    g.ambient_dim = dim_;
    g.name = "matrix";
    const int nk = dim_ == 3 ? n_[2] + 1 : 1;
    for (int k = 0; k < nk; ++k) {
      for (int j = 0; j <= n_[1]; ++j) {
        for (int i = 0; i <= n_[0]; ++i) g.nodes.push_back(node_pos(node_id(i, j, k)));
      }
    }
    const int ck = dim_ == 3 ? n_[2] : 1;
    for (int k = 0; k < ck; ++k) {
      for (int j = 0; j < n_[1]; ++j) {
        for (int i = 0; i < n_[0]; ++i) {
          if (dim_ == 2) {
            g.cell_nodes.push_back({node_id(i, j, 0), node_id(i + 1, j, 0), node_id(i + 1, j + 1, 0), node_id(i, j + 1, 0)});
          } else {
            std::vector<int> nodes;
            for (int dk = 0; dk < 2; ++dk)
              for (int dj = 0; dj < 2; ++dj)
                for (int di = 0; di < 2; ++di) nodes.push_back(node_id(i + di, j + dj, k + dk));
            g.cell_nodes.push_back(std::move(nodes));
          }
        }
      }
    }
    g.apertures.assign(g.cell_nodes.size(), 1.0);
    g.cell_parents.assign(g.cell_nodes.size(), {});
    matrix_pairs_.assign(spec_.fractures.size(), {});

    auto add_face = [&](std::vector<int> nodes, int owner, int neighbour, FaceKind kind) {
      g.face_nodes.push_back(std::move(nodes));
      g.face_cells.push_back({owner, neighbour});
      g.face_kinds.push_back(kind);
      return g.num_faces() - 1;
    };

    for (int a = 0; a < dim_; ++a) {
      for_each_face(a, [&](int p, int q, int r) {
        const auto nodes = face_grid_nodes(a, p, q, r);
        const int below = p > 0 ? adjacent_cell(a, p - 1, q, r) : -1;
        const int above = p < n_[a] ? adjacent_cell(a, p, q, r) : -1;
        const std::size_t s = face_slot(a, p, q, r);
        const int pi = frac_of_face_[a][s];
        if (pi >= 0) {
          const int fc = frac_cell_of_face_[a][s];
          const int f0 = add_face(nodes, below, -1, FaceKind::Interface);
          const int f1 = add_face(nodes, above, -1, FaceKind::Interface);
          matrix_pairs_[pi].push_back({f0, fc});
          matrix_pairs_[pi].push_back({f1, fc});
        } else if (below < 0) {
          add_face(nodes, above, -1, FaceKind::DomainBoundary);
        } else if (above < 0) {
          add_face(nodes, below, -1, FaceKind::DomainBoundary);
        } else {
          add_face(nodes, below, above, FaceKind::Interior);
        }
      });
    }
    return g;
  }

  bool on_domain_boundary(const Vec3& x) const {
    for (int a = 0; a < dim_; ++a) {
      if (std::abs(x[a] - axes_[a].front()) <= tol_ || std::abs(x[a] - axes_[a].back()) <= tol_) return true;
    }
    return false;
  }

  static EntityKey key_of(int n0, int n1) { return n0 < n1 ? EntityKey{n0, n1} : EntityKey{n1, n0}; }

  // (N-2)-dimensional entities of a fracture cell, as sorted grid node keys.
  std::vector<EntityKey> cell_entities(const std::vector<int>& nodes) const {
    if (dim_ == 2) return {EntityKey{nodes[0], -1}, EntityKey{nodes[1], -1}};
    return {key_of(nodes[0], nodes[1]), key_of(nodes[1], nodes[2]), key_of(nodes[2], nodes[3]), key_of(nodes[3], nodes[0])};
  }

  std::vector<int> key_nodes(const EntityKey& k) const {
    return k[1] < 0 ? std::vector<int>{k[0]} : std::vector<int>{k[0], k[1]};
  }

  Vec3 key_centre(const EntityKey& k) const {
    Vec3 c = node_pos(k[0]);
    if (k[1] >= 0) c = 0.5 * (c + node_pos(k[1]));
    return c;
  }

  SubdomainGrid build_fracture(int pi) {
    const auto& fr = spec_.fractures[pi];
    SubdomainGrid g;
    g.dim = dim_ - 1;
    g.ambient_dim = dim_;
    g.name = fr.name.empty() ? "fracture" + std::to_string(pi) : fr.name;
    std::map<int, int> local;
    auto loc = [&](int global) {
      auto [it, inserted] = local.try_emplace(global, g.num_nodes());
      if (inserted) g.nodes.push_back(node_pos(global));
      return it->second;
    };
    for (const auto& nodes : patch_faces_[pi]) {
      std::vector<int> ln;
      for (int n : nodes) ln.push_back(loc(n));
      g.cell_nodes.push_back(std::move(ln));
      g.apertures.push_back(fr.aperture);
      g.cell_parents.push_back({pi});
      for (const auto& key : cell_entities(nodes)) {
        entity_incidence_[key].push_back({pi, static_cast<int>(g.cell_nodes.size()) - 1});
      }
    }
    fracture_local_nodes_.push_back(std::move(local));
    return g;
  }

  void build_intersections(MixedDimensionalMesh& mesh) {
    // Entities shared by more than one patch become intersection cells.
    std::map<EntityKey, int> intersection_cell;
    std::vector<EntityKey> intersection_keys;
    for (const auto& [key, inc] : entity_incidence_) {
      std::set<int> patches;
      for (const auto& i : inc) patches.insert(i.patch);
      if (patches.size() >= 2) {
        intersection_cell[key] = static_cast<int>(intersection_keys.size());
        intersection_keys.push_back(key);
      }
    }

    const int nfrac = static_cast<int>(spec_.fractures.size());
    std::vector<std::vector<std::pair<int, int>>> frac_to_inter(nfrac);

    // Faces of fracture grids.
    for (int pi = 0; pi < nfrac; ++pi) {
      auto& g = mesh.subdomains[1 + pi];
      const auto& local = fracture_local_nodes_[pi];
      std::map<EntityKey, int> shared_face;
      for (int c = 0; c < g.num_cells(); ++c) {
        for (const auto& key : cell_entities(patch_faces_[pi][c])) {
          std::vector<int> ln;
          for (int n : key_nodes(key)) ln.push_back(local.at(n));
          auto ic = intersection_cell.find(key);
          if (ic != intersection_cell.end()) {
            g.face_nodes.push_back(ln);
            g.face_cells.push_back({c, -1});
            g.face_kinds.push_back(FaceKind::Interface);
            frac_to_inter[pi].push_back({g.num_faces() - 1, ic->second});
            continue;
          }
          std::vector<int> same;
          for (const auto& i : entity_incidence_.at(key)) {
            if (i.patch == pi) same.push_back(i.cell);
          }
          if (same.size() == 2) {
            if (shared_face.count(key)) continue;
            const int other = same[0] == c ? same[1] : same[0];
            g.face_nodes.push_back(ln);
            g.face_cells.push_back({c, other});
            g.face_kinds.push_back(FaceKind::Interior);
            shared_face[key] = g.num_faces() - 1;
          } else {
            g.face_nodes.push_back(ln);
            g.face_cells.push_back({c, -1});
            g.face_kinds.push_back(on_domain_boundary(key_centre(key)) ? FaceKind::DomainBoundary : FaceKind::Tip);
          }
        }
      }
    }

    auto parents_of = [&](const EntityKey& key) {
      std::set<int> patches;
      for (const auto& i : entity_incidence_.at(key)) patches.insert(i.patch);
      return std::vector<int>(patches.begin(), patches.end());
    };
    auto aperture_of = [&](const std::vector<int>& parents) {
      if (spec_.intersection_aperture) return *spec_.intersection_aperture;
      double a = std::numeric_limits<double>::infinity();
      for (int p : parents) a = std::min(a, spec_.fractures[p].aperture);
      return a;
    };

    for (int pi = 0; pi < nfrac; ++pi) {
      if (!matrix_pairs_[pi].empty()) mesh.interfaces.push_back({0, 1 + pi, matrix_pairs_[pi]});
    }
    if (intersection_keys.empty()) return;

    if (dim_ == 2) {
      SubdomainGrid pts;
      pts.dim = 0;
      pts.ambient_dim = 2;
      pts.name = "intersections0d";
      for (const auto& key : intersection_keys) {
        pts.nodes.push_back(node_pos(key[0]));
        pts.cell_nodes.push_back({pts.num_nodes() - 1});
        pts.cell_parents.push_back(parents_of(key));
        pts.apertures.push_back(aperture_of(pts.cell_parents.back()));
      }
      const int sid = static_cast<int>(mesh.subdomains.size());
      mesh.subdomains.push_back(std::move(pts));
      for (int pi = 0; pi < nfrac; ++pi) {
        if (!frac_to_inter[pi].empty()) mesh.interfaces.push_back({1 + pi, sid, frac_to_inter[pi]});
      }
      return;
    }

    // 3D: intersection lines, then points where lines of different directions meet.
    SubdomainGrid lines;
    lines.dim = 1;
    lines.ambient_dim = 3;
    lines.name = "intersections1d";
    std::map<int, int> local;
    auto loc = [&](int global) {
      auto [it, inserted] = local.try_emplace(global, lines.num_nodes());
      if (inserted) lines.nodes.push_back(node_pos(global));
      return it->second;
    };
    std::map<int, std::vector<int>> node_edges;  // grid node -> line cells
    auto direction = [&](const EntityKey& k) {
      const Vec3 d = node_pos(k[1]) - node_pos(k[0]);
      int axis = 0;
      for (int a = 1; a < 3; ++a) {
        if (std::abs(d[a]) > std::abs(d[axis])) axis = a;
      }
      return axis;
    };
    for (std::size_t e = 0; e < intersection_keys.size(); ++e) {
      const auto& key = intersection_keys[e];
      lines.cell_nodes.push_back({loc(key[0]), loc(key[1])});
      lines.cell_parents.push_back(parents_of(key));
      lines.apertures.push_back(aperture_of(lines.cell_parents.back()));
      node_edges[key[0]].push_back(static_cast<int>(e));
      node_edges[key[1]].push_back(static_cast<int>(e));
    }
    std::map<int, int> point_cell;
    std::vector<int> point_nodes;
    for (const auto& [node, edges] : node_edges) {
      std::set<int> dirs;
      for (int e : edges) dirs.insert(direction(intersection_keys[e]));
      if (dirs.size() >= 2) {
        point_cell[node] = static_cast<int>(point_nodes.size());
        point_nodes.push_back(node);
      }
    }
    std::vector<std::pair<int, int>> line_to_point;
    std::map<int, int> shared;
    for (std::size_t e = 0; e < intersection_keys.size(); ++e) {
      const int c = static_cast<int>(e);
      for (int node : key_nodes(intersection_keys[e])) {
        auto pc = point_cell.find(node);
        if (pc != point_cell.end()) {
          lines.face_nodes.push_back({local.at(node)});
          lines.face_cells.push_back({c, -1});
          lines.face_kinds.push_back(FaceKind::Interface);
          line_to_point.push_back({lines.num_faces() - 1, pc->second});
          continue;
        }
        const auto& inc = node_edges.at(node);
        if (inc.size() == 2) {
          if (shared.count(node)) continue;
          const int other = inc[0] == c ? inc[1] : inc[0];
          lines.face_nodes.push_back({local.at(node)});
          lines.face_cells.push_back({c, other});
          lines.face_kinds.push_back(FaceKind::Interior);
          shared[node] = lines.num_faces() - 1;
        } else if (inc.size() == 1) {
          lines.face_nodes.push_back({local.at(node)});
          lines.face_cells.push_back({c, -1});
          lines.face_kinds.push_back(on_domain_boundary(node_pos(node)) ? FaceKind::DomainBoundary : FaceKind::Tip);
        } else {
          throw MeshError("intersection line node shared by more than two collinear segments");
        }
      }
    }
    const int line_sid = static_cast<int>(mesh.subdomains.size());
    mesh.subdomains.push_back(std::move(lines));
    for (int pi = 0; pi < nfrac; ++pi) {
      if (!frac_to_inter[pi].empty()) mesh.interfaces.push_back({1 + pi, line_sid, frac_to_inter[pi]});
    }
    if (point_nodes.empty()) return;

    SubdomainGrid pts;
    pts.dim = 0;
    pts.ambient_dim = 3;
    pts.name = "intersections0d";
    const auto& line_grid = mesh.subdomains[line_sid];
    for (int node : point_nodes) {
      std::set<int> parents;
      for (int e : node_edges.at(node)) {
        for (int p : line_grid.cell_parents[e]) parents.insert(p);
      }
      pts.nodes.push_back(node_pos(node));
      pts.cell_nodes.push_back({pts.num_nodes() - 1});
      pts.cell_parents.emplace_back(parents.begin(), parents.end());
      pts.apertures.push_back(aperture_of(pts.cell_parents.back()));
    }
    const int pt_sid = static_cast<int>(mesh.subdomains.size());
    mesh.subdomains.push_back(std::move(pts));
    mesh.interfaces.push_back({line_sid, pt_sid, line_to_point});
  }

  const FractureNetworkSpec& spec_;
  AxisCoordinates axes_;
  int dim_ = 2;
  std::array<int, 3> n_{0, 0, 0};
  double scale_ = 1.0;
  double tol_ = 1e-10;

  std::array<std::vector<int>, 3> frac_of_face_;
  std::array<std::vector<int>, 3> frac_cell_of_face_;
  std::vector<std::vector<std::vector<int>>> patch_faces_;  // per patch: grid node ids of each fracture cell
  std::vector<std::vector<std::pair<int, int>>> matrix_pairs_;
  std::map<EntityKey, std::vector<Incidence>> entity_incidence_;
  std::vector<std::map<int, int>> fracture_local_nodes_;
};

}  // namespace

AxisCoordinates uniform_axes(const FractureNetworkSpec& spec, std::array<int, 3> resolution) {
  AxisCoordinates axes;
  for (int a = 0; a < spec.dim; ++a) {
    const int n = resolution[a];
    if (n < 1) throw MeshError("resolution must be positive");
    axes[a].resize(n + 1);
    for (int i = 0; i <= n; ++i) axes[a][i] = spec.lower[a] + (spec.upper[a] - spec.lower[a]) * i / n;
    axes[a].back() = spec.upper[a];
  }
  return axes;
}

MixedDimensionalMesh build_cartesian_with_fractures(const FractureNetworkSpec& spec, std::array<int, 3> resolution) {
  return build_cartesian_with_fractures(spec, uniform_axes(spec, resolution));
}

MixedDimensionalMesh build_cartesian_with_fractures(const FractureNetworkSpec& spec, const AxisCoordinates& axes) {
  return CartesianBuilder(spec, axes).build();
}

namespace {

PermeabilityTensor least_permeable(const FractureNetworkSpec& spec, const std::vector<int>& parents) {
  int best = parents[0];
  for (int p : parents) {
    if (spec.fractures.at(p).permeability.eigen_mean() < spec.fractures.at(best).permeability.eigen_mean()) best = p;
  }
  return spec.fractures.at(best).permeability;
}

PermeabilityTensor intersection_permeability(int ambient_dim, const FractureNetworkSpec& spec,
                                             const std::vector<int>& parents) {
  const auto& rule = spec.intersection_rule;
  switch (rule.kind) {
    case IntersectionRule::Kind::Explicit:
      return rule.tensor;
    case IntersectionRule::Kind::FromPatch:
      if (std::find(parents.begin(), parents.end(), rule.patch) != parents.end()) {
        return spec.fractures.at(rule.patch).permeability;
      }
      return least_permeable(spec, parents);
    case IntersectionRule::Kind::HarmonicMean: {
      double inv = 0.0;
      for (int p : parents) inv += 1.0 / spec.fractures.at(p).permeability.eigen_mean();
      return PermeabilityTensor::isotropic(ambient_dim, static_cast<double>(parents.size()) / inv);
    }
    case IntersectionRule::Kind::LeastPermeable:
      break;
  }
  return least_permeable(spec, parents);
}

}  // namespace

std::vector<PermeabilityField> assign_permeability(const MixedDimensionalMesh& mesh, const FractureNetworkSpec& spec,
                                                   const std::function<PermeabilityTensor(const Vec3&)>& matrix_k) {
  std::vector<PermeabilityField> out(mesh.subdomains.size());
  for (std::size_t s = 0; s < mesh.subdomains.size(); ++s) {
    const auto& g = mesh.subdomains[s];
    auto& field = out[s];
    field.reserve(g.num_cells());
    for (int c = 0; c < g.num_cells(); ++c) {
      if (g.dim == mesh.ambient_dim) {
        field.push_back(matrix_k(g.cell_centres[c]));
        continue;
      }
      const auto& parents = g.cell_parents[c];
      if (parents.empty()) throw AssemblyError("lower-dimensional cell without parent fracture in '" + g.name + "'");
      if (parents.size() == 1) {
        field.push_back(spec.fractures.at(parents[0]).permeability);
        continue;
      }
      field.push_back(intersection_permeability(mesh.ambient_dim, spec, parents));
    }
  }
  return out;
}

}  // namespace fracfv
