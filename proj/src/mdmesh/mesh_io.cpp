#include "fracfv/mesh_io.hpp"

#include "fracfv/error.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <set>
#include <ostream>
#include <sstream>

namespace fracfv {

namespace {

class TokenReader {
public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  std::string word(const char* what) {
    std::string tok;
    while (true) {
      if (!(in_ >> tok)) throw FormatError(std::string("unexpected end of mesh document, expected ") + what);
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in_, rest);
        continue;
      }
      return tok;
    }
  }

  void expect(const std::string& keyword) {
    const std::string tok = word(keyword.c_str());
    if (tok != keyword) throw FormatError("expected '" + keyword + "' but found '" + tok + "'");
  }

  int integer(const char* what) {
    const std::string tok = word(what);
    try {
      std::size_t used = 0;
      const int v = std::stoi(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw FormatError(std::string("expected integer ") + what + ", found '" + tok + "'");
    }
  }

  int count(const char* what) {
    const int v = integer(what);
    if (v < 0) throw FormatError(std::string("negative ") + what);
    return v;
  }

  double real(const char* what) {
    const std::string tok = word(what);
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw FormatError(std::string("expected number ") + what + ", found '" + tok + "'");
    }
  }

private:
  std::istream& in_;
};

FaceKind parse_kind(const std::string& s) {
  if (s == "interior") return FaceKind::Interior;
  if (s == "boundary") return FaceKind::DomainBoundary;
  if (s == "interface") return FaceKind::Interface;
  if (s == "tip") return FaceKind::Tip;
  throw FormatError("unknown face kind '" + s + "'");
}

struct RawSubdomain {
  SubdomainGrid grid;
  bool derived = false;
};

/// Builds faces of a simplex grid; returns, per paired face, the faces it
/// became (two after splitting a shared face).
std::map<int, std::vector<int>> derive_faces(SubdomainGrid& g, const std::vector<int>& paired_faces, const Vec3& box_lo,
                                             const Vec3& box_hi, double tol) {
  for (int c = 0; c < g.num_cells(); ++c) {
    if (static_cast<int>(g.cell_nodes[c].size()) != g.dim + 1) {
      std::ostringstream os;
      os << "cell " << c << " of subdomain '" << g.name << "' is not a simplex (" << g.cell_nodes[c].size()
         << " nodes in dimension " << g.dim << ")";
      throw FormatError(os.str());
    }
  }
  std::map<std::vector<int>, int> index;
  if (g.dim > 0) {
    for (int c = 0; c < g.num_cells(); ++c) {
      const auto& cn = g.cell_nodes[c];
      for (std::size_t j = 0; j < cn.size(); ++j) {
        std::vector<int> nodes;
        for (std::size_t q = 0; q < cn.size(); ++q) {
          if (q != j) nodes.push_back(cn[q]);
        }
        std::vector<int> key = nodes;
        std::sort(key.begin(), key.end());
        auto it = index.find(key);
        if (it == index.end()) {
          index.emplace(key, g.num_faces());
          g.face_nodes.push_back(nodes);
          g.face_cells.push_back({c, -1});
          g.face_kinds.push_back(FaceKind::DomainBoundary);
        } else {
          auto& fc = g.face_cells[it->second];
          if (fc[1] >= 0) {
            throw FormatError("face shared by more than two cells in subdomain '" + g.name + "'");
          }
          fc[1] = c;
          g.face_kinds[it->second] = FaceKind::Interior;
        }
      }
    }
  }
  std::map<int, std::vector<int>> split;
  const int derived_count = g.num_faces();
  for (int face : paired_faces) {
    if (face < 0 || face >= derived_count) throw FormatError("interface pair references unknown face " + std::to_string(face));
    if (split.count(face)) continue;
    auto& result = split[face];
    result.push_back(face);
    g.face_kinds[face] = FaceKind::Interface;
    auto& fc = g.face_cells[face];
    if (fc[1] >= 0) {
      const int other = fc[1];
      fc[1] = -1;
      g.face_nodes.push_back(g.face_nodes[face]);
      g.face_cells.push_back({other, -1});
      g.face_kinds.push_back(FaceKind::Interface);
      result.push_back(g.num_faces() - 1);
    }
  }
  for (int f = 0; f < derived_count; ++f) {
    if (split.count(f) || g.face_cells[f][1] >= 0) continue;
    Vec3 centre = Vec3::Zero();
    for (int n : g.face_nodes[f]) centre += g.nodes[n];
    centre /= static_cast<double>(g.face_nodes[f].size());
    bool on_box = false;
    for (int a = 0; a < g.ambient_dim; ++a) {
      if (std::abs(centre[a] - box_lo[a]) <= tol || std::abs(centre[a] - box_hi[a]) <= tol) on_box = true;
    }
    g.face_kinds[f] = on_box ? FaceKind::DomainBoundary : FaceKind::Tip;
  }
  return split;
}

}  // namespace

MixedDimensionalMesh read_mesh(std::istream& in) {
  TokenReader tr(in);
  tr.expect("fracfv-mesh");
  const int version = tr.integer("format version");
  if (version != 1) throw FormatError("unsupported mesh format version " + std::to_string(version));
  tr.expect("ambient_dim");
  MixedDimensionalMesh mesh;
  mesh.ambient_dim = tr.integer("ambient dimension");
  if (mesh.ambient_dim < 1 || mesh.ambient_dim > 3) throw FormatError("ambient dimension must be 1, 2 or 3");
  tr.expect("subdomains");
  const int ns = tr.count("subdomain count");
  std::vector<RawSubdomain> raw(ns);
  for (int s = 0; s < ns; ++s) {
    auto& g = raw[s].grid;
    tr.expect("subdomain");
    g.dim = tr.integer("subdomain dimension");
    if (g.dim < 0 || g.dim > mesh.ambient_dim) throw FormatError("invalid subdomain dimension " + std::to_string(g.dim));
    g.ambient_dim = mesh.ambient_dim;
    g.name = tr.word("subdomain name");
    tr.expect("nodes");
    const int nn = tr.count("node count");
    g.nodes.resize(nn);
    for (int n = 0; n < nn; ++n) {
      for (int a = 0; a < 3; ++a) g.nodes[n][a] = tr.real("node coordinate");
    }
    tr.expect("cells");
    const int nc = tr.count("cell count");
    for (int c = 0; c < nc; ++c) {
      g.apertures.push_back(tr.real("aperture"));
      const int k = tr.count("cell node count");
      std::vector<int> nodes(k);
      for (int& v : nodes) {
        v = tr.integer("cell node");
        if (v < 0 || v >= nn) throw FormatError("cell " + std::to_string(c) + " of '" + g.name + "' references unknown node");
      }
      g.cell_nodes.push_back(std::move(nodes));
    }
    g.cell_parents.assign(nc, {});
    tr.expect("faces");
    const std::string mode = tr.word("face count or 'derived'");
    if (mode == "derived") {
      raw[s].derived = true;
      continue;
    }
    int nf = 0;
    try {
      nf = std::stoi(mode);
    } catch (const std::exception&) {
      throw FormatError("expected face count or 'derived', found '" + mode + "'");
    }
    for (int f = 0; f < nf; ++f) {
      const int owner = tr.integer("face owner");
      const int neighbour = tr.integer("face neighbour");
      const FaceKind kind = parse_kind(tr.word("face kind"));
      const int k = tr.count("face node count");
      std::vector<int> nodes(k);
      for (int& v : nodes) {
        v = tr.integer("face node");
        if (v < 0 || v >= nn) throw FormatError("face " + std::to_string(f) + " of '" + g.name + "' references unknown node");
      }
      if (owner < 0 || owner >= nc || neighbour < -1 || neighbour >= nc) {
        throw FormatError("face " + std::to_string(f) + " of '" + g.name + "' references unknown cells");
      }
      g.face_nodes.push_back(std::move(nodes));
      g.face_cells.push_back({owner, neighbour});
      g.face_kinds.push_back(kind);
    }
  }
  tr.expect("interfaces");
  const int ni = tr.count("interface count");
  std::vector<InterfaceMap> maps(ni);
  for (int i = 0; i < ni; ++i) {
    tr.expect("interface");
    maps[i].higher = tr.integer("higher subdomain");
    maps[i].lower = tr.integer("lower subdomain");
    if (maps[i].higher < 0 || maps[i].higher >= ns || maps[i].lower < 0 || maps[i].lower >= ns) {
      throw FormatError("interface " + std::to_string(i) + " references unknown subdomains");
    }
    const int np = tr.count("pair count");
    for (int p = 0; p < np; ++p) {
      const int face = tr.integer("pair face");
      const int cell = tr.integer("pair cell");
      maps[i].pairs.push_back({face, cell});
    }
  }

  int top = 0;
  for (int s = 0; s < ns; ++s) {
    if (raw[s].grid.dim > raw[top].grid.dim) top = s;
  }
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& x : raw.empty() ? std::vector<Vec3>{} : raw[top].grid.nodes) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  const double tol = raw.empty() || raw[top].grid.nodes.empty() ? 0.0 : 1e-10 * (hi - lo).norm();

  for (int s = 0; s < ns; ++s) {
    if (!raw[s].derived) continue;
    std::vector<int> paired;
    for (const auto& im : maps) {
      if (im.higher != s) continue;
      for (const auto& pr : im.pairs) paired.push_back(pr.first);
    }
    const auto split = derive_faces(raw[s].grid, paired, lo, hi, tol);
    for (auto& im : maps) {
      if (im.higher != s) continue;
      std::vector<std::pair<int, int>> expanded;
      std::set<std::pair<int, int>> seen;
      for (const auto& [face, cell] : im.pairs) {
        for (int f : split.at(face)) {
          if (seen.insert({f, cell}).second) expanded.push_back({f, cell});
        }
      }
      im.pairs = std::move(expanded);
    }
  }

  for (auto& r : raw) {
    try {
      compute_geometry(r.grid);
    } catch (const MeshError& e) {
      throw FormatError(e.what());
    }
    mesh.subdomains.push_back(std::move(r.grid));
  }
  mesh.interfaces = std::move(maps);
  mesh.rebuild_dof_map();
  validate(mesh);
  return mesh;
}

MixedDimensionalMesh import_conforming_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file '" + path + "'");
  return read_mesh(in);
}

void write_mesh(const MixedDimensionalMesh& mesh, std::ostream& out) {
  out << std::setprecision(17);
  out << "fracfv-mesh 1\n";
  out << "ambient_dim " << mesh.ambient_dim << '\n';
  out << "subdomains " << mesh.subdomains.size() << '\n';
  for (const auto& g : mesh.subdomains) {
    out << "subdomain " << g.dim << ' ' << (g.name.empty() ? "unnamed" : g.name) << '\n';
    out << "nodes " << g.num_nodes() << '\n';
    for (const auto& x : g.nodes) out << x[0] << ' ' << x[1] << ' ' << x[2] << '\n';
    out << "cells " << g.num_cells() << '\n';
    for (int c = 0; c < g.num_cells(); ++c) {
      out << g.apertures[c] << ' ' << g.cell_nodes[c].size();
      for (int n : g.cell_nodes[c]) out << ' ' << n;
      out << '\n';
    }
    out << "faces " << g.num_faces() << '\n';
    for (int f = 0; f < g.num_faces(); ++f) {
      out << g.face_cells[f][0] << ' ' << g.face_cells[f][1] << ' ' << to_string(g.face_kinds[f]) << ' '
          << g.face_nodes[f].size();
      for (int n : g.face_nodes[f]) out << ' ' << n;
      out << '\n';
    }
  }
  out << "interfaces " << mesh.interfaces.size() << '\n';
  for (const auto& im : mesh.interfaces) {
    out << "interface " << im.higher << ' ' << im.lower << ' ' << im.pairs.size() << '\n';
    for (const auto& [f, c] : im.pairs) out << f << ' ' << c << '\n';
  }
}

void export_mesh(const MixedDimensionalMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_mesh(mesh, out);
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace fracfv
