#include "fracfv/coupling.hpp"

#include "fracfv/error.hpp"

#include <cmath>
#include <sstream>

namespace fracfv {

CouplingTransmissibility coupling_transmissibility(double area, const Vec3& normal, const Vec3& d,
                                                   const PermeabilityTensor& k_higher, double aperture,
                                                   double lower_normal_k, bool distance_correction) {
  if (!(aperture > 0.0)) throw AssemblyError("coupling requires a positive aperture");
  Vec3 dist = d;
  if (distance_correction) {
    const double len = d.norm();
    if (!(aperture < 2.0 * len)) {
      std::ostringstream os;
      os << "aperture " << aperture << " is not small compared with the cell-to-face distance " << len
         << "; the distance correction assumes a << h_min";
      throw AssemblyError(os.str());
    }
    dist = d * (1.0 - aperture / (2.0 * len));
  }
  CouplingTransmissibility c;
  c.alpha_higher = tpfa_half_transmissibility(area, normal, k_higher, dist);
  c.alpha_lower = lower_normal_k / (aperture / 2.0) * area;
  c.t = tpfa_face_transmissibility(c.alpha_higher, c.alpha_lower);
  return c;
}

GlobalSystem assemble_global(const MixedDimensionalMesh& mesh, std::vector<SubdomainDiscretization> discretizations,
                             const std::vector<PermeabilityField>& permeability, const Vector& sources,
                             const CouplingOptions& options) {
  const int ns = static_cast<int>(mesh.subdomains.size());
  if (static_cast<int>(discretizations.size()) != ns) throw AssemblyError("one discretization per subdomain is required");
  if (static_cast<int>(permeability.size()) != ns) throw AssemblyError("one permeability field per subdomain is required");
  const int n = mesh.num_dofs();
  if (sources.size() != 0 && sources.size() != n) throw AssemblyError("source vector does not match the dof count");

  GlobalSystem sys;
  sys.offsets = mesh.offsets;
  sys.dof_subdomain.resize(n);
  for (int s = 0; s < ns; ++s) {
    sys.subdomain_dims.push_back(mesh.subdomains[s].dim);
    for (int c = 0; c < mesh.subdomains[s].num_cells(); ++c) sys.dof_subdomain[mesh.dof(s, c)] = s;
  }

  std::vector<Triplet> internal;
  sys.boundary_rhs = Vector::Zero(n);
  for (int s = 0; s < ns; ++s) {
    const auto& g = mesh.subdomains[s];
    const auto& disc = discretizations[s];
    if (disc.flux.rows() != g.num_faces() || disc.flux.cols() != g.num_cells()) {
      throw AssemblyError("discretization of '" + g.name + "' does not match its grid");
    }
    const SparseMatrix as = disc.matrix();
    for (int r = 0; r < as.outerSize(); ++r) {
      for (SparseMatrix::InnerIterator it(as, r); it; ++it) {
        internal.emplace_back(mesh.offsets[s] + static_cast<int>(it.row()), mesh.offsets[s] + static_cast<int>(it.col()),
                              it.value());
      }
    }
    sys.boundary_rhs.segment(mesh.offsets[s], g.num_cells()) = disc.boundary_rhs();
  }
  sys.internal = assemble(n, n, internal);

  std::vector<Triplet> w;
  std::vector<Triplet> lam;
  std::vector<bool> interface_seen(mesh.interfaces.size(), false);
  for (std::size_t ii = 0; ii < mesh.interfaces.size(); ++ii) {
    const auto& im = mesh.interfaces[ii];
    const auto& hg = mesh.subdomains[im.higher];
    const auto& lg = mesh.subdomains[im.lower];
    const auto& hdisc = discretizations[im.higher];
    const SparseMatrix bf_col = hdisc.div * hdisc.bound_flux;  // cells x faces
    const SparseMatrix bf_t = bf_col.transpose();              // faces x cells, row access by face
    for (const auto& [face, cell] : im.pairs) {
      CouplingPair cp;
      cp.interface = static_cast<int>(ii);
      cp.higher_subdomain = im.higher;
      cp.higher_face = face;
      const int hc = hg.face_cells[face][0];
      cp.higher_dof = mesh.dof(im.higher, hc);
      cp.lower_subdomain = im.lower;
      cp.lower_cell = cell;
      cp.lower_dof = mesh.dof(im.lower, cell);
      const auto& kl = permeability[im.lower][cell];
      const double knn = lg.dim == 0 ? kl.eigen_mean() : kl.normal_component(hg.face_normals[face]);
      try {
        cp.trans = coupling_transmissibility(hg.face_areas[face], hg.face_normals[face],
                                             hg.face_centres[face] - hg.cell_centres[hc], permeability[im.higher][hc],
                                             lg.apertures[cell], knn, options.distance_correction);
      } catch (const AssemblyError& e) {
        std::ostringstream os;
        os << e.what() << " (interface " << ii << ", face " << face << ", cell " << cell << ")";
        throw AssemblyError(os.str());
      }
      const int k = static_cast<int>(sys.pairs.size());
      for (SparseMatrix::InnerIterator it(bf_t, face); it; ++it) {
        w.emplace_back(mesh.offsets[im.higher] + static_cast<int>(it.col()), k, it.value());
      }
      w.emplace_back(cp.lower_dof, k, -1.0);
      lam.emplace_back(k, cp.higher_dof, cp.trans.t);
      lam.emplace_back(k, cp.lower_dof, -cp.trans.t);
      sys.pairs.push_back(cp);
    }
    interface_seen[ii] = true;
  }
  for (std::size_t ii = 0; ii < interface_seen.size(); ++ii) {
    if (!interface_seen[ii]) throw AssemblyError("missing coupling for interface " + std::to_string(ii));
  }
  const int np = static_cast<int>(sys.pairs.size());
  sys.w = assemble(n, np, w);
  sys.lambda = assemble(np, n, lam);
  SparseMatrix coupling = sys.w * sys.lambda;
  sys.a = sys.internal + coupling;
  sys.a.prune(0.0);
  sys.a.makeCompressed();
  sys.sources = sources.size() == 0 ? Vector::Zero(n) : sources;
  sys.b = sys.sources + sys.boundary_rhs;
  sys.discretizations = std::move(discretizations);
  return sys;
}

Vector interface_fluxes(const GlobalSystem& system, const Vector& p) { return system.lambda * p; }

std::vector<Vector> subdomain_face_fluxes(const GlobalSystem& system, const Vector& p, const Vector& lambda) {
  std::vector<Vector> data;
  for (const auto& d : system.discretizations) data.push_back(d.boundary_data);
  for (std::size_t k = 0; k < system.pairs.size(); ++k) {
    data[system.pairs[k].higher_subdomain][system.pairs[k].higher_face] = lambda[static_cast<int>(k)];
  }
  std::vector<Vector> out;
  for (std::size_t s = 0; s < system.discretizations.size(); ++s) {
    out.push_back(reconstruct_fluxes(system.discretizations[s], subdomain_values(system, p, static_cast<int>(s)), data[s]));
  }
  return out;
}

Vector residual(const GlobalSystem& system, const Vector& p) { return system.a * p - system.b; }

Vector subdomain_values(const GlobalSystem& system, const Vector& p, int s) {
  return p.segment(system.offsets[s], system.offsets[s + 1] - system.offsets[s]);
}

}  // namespace fracfv
