#include "fracfv/discretization.hpp"

#include "fracfv/error.hpp"

#include <algorithm>
#include <exception>
#include <sstream>
#include <thread>

namespace fracfv {

namespace {

struct LocalCoordinates {
  Vec3 origin = Vec3::Zero();
  Eigen::Matrix<double, 3, Eigen::Dynamic> basis;
  int dim = 0;

  Eigen::VectorXd point(const Vec3& x) const { return basis.transpose() * (x - origin); }
  Eigen::VectorXd direction(const Vec3& v) const { return basis.transpose() * v; }
  Eigen::MatrixXd tensor(const PermeabilityTensor& k) const { return basis.transpose() * k.matrix() * basis; }
};

LocalCoordinates local_coordinates(const SubdomainGrid& grid) {
  LocalCoordinates lc;
  lc.dim = grid.dim;
  if (grid.dim == grid.ambient_dim) {
    lc.basis = Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, grid.dim);
    for (int a = 0; a < grid.dim; ++a) lc.basis(a, a) = 1.0;
    return lc;
  }
  const auto frame = geometry::fit_frame(grid.nodes, grid.dim);
  const double scale = geometry::max_pairwise_distance(grid.nodes);
  if (frame.deviation > 1e-10 * std::max(scale, 1.0)) {
    throw AssemblyError("MPFA requires planar subdomains; '" + grid.name + "' is not planar");
  }
  lc.origin = frame.origin;
  lc.basis = frame.basis;
  return lc;
}

int local_index(const std::vector<int>& list, int value) {
  const auto it = std::find(list.begin(), list.end(), value);
  return it == list.end() ? -1 : static_cast<int>(it - list.begin());
}

bool neumann_type(const SubdomainGrid& grid, const BoundaryConditionSet& bc, int f) {
  if (grid.face_cells[f][1] >= 0) return false;
  if (grid.face_kinds[f] == FaceKind::Interface) return true;
  return bc.at(f).kind == BcKind::Neumann;
}

InteractionRegion compute_region(const SubdomainGrid& grid, const PermeabilityField& k, const BoundaryConditionSet& bc,
                                 int node, double eta, const LocalCoordinates& lc) {
  const int d = lc.dim;
  InteractionRegion r;
  r.node = node;
  r.cells = grid.node_cells[node];
  r.faces = grid.node_faces[node];
  const int nc = static_cast<int>(r.cells.size());
  const int nf = static_cast<int>(r.faces.size());
  const int nu = d * nc;

  std::vector<Eigen::VectorXd> xc(nc);
  std::vector<Eigen::MatrixXd> kc(nc);
  for (int c = 0; c < nc; ++c) {
    xc[c] = lc.point(grid.cell_centres[r.cells[c]]);
    kc[c] = lc.tensor(k[r.cells[c]]);
  }
  const Eigen::VectorXd xn = lc.point(grid.nodes[node]);

  int rows = 0;
  for (int f : r.faces) rows += grid.face_cells[f][1] >= 0 ? 2 : 1;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, nu);
  Eigen::MatrixXd rp = Eigen::MatrixXd::Zero(rows, nc);
  Eigen::MatrixXd rb = Eigen::MatrixXd::Zero(rows, nf);

  std::vector<Eigen::VectorXd> normals(nf);
  int row = 0;
  for (int fl = 0; fl < nf; ++fl) {
    const int f = r.faces[fl];
    Eigen::VectorXd n = lc.direction(grid.face_normals[f]);
    n.normalize();
    normals[fl] = n;
    const Eigen::VectorXd xs = (1.0 - eta) * lc.point(grid.face_centres[f]) + eta * xn;
    const int i = local_index(r.cells, grid.face_cells[f][0]);
    if (i < 0) throw AssemblyError("inconsistent node-cell incidence at node " + std::to_string(node));
    if (grid.face_cells[f][1] >= 0) {
      const int j = local_index(r.cells, grid.face_cells[f][1]);
      if (j < 0) throw AssemblyError("inconsistent node-cell incidence at node " + std::to_string(node));
      m.block(row, d * i, 1, d) = (kc[i] * n).transpose();
      m.block(row, d * j, 1, d) = -(kc[j] * n).transpose();
      ++row;
      m.block(row, d * i, 1, d) = (xs - xc[i]).transpose();
      m.block(row, d * j, 1, d) = -(xs - xc[j]).transpose();
      rp(row, j) += 1.0;
      rp(row, i) -= 1.0;
      ++row;
    } else if (neumann_type(grid, bc, f)) {
      m.block(row, d * i, 1, d) = -(kc[i] * n).transpose();
      rb(row, fl) = 1.0 / grid.face_areas[f];
      ++row;
    } else {
      m.block(row, d * i, 1, d) = (lc.point(grid.face_centres[f]) - xc[i]).transpose();
      rb(row, fl) = 1.0;
      rp(row, i) = -1.0;
      ++row;
    }
  }
  if (rows != nu) {
    std::ostringstream os;
    os << "MPFA interaction region at node " << node << " of '" << grid.name << "' has " << rows << " equations for "
       << nu << " unknowns";
    throw AssemblyError(os.str());
  }
  for (int q = 0; q < rows; ++q) {
    const double s = m.row(q).cwiseAbs().maxCoeff();
    if (s > 0.0) {
      m.row(q) /= s;
      rp.row(q) /= s;
      rb.row(q) /= s;
    }
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  const Eigen::VectorXd u = lu.matrixLU().diagonal().cwiseAbs();
  const double umax = u.maxCoeff();
  const double umin = u.minCoeff();
  if (!(umin > 1e-12 * umax)) {
    std::ostringstream os;
    os << "singular MPFA local system at node " << node << " of '" << grid.name << "'";
    throw AssemblyError(os.str());
  }
  r.pivot_ratio = umax / umin;
  const Eigen::MatrixXd gp = lu.solve(rp);
  const Eigen::MatrixXd gb = lu.solve(rb);

  r.cell_coefficients = Eigen::MatrixXd::Zero(nf, nc);
  r.boundary_coefficients = Eigen::MatrixXd::Zero(nf, nf);
  for (int fl = 0; fl < nf; ++fl) {
    const int f = r.faces[fl];
    const double sub = 1.0 / static_cast<double>(grid.face_nodes[f].size());
    if (neumann_type(grid, bc, f)) {
      r.boundary_coefficients(fl, fl) = sub;
      continue;
    }
    const int i = local_index(r.cells, grid.face_cells[f][0]);
    const Eigen::RowVectorXd w = -(sub * grid.face_areas[f]) * (kc[i] * normals[fl]).transpose();
    r.cell_coefficients.row(fl) = w * gp.middleRows(d * i, d);
    r.boundary_coefficients.row(fl) = w * gb.middleRows(d * i, d);
  }
  return r;
}

}  // namespace

InteractionRegion mpfa_interaction_region(const SubdomainGrid& grid, const PermeabilityField& k,
                                          const BoundaryConditionSet& bc, int node, double eta) {
  if (grid.dim < 2) throw AssemblyError("MPFA interaction regions require dimension >= 2");
  if (node < 0 || node >= grid.num_nodes()) throw AssemblyError("unknown node " + std::to_string(node));
  return compute_region(grid, k, bc, node, eta, local_coordinates(grid));
}

SubdomainDiscretization assemble_mpfa(const SubdomainGrid& grid, const PermeabilityField& k, const BoundaryConditionSet& bc,
                                      std::optional<double> eta, int threads) {
  if (grid.dim <= 1) {
    auto disc = assemble_tpfa(grid, k, bc);
    disc.method = FluxMethod::Mpfa;
    return disc;
  }
  if (static_cast<int>(k.size()) != grid.num_cells()) {
    throw AssemblyError("permeability field of '" + grid.name + "' does not match its cell count");
  }
  if (bc.num_faces() != grid.num_faces()) {
    throw AssemblyError("boundary conditions of '" + grid.name + "' do not match its face count");
  }
  const double e = eta.value_or(default_eta(grid));
  if (!(e >= 0.0 && e < 1.0)) throw AssemblyError("continuity point parameter must lie in [0, 1)");
  const LocalCoordinates lc = local_coordinates(grid);

  const int nn = grid.num_nodes();
  std::vector<InteractionRegion> regions(nn);
  const int workers = std::clamp(threads, 1, std::max(1, nn));
  std::vector<std::exception_ptr> failures(workers);
  auto work = [&](int w) {
    try {
      for (int n = w; n < nn; n += workers) {
        if (!grid.node_cells[n].empty()) regions[n] = compute_region(grid, k, bc, n, e, lc);
      }
    } catch (...) {
      failures[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  SubdomainDiscretization disc;
  disc.method = FluxMethod::Mpfa;
  disc.eta = e;
  disc.boundary_data = Vector::Zero(grid.num_faces());
  disc.dirichlet.assign(grid.num_faces(), false);
  for (int f = 0; f < grid.num_faces(); ++f) {
    if (grid.face_cells[f][1] >= 0 || grid.face_kinds[f] == FaceKind::Interface) continue;
    const BoundaryCondition& c = bc.at(f);
    if (c.kind == BcKind::Dirichlet) {
      disc.dirichlet[f] = true;
      disc.boundary_data[f] = c.value;
    } else {
      disc.boundary_data[f] = c.value * grid.face_areas[f];
    }
  }

  std::vector<Triplet> flux;
  std::vector<Triplet> bound;
  for (const auto& r : regions) {
    if (r.node < 0) continue;
    ++disc.diagnostics.interaction_regions;
    disc.diagnostics.max_local_pivot_ratio = std::max(disc.diagnostics.max_local_pivot_ratio, r.pivot_ratio);
    for (std::size_t fl = 0; fl < r.faces.size(); ++fl) {
      for (std::size_t cl = 0; cl < r.cells.size(); ++cl) {
        const double v = r.cell_coefficients(fl, cl);
        if (v != 0.0) flux.emplace_back(r.faces[fl], r.cells[cl], v);
      }
      for (std::size_t gl = 0; gl < r.faces.size(); ++gl) {
        const double v = r.boundary_coefficients(fl, gl);
        if (v != 0.0) bound.emplace_back(r.faces[fl], r.faces[gl], v);
      }
    }
  }
  disc.flux = assemble(grid.num_faces(), grid.num_cells(), flux);
  disc.bound_flux = assemble(grid.num_faces(), grid.num_faces(), bound);
  disc.div = divergence(grid);
  return disc;
}

}  // namespace fracfv
