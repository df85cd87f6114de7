#include "fracfv/elimination.hpp"

#include "fracfv/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fracfv {

namespace {

std::string list_dofs(const std::vector<int>& dofs) {
  std::ostringstream os;
  const std::size_t shown = std::min<std::size_t>(dofs.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) os << (i ? ", " : "") << dofs[i];
  if (shown < dofs.size()) os << ", ... (" << dofs.size() << " total)";
  return os.str();
}

void partition(ReducedSystem& r, int n, std::vector<int> eliminated) {
  std::sort(eliminated.begin(), eliminated.end());
  eliminated.erase(std::unique(eliminated.begin(), eliminated.end()), eliminated.end());
  r.full_size = n;
  r.kept_index.assign(n, -1);
  r.eliminated_index.assign(n, -1);
  for (int d : eliminated) {
    if (d < 0 || d >= n) throw AssemblyError("eliminated index " + std::to_string(d) + " out of range");
    r.eliminated_index[d] = static_cast<int>(r.eliminated.size());
    r.eliminated.push_back(d);
  }
  for (int d = 0; d < n; ++d) {
    if (r.eliminated_index[d] < 0) {
      r.kept_index[d] = static_cast<int>(r.kept.size());
      r.kept.push_back(d);
    }
  }
}

std::vector<int> nonzero_columns(const SparseMatrix& a) {
  std::vector<bool> seen(a.cols(), false);
  for (int r = 0; r < a.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) seen[it.col()] = true;
  }
  std::vector<int> cols;
  for (int c = 0; c < static_cast<int>(seen.size()); ++c) {
    if (seen[c]) cols.push_back(c);
  }
  return cols;
}

/// G^T D^{-1} G with each entry evaluated once and mirrored.
Eigen::MatrixXd symmetric_congruence(const Eigen::MatrixXd& g, const Vector& d) {
  const int n = static_cast<int>(g.cols());
  Eigen::MatrixXd s(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < g.rows(); ++k) acc += g(k, i) * g(k, j) / d[k];
      s(i, j) = acc;
      s(j, i) = acc;
    }
  }
  return s;
}

std::shared_ptr<const SparseFactorization> factor_eliminated(const SparseMatrix& a_ee, const std::vector<int>& dofs) {
  try {
    return std::make_shared<const SparseFactorization>(a_ee);
  } catch (const SolverError& e) {
    throw SolverError(std::string("eliminated block is singular (") + e.what() + "); eliminated cells: " + list_dofs(dofs));
  }
}

/// Checks the eliminated set against the coupling structure and collects branches.
std::vector<Branch> collect_branches(const GlobalSystem& sys, const ReducedSystem& r) {
  std::vector<bool> subdomain_has_kept(sys.subdomain_dims.size(), false);
  std::vector<bool> subdomain_has_elim(sys.subdomain_dims.size(), false);
  for (int d = 0; d < r.full_size; ++d) {
    (r.eliminated_index[d] >= 0 ? subdomain_has_elim : subdomain_has_kept)[sys.dof_subdomain[d]] = true;
  }
  for (std::size_t s = 0; s < sys.subdomain_dims.size(); ++s) {
    if (subdomain_has_kept[s] && subdomain_has_elim[s]) {
      throw AssemblyError("eliminated set must consist of whole subdomains (subdomain " + std::to_string(s) + " is split)");
    }
  }
  std::vector<Branch> branches;
  for (std::size_t k = 0; k < sys.pairs.size(); ++k) {
    const auto& p = sys.pairs[k];
    const bool hk = r.kept_index[p.higher_dof] >= 0;
    const bool lk = r.kept_index[p.lower_dof] >= 0;
    if (!hk && lk) {
      throw AssemblyError("eliminated cell " + std::to_string(p.higher_dof) + " couples to the kept lower-dimensional cell " +
                          std::to_string(p.lower_dof));
    }
    if (hk && !lk) branches.push_back({static_cast<int>(k), p.higher_dof, p.lower_dof, p.trans.t, p.trans.alpha_higher});
  }
  return branches;
}

/// Kept part of the internal matrix plus couplings between kept cells.
SparseMatrix kept_base_matrix(const GlobalSystem& sys, const ReducedSystem& r) {
  std::vector<Triplet> entries;
  for (int row = 0; row < sys.internal.outerSize(); ++row) {
    const int kr = r.kept_index[row];
    if (kr < 0) continue;
    for (SparseMatrix::InnerIterator it(sys.internal, row); it; ++it) {
      const int kc = r.kept_index[it.col()];
      if (kc >= 0) entries.emplace_back(kr, kc, it.value());
    }
  }
  const SparseMatrix wt = sys.w.transpose();  // pairs x dofs
  for (std::size_t k = 0; k < sys.pairs.size(); ++k) {
    const auto& p = sys.pairs[k];
    if (r.kept_index[p.higher_dof] < 0 || r.kept_index[p.lower_dof] < 0) continue;
    for (SparseMatrix::InnerIterator wi(wt, static_cast<int>(k)); wi; ++wi) {
      const int kr = r.kept_index[wi.col()];
      for (SparseMatrix::InnerIterator li(sys.lambda, static_cast<int>(k)); li; ++li) {
        entries.emplace_back(kr, r.kept_index[li.col()], wi.value() * li.value());
      }
    }
  }
  const int nk = static_cast<int>(r.kept.size());
  return assemble(nk, nk, entries);
}

/// Adds W_k M H for the branch matrix m of the reduced system.
SparseMatrix branch_contribution(const GlobalSystem& sys, const ReducedSystem& r) {
  const SparseMatrix wt = sys.w.transpose();
  std::vector<Triplet> entries;
  const int nb = static_cast<int>(r.branches.size());
  for (int b = 0; b < nb; ++b) {
    for (SparseMatrix::InnerIterator wi(wt, r.branches[b].pair); wi; ++wi) {
      const int kr = r.kept_index[wi.col()];
      if (kr < 0) continue;
      for (int c = 0; c < nb; ++c) {
        const double mbc = r.m(b, c);
        if (mbc != 0.0) entries.emplace_back(kr, r.kept_index[r.branches[c].kept_dof], wi.value() * mbc);
      }
    }
  }
  const int nk = static_cast<int>(r.kept.size());
  return assemble(nk, nk, entries);
}

}  // namespace

const char* to_string(EliminationMode mode) {
  switch (mode) {
    case EliminationMode::None:
      return "none";
    case EliminationMode::Schur:
      return "schur";
    case EliminationMode::StarDelta:
      return "star_delta";
  }
  return "none";
}

EliminationMode parse_elimination_mode(const std::string& text) {
  if (text == "none") return EliminationMode::None;
  if (text == "schur") return EliminationMode::Schur;
  if (text == "star_delta" || text == "star-delta") return EliminationMode::StarDelta;
  throw UsageError("unknown elimination mode '" + text + "' (expected none, schur or star_delta)");
}

std::vector<int> default_eliminated_set(const GlobalSystem& system, bool zero_d_only) {
  int top = 0;
  for (int d : system.subdomain_dims) top = std::max(top, d);
  std::vector<int> out;
  for (int dof = 0; dof < static_cast<int>(system.dof_subdomain.size()); ++dof) {
    const int d = system.subdomain_dims[system.dof_subdomain[dof]];
    if (zero_d_only ? d == 0 : d <= top - 2) out.push_back(dof);
  }
  return out;
}

Eigen::MatrixXd star_delta_matrix(const Vector& alpha) {
  const double sum = alpha.sum();
  if (sum == 0.0) throw AssemblyError("Star-Delta star with zero total transmissibility");
  const int n = static_cast<int>(alpha.size());
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = (i == j ? alpha[i] : 0.0) - alpha[i] * alpha[j] / sum;
  }
  return m;
}

ReducedSystem schur_reduce(const SparseMatrix& a, const Vector& b, const std::vector<int>& eliminated) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw AssemblyError("Schur reduction needs a square system");
  ReducedSystem r;
  r.tag = EliminationMode::Schur;
  partition(r, static_cast<int>(a.rows()), eliminated);
  const SparseMatrix a_kk = submatrix(a, r.kept, r.kept);
  const SparseMatrix a_ke = submatrix(a, r.kept, r.eliminated);
  r.a_ek = submatrix(a, r.eliminated, r.kept);
  r.b_e = Vector(static_cast<int>(r.eliminated.size()));
  for (std::size_t i = 0; i < r.eliminated.size(); ++i) r.b_e[static_cast<int>(i)] = b[r.eliminated[i]];
  Vector b_k(static_cast<int>(r.kept.size()));
  for (std::size_t i = 0; i < r.kept.size(); ++i) b_k[static_cast<int>(i)] = b[r.kept[i]];

  if (r.eliminated.empty()) {
    r.a_r = a_kk;
    r.b_r = b_k;
    r.a_ee = std::make_shared<const SparseFactorization>(SparseMatrix(0, 0));
    return r;
  }
  const SparseMatrix a_ee = submatrix(a, r.eliminated, r.eliminated);
  r.a_ee = factor_eliminated(a_ee, r.eliminated);

  const std::vector<int> cols = nonzero_columns(r.a_ek);
  Eigen::MatrixXd ek_dense = Eigen::MatrixXd::Zero(static_cast<int>(r.eliminated.size()), static_cast<int>(cols.size()));
  {
    std::vector<int> pos(r.kept.size(), -1);
    for (std::size_t j = 0; j < cols.size(); ++j) pos[cols[j]] = static_cast<int>(j);
    for (int row = 0; row < r.a_ek.outerSize(); ++row) {
      for (SparseMatrix::InnerIterator it(r.a_ek, row); it; ++it) ek_dense(row, pos[it.col()]) = it.value();
    }
  }

  std::vector<Triplet> fill;
  const bool symmetric = r.a_ee->uses_ldlt() && is_symmetric(a);
  if (symmetric) {
    const Eigen::MatrixXd z = r.a_ee->half_solve(ek_dense);
    const Eigen::MatrixXd s = symmetric_congruence(z, r.a_ee->pivots());
    for (std::size_t i = 0; i < cols.size(); ++i) {
      for (std::size_t j = 0; j < cols.size(); ++j) {
        if (s(i, j) != 0.0) fill.emplace_back(cols[i], cols[j], -s(i, j));
      }
    }
  } else {
    const Eigen::MatrixXd x = r.a_ee->solve(ek_dense);  // A_ee^{-1} A_ek restricted to coupled columns
    const std::vector<int> rows = nonzero_columns(SparseMatrix(a_ke.transpose()));
    const SparseMatrix a_ke_rows = submatrix(a_ke, rows, [&] {
      std::vector<int> all(r.eliminated.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
      return all;
    }());
    const Eigen::MatrixXd s = a_ke_rows * x;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < cols.size(); ++j) {
        if (s(i, j) != 0.0) fill.emplace_back(rows[i], cols[j], -s(i, j));
      }
    }
  }
  const int nk = static_cast<int>(r.kept.size());
  r.a_r = a_kk + assemble(nk, nk, fill);
  r.a_r.makeCompressed();
  r.b_r = b_k - a_ke * r.a_ee->solve(r.b_e);
  return r;
}

ReducedSystem schur_reduce(const GlobalSystem& system, const std::vector<int>& eliminated) {
  ReducedSystem r = schur_reduce(system.a, system.b, eliminated);
  r.branches = collect_branches(system, r);
  const int nb = static_cast<int>(r.branches.size());
  const int ne = static_cast<int>(r.eliminated.size());
  r.eliminated_branches.assign(ne, {});
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(ne, nb);
  Vector t(nb);
  for (int b = 0; b < nb; ++b) {
    const int e = r.eliminated_index[r.branches[b].eliminated_dof];
    c(e, b) = r.branches[b].t;
    t[b] = r.branches[b].t;
    r.eliminated_branches[e].push_back(b);
  }
  Eigen::MatrixXd ct_inv_c;
  if (ne == 0) {
    ct_inv_c = Eigen::MatrixXd::Zero(nb, nb);
    r.offset = Vector::Zero(nb);
  } else {
    if (r.a_ee->uses_ldlt() && is_symmetric(system.a)) {
      ct_inv_c = symmetric_congruence(r.a_ee->half_solve(c), r.a_ee->pivots());
    } else {
      ct_inv_c = c.transpose() * r.a_ee->solve(c);
    }
    r.offset = -(c.transpose() * r.a_ee->solve(r.b_e));
  }
  r.m = -ct_inv_c;
  for (int b = 0; b < nb; ++b) r.m(b, b) += t[b];
  return r;
}

ReducedSystem star_delta_reduce(const GlobalSystem& system, const std::vector<int>& eliminated) {
  ReducedSystem r;
  r.tag = EliminationMode::StarDelta;
  partition(r, system.num_dofs(), eliminated);
  r.branches = collect_branches(system, r);
  const int ne = static_cast<int>(r.eliminated.size());
  const int nb = static_cast<int>(r.branches.size());
  for (int e = 0; e < ne; ++e) {
    const int dof = r.eliminated[e];
    if (system.sources[dof] != 0.0) {
      throw AssemblyError("Star-Delta elimination does not support a source in eliminated cell " + std::to_string(dof) +
                          "; use Schur elimination");
    }
    if (system.boundary_rhs[dof] != 0.0) {
      throw AssemblyError("Star-Delta elimination does not support boundary data on eliminated cell " + std::to_string(dof));
    }
  }
  r.eliminated_branches.assign(ne, {});
  for (int b = 0; b < nb; ++b) r.eliminated_branches[r.eliminated_index[r.branches[b].eliminated_dof]].push_back(b);
  r.m = Eigen::MatrixXd::Zero(nb, nb);
  for (const auto& star : r.eliminated_branches) {
    if (star.empty()) continue;
    Vector alpha(static_cast<int>(star.size()));
    for (std::size_t i = 0; i < star.size(); ++i) alpha[static_cast<int>(i)] = r.branches[star[i]].alpha;
    const Eigen::MatrixXd ms = star_delta_matrix(alpha);
    for (std::size_t i = 0; i < star.size(); ++i) {
      for (std::size_t j = 0; j < star.size(); ++j) r.m(star[i], star[j]) = ms(static_cast<int>(i), static_cast<int>(j));
    }
  }
  r.offset = Vector::Zero(nb);
  r.a_r = kept_base_matrix(system, r) + branch_contribution(system, r);
  r.a_r.makeCompressed();
  r.b_r = Vector(static_cast<int>(r.kept.size()));
  for (std::size_t i = 0; i < r.kept.size(); ++i) r.b_r[static_cast<int>(i)] = system.b[r.kept[i]];
  r.b_e = Vector::Zero(ne);
  return r;
}

Vector solve_reduced(const ReducedSystem& reduced, SolveReport* report) {
  return direct_solve(reduced.a_r, reduced.b_r, report);
}

Vector back_substitute(const ReducedSystem& reduced, const Vector& p_kept) {
  if (p_kept.size() != static_cast<int>(reduced.kept.size())) throw AssemblyError("kept pressure size mismatch");
  Vector full = Vector::Zero(reduced.full_size);
  for (std::size_t i = 0; i < reduced.kept.size(); ++i) full[reduced.kept[i]] = p_kept[static_cast<int>(i)];
  const int ne = static_cast<int>(reduced.eliminated.size());
  if (ne == 0) return full;
  if (reduced.tag == EliminationMode::Schur) {
    const Vector pe = reduced.a_ee->solve(Vector(reduced.b_e - reduced.a_ek * p_kept));
    for (int i = 0; i < ne; ++i) full[reduced.eliminated[i]] = pe[i];
    return full;
  }
  std::vector<bool> known(ne, false);
  for (int e = 0; e < ne; ++e) {
    double num = 0.0;
    double den = 0.0;
    for (int b : reduced.eliminated_branches[e]) {
      num += reduced.branches[b].alpha * p_kept[reduced.kept_index[reduced.branches[b].kept_dof]];
      den += reduced.branches[b].alpha;
    }
    if (den != 0.0) {
      full[reduced.eliminated[e]] = num / den;
      known[e] = true;
    }
  }
  for (int e = 0; e < ne; ++e) {
    if (!known[e]) full[reduced.eliminated[e]] = std::numeric_limits<double>::quiet_NaN();
  }
  return full;
}

Vector restrict_to_kept(const ReducedSystem& reduced, const Vector& full) {
  Vector out(static_cast<int>(reduced.kept.size()));
  for (std::size_t i = 0; i < reduced.kept.size(); ++i) out[static_cast<int>(i)] = full[reduced.kept[i]];
  return out;
}

ReducedFlows reduced_fluxes(const ReducedSystem& reduced, const Vector& p_kept) {
  const int nb = static_cast<int>(reduced.branches.size());
  Vector pi(nb);
  for (int b = 0; b < nb; ++b) pi[b] = p_kept[reduced.kept_index[reduced.branches[b].kept_dof]];
  ReducedFlows out;
  out.branch_flux = reduced.m * pi + reduced.offset;
  Vector through = Vector::Zero(nb);
  for (int b = 0; b < nb; ++b) {
    for (int c = b + 1; c < nb; ++c) {
      const double mbc = 0.5 * (reduced.m(b, c) + reduced.m(c, b));
      if (mbc == 0.0) continue;
      const double f = -mbc * (pi[b] - pi[c]);
      through[b] += f;
      through[c] -= f;
      if (reduced.branches[b].kept_dof != reduced.branches[c].kept_dof) {
        out.pairwise.push_back({reduced.branches[b].kept_dof, reduced.branches[c].kept_dof, f});
      }
    }
  }
  for (int b = 0; b < nb; ++b) {
    const double s = out.branch_flux[b] - through[b];
    if (s != 0.0) out.external.push_back({reduced.branches[b].kept_dof, s});
  }
  return out;
}

LimitEquivalenceReport limit_equivalence_check(const std::function<GlobalSystem(double)>& build,
                                               const std::vector<int>& eliminated, double k_boost) {
  const GlobalSystem sys = build(k_boost);
  const ReducedSystem schur = schur_reduce(sys, eliminated);
  const ReducedSystem sd = star_delta_reduce(sys, eliminated);
  LimitEquivalenceReport rep;
  rep.k_boost = k_boost;
  const SparseMatrix diff = schur.a_r - sd.a_r;
  double dev = 0.0;
  double ref = 0.0;
  for (int r = 0; r < diff.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(diff, r); it; ++it) dev = std::max(dev, std::abs(it.value()));
  }
  for (int r = 0; r < sd.a_r.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(sd.a_r, r); it; ++it) ref = std::max(ref, std::abs(it.value()));
  }
  rep.max_entry_deviation = dev;
  rep.relative_deviation = ref > 0.0 ? dev / ref : dev;
  const Vector ps = solve_reduced(schur);
  const Vector pd = solve_reduced(sd);
  const double nrm = pd.norm();
  rep.pressure_difference = nrm > 0.0 ? (ps - pd).norm() / nrm : (ps - pd).norm();
  return rep;
}

}  // namespace fracfv
