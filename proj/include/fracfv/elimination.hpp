#pragma once

#include "fracfv/coupling.hpp"
#include "fracfv/linsolve.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace fracfv {

enum class EliminationMode { None, Schur, StarDelta };

const char* to_string(EliminationMode mode);
EliminationMode parse_elimination_mode(const std::string& text);

/// Coupling pair between a kept higher cell and an eliminated lower cell.
struct Branch {
  int pair = -1;
  int kept_dof = -1;
  int eliminated_dof = -1;
  double t = 0.0;
  double alpha = 0.0;  ///< higher-side half transmissibility
};

struct ReducedSystem {
  EliminationMode tag = EliminationMode::Schur;
  int full_size = 0;
  std::vector<int> kept;
  std::vector<int> eliminated;
  std::vector<int> kept_index;        ///< global dof -> position in kept, or -1
  std::vector<int> eliminated_index;  ///< global dof -> position in eliminated, or -1

  SparseMatrix a_r;
  Vector b_r;

  // Schur back-substitution data
  std::shared_ptr<const SparseFactorization> a_ee;
  SparseMatrix a_ek;
  Vector b_e;

  // Branch decomposition of the eliminated connections: the coupling flux of
  // branch b is (m * pi)_b + offset_b with pi the kept pressures of the branches.
  std::vector<Branch> branches;
  Eigen::MatrixXd m;
  Vector offset;
  std::vector<std::vector<int>> eliminated_branches;  ///< per eliminated position
};

/// Dofs of all subdomains of dimension <= N-2 (or only 0D with `zero_d_only`).
std::vector<int> default_eliminated_set(const GlobalSystem& system, bool zero_d_only = false);

/// Star-Delta transmissibility matrix diag(alpha) - alpha alpha^T / sum(alpha);
/// its off-diagonal entries are -alpha_i alpha_j / sum(alpha).
Eigen::MatrixXd star_delta_matrix(const Vector& alpha);

/// Algebraic Schur complement A_kk - A_ke A_ee^{-1} A_ek of an arbitrary
/// system. Symmetric input gives an exactly symmetric result.
ReducedSystem schur_reduce(const SparseMatrix& a, const Vector& b, const std::vector<int>& eliminated);

/// Schur reduction of a coupled system with branch decomposition for flux
/// reconstruction. `eliminated` must consist of whole subdomains that only
/// connect to kept cells from above.
ReducedSystem schur_reduce(const GlobalSystem& system, const std::vector<int>& eliminated);

/// Star-Delta elimination: each eliminated cell is replaced by direct
/// transmissibilities between its branches. Connections among eliminated
/// cells are dropped. Throws for sources in eliminated cells.
ReducedSystem star_delta_reduce(const GlobalSystem& system, const std::vector<int>& eliminated);

Vector solve_reduced(const ReducedSystem& reduced, SolveReport* report = nullptr);

/// Full field from kept pressures: A_ee^{-1}(b_e - A_ek p_k) for Schur, the
/// alpha-weighted branch mean for Star-Delta (NaN for eliminated cells
/// without kept branches).
Vector back_substitute(const ReducedSystem& reduced, const Vector& p_kept);

Vector restrict_to_kept(const ReducedSystem& reduced, const Vector& full);

struct PairwiseFlux {
  int from_dof = -1;
  int to_dof = -1;
  double flux = 0.0;  ///< positive from `from_dof` to `to_dof`
};

struct ExternalExchange {
  int dof = -1;
  double outflow = 0.0;  ///< flow leaving the kept cell through the eliminated region to sinks (negative: inflow from sources)
};

/// Direct fluxes between kept neighbours of the eliminated region.
struct ReducedFlows {
  Vector branch_flux;  ///< coupling flux of each branch
  std::vector<PairwiseFlux> pairwise;
  std::vector<ExternalExchange> external;
};

ReducedFlows reduced_fluxes(const ReducedSystem& reduced, const Vector& p_kept);

struct LimitEquivalenceReport {
  double k_boost = 0.0;
  double max_entry_deviation = 0.0;  ///< max |A_r(schur) - A_r(star-delta)|
  double relative_deviation = 0.0;   ///< max_entry_deviation / max |A_r(star-delta)|
  double pressure_difference = 0.0;  ///< ||p_schur - p_sd|| / ||p_sd|| over kept dofs
};

/// Rebuilds the system with intersection permeability scaled by `k_boost`
/// and compares its Schur reduction with the Star-Delta reduction.
LimitEquivalenceReport limit_equivalence_check(const std::function<GlobalSystem(double)>& build,
                                               const std::vector<int>& eliminated, double k_boost);

}  // namespace fracfv
