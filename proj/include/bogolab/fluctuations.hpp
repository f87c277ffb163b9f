#pragma once

// Excitation picture around a condensate: decomposition of N-body states
// into k-body correlation amplitudes, symmetric reconstruction, the
// N-independent Bogoliubov hierarchy, the exact finite hierarchy of the H~
// flow, and the (gamma, alpha) pair equations.
//
// Each chi[k] is stored as a k-boson occupation amplitude vector over the M
// lattice modes (the isometric compression of a symmetric k-index array);
// slot-orthogonality to phi means zero condensate-mode content.

#include <functional>
#include <memory>
#include <vector>

#include "bogolab/fock.hpp"
#include "bogolab/hartree.hpp"
#include "bogolab/lattice.hpp"

namespace bogolab {

struct ExcitationVector {
  OneBodyField phi;  // reference condensate
  std::shared_ptr<SectorBases> sectors;
  std::vector<Vec> chi;  // k = 0..k_max

  int k_max() const { return static_cast<int>(chi.size()) - 1; }
  double total_norm_sq() const;
  // max_k |a(phi) chi[k]|, the q-projection defect
  double slot_orthogonality_defect(const LatticeSpace& space) const;
};

ExcitationVector vacuum_excitation(const LatticeSpace& space, const OneBodyField& phi,
                                   int k_max);

// sum_k |chi[k] - other.chi[k]|^2 over the union of sectors
double excitation_distance_sq(const ExcitationVector& a, const ExcitationVector& b);

// symmetric 2-index array <-> occupation amplitudes for k = 2
Mat chi2_as_matrix(const Vec& amplitudes, const FockBasis& basis2);
Vec chi2_from_matrix(const Mat& array, const FockBasis& basis2);

struct CorrelationPair {
  Mat gamma;  // hermitian, PSD
  Mat alpha;  // symmetric
};

// -- decomposition -----------------------------------------------------------

ExcitationVector excitation_decompose(const LatticeSpace& space, const ManyBodyState& psi,
                                      const OneBodyField& phi);

// inverse of excitation_decompose on its range; isometric; rejects
// slot-orthogonality defects above 1e-6
ManyBodyState symmetric_reconstruct(const LatticeSpace& space, const ExcitationVector& chi,
                                    int particles);

// -- right-hand sides --------------------------------------------------------

// i d/dt chi = HBog chi truncated at k_max:  per sector
//   dGamma(h + K1) chi[k] + Cre(K2) chi[k-2] + Cre(K2)^dag chi[k+2]
// with Cre(K) = (1/2) sum K_xy adag_x adag_y.
ExcitationVector bogoliubov_rhs(const LatticeSpace& space, const ExcitationVector& chi,
                                const BogoliubovKernels& kernels, const Mat& h_phi);

// exact image of the H~ flow (k_max = N):
//   dGamma(h) + (N-k)/(N-1) dGamma(K1), creation weight sqrt((N-k+2)(N-k+1))/(N-1),
//   annihilation weight sqrt((N-k)(N-k-1))/(N-1)
ExcitationVector finite_hierarchy_rhs(const LatticeSpace& space, const ExcitationVector& chi,
                                      int particles, const BogoliubovKernels& kernels,
                                      const Mat& h_phi);

// pair equations (h := h^{t,phi} + K1):
//   i d/dt gamma = h gamma - gamma h + K2 conj(alpha) - alpha conj(K2)
//   i d/dt alpha = h alpha + alpha h^T + K2 + K2 gamma^T + gamma K2
CorrelationPair pair_rhs(const CorrelationPair& pair, const BogoliubovKernels& kernels,
                         const Mat& h_phi);

CorrelationPair correlations_from_chi(const ExcitationVector& chi);

// |alpha conj(alpha) - gamma (1 + gamma)|_F, zero along pure quasi-free flows
double pair_purity_defect(const CorrelationPair& pair);

// -- integrators (RK4 on the shared half-step clock) -------------------------

struct HierarchyOptions {
  int k_max = 8;
  int k_max_cap = 14;
  double tail_grow_threshold = 1e-10;  // grow k_max while tail exceeds this
  double tail_abort = 1e-6;            // hard failure when tail exceeds this at the cap
  bool finite_n = false;               // integrate the exact finite hierarchy
  int particles = 0;                   // required when finite_n
};

struct HierarchyRun {
  ExcitationVector chi;
  int final_k_max = 0;
  double max_tail = 0.0;                   // max over steps of |chi[k_max]|^2
  double max_orthogonality_defect = 0.0;   // post-reprojection
  double max_norm_drift = 0.0;
};

HierarchyRun evolve_hierarchy(const LatticeSpace& space, const PotentialSchedule& schedule,
                              const Interaction& vint, const HartreeTrajectory& traj,
                              ExcitationVector chi0, double t0, double t1, double dt,
                              const HierarchyOptions& opts,
                              const std::function<void(double, const ExcitationVector&)>&
                                  on_step = {});

struct PairRun {
  CorrelationPair pair;
  double max_hermiticity_defect = 0.0;
};

PairRun evolve_pair(const LatticeSpace& space, const PotentialSchedule& schedule,
                    const Interaction& vint, const HartreeTrajectory& traj,
                    CorrelationPair pair0, double t0, double t1, double dt,
                    const std::function<void(double, const CorrelationPair&)>& on_step = {});

}  // namespace bogolab
