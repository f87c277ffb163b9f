#pragma once

// Distances, energies, counting expectations and the initial-data gate: the
// quantities appearing in the convergence statements.

#include <optional>
#include <vector>

#include "bogolab/fluctuations.hpp"
#include "bogolab/fock.hpp"
#include "bogolab/lattice.hpp"

namespace bogolab {

// sum of singular values of g - r
double trace_norm_distance(const Mat& g, const Mat& r);
// trace norm of sqrt_op (g - r) sqrt_op
double energy_trace_norm_distance(const Mat& g, const Mat& r, const RMat& sqrt_op);

// <Psi, q_1...q_n Psi> with respect to phi
double counting_expectation(const LatticeSpace& space, const ManyBodyState& psi,
                            const OneBodyField& phi, int n);

// <Psi, H^t Psi> / N with the per-particle pair weight
double energy_per_particle(const LatticeSpace& space, const PotentialSchedule& schedule,
                           const Interaction& vint, const ManyBodyState& psi, double t);

double energy_gap(const LatticeSpace& space, const PotentialSchedule& schedule,
                  const Interaction& vint, const ManyBodyState& psi0, const OneBodyField& phi0);

struct DistanceReport {
  double t = 0.0;
  double l2_full = 0.0;            // |Psi_t - Psi~_t|
  double trace_dist = 0.0;         // Tr|gamma^1 - |phi><phi||
  double energy_trace_dist = 0.0;  // with the sqrt(1 - Delta) weight
  double chi_l2_sq = 0.0;          // sum_k |chi~^k - chi^k|^2
  double counting1 = 0.0, counting2 = 0.0, counting3 = 0.0;
  double parity_even = 0.0, parity_odd = 0.0;  // norms on Psi~_t
};

struct AssumptionReport {
  double energy_gap = 0.0;
  double counting1 = 0.0, counting2 = 0.0, counting3 = 0.0;
  double odd_norm = 0.0;
  // fitted N-exponents when a sweep supplies several N (unset otherwise)
  std::optional<double> gap_exponent;
  std::optional<double> counting_exponent[3];
  std::optional<double> odd_exponent;
  bool pass_gap = false, pass_counting[3] = {false, false, false}, pass_odd = false;
};

AssumptionReport check_assumptions_A2(const LatticeSpace& space,
                                      const PotentialSchedule& schedule,
                                      const Interaction& vint, const ManyBodyState& psi0,
                                      const OneBodyField& phi0);

// sets pass flags from a sweep of single-N reports (needs >= 3 points)
AssumptionReport grade_assumptions_A2(const std::vector<int>& particle_numbers,
                                      const std::vector<AssumptionReport>& single_runs,
                                      double slack = 0.5);

DistanceReport make_distance_report(double t, const LatticeSpace& space,
                                    const ManyBodyState& psi, const ManyBodyState& psi_tilde,
                                    const OneBodyField& phi_t, const ExcitationVector& chi_bog);

}  // namespace bogolab
