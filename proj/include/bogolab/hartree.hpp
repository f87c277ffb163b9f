#pragma once

// Time-dependent Hartree equation i d/dt phi = h^{t,phi} phi with the
// chemical-phase convention, integrated by classic RK4 with per-step
// renormalization.  The trajectory is stored on a uniform half-step grid so
// that the many-body and fluctuation flows can pull bitwise-identical
// condensate snapshots at step midpoints (shared clock).

#include <vector>

#include "bogolab/lattice.hpp"

namespace bogolab {

Vec hartree_rhs(const LatticeSpace& space, const PotentialSchedule& schedule,
                const Interaction& vint, const OneBodyField& phi, double t);

double hartree_energy(const LatticeSpace& space, const PotentialSchedule& schedule,
                      const Interaction& vint, const OneBodyField& phi, double t);

class HartreeTrajectory {
 public:
  HartreeTrajectory(const LatticeSpace& space, double t0, double dt_store,
                    std::vector<Vec> fields, double max_renorm_defect);

  double t0() const { return t0_; }
  double t1() const { return t0_ + dt_store_ * (static_cast<double>(fields_.size()) - 1); }
  double grid_step() const { return dt_store_; }
  double max_renorm_defect() const { return max_renorm_defect_; }

  // snapshot at a grid time; throws when t is off the stored grid
  OneBodyField field_at(double t) const;

 private:
  LatticeSpace space_;
  double t0_;
  double dt_store_;  // half of the caller's dt
  std::vector<Vec> fields_;
  double max_renorm_defect_;
};

// integrate over [0, t1]; fields stored every dt/2 (dt is also the RK4 step
// of the many-body flows that consume the trajectory)
HartreeTrajectory evolve_hartree(const LatticeSpace& space, const PotentialSchedule& schedule,
                                 const Interaction& vint, const OneBodyField& phi0, double t1,
                                 double dt, bool with_phase = true);

// self-consistent minimizer of the Hartree functional at t = 0 (trap on)
OneBodyField hartree_minimizer(const LatticeSpace& space, const PotentialSchedule& schedule,
                               const Interaction& vint, int max_iter = 20000,
                               double tol = 1e-13);

// ground state of the one-body operator h^0 = -Delta + W^0
OneBodyField one_body_ground_state(const LatticeSpace& space, const PotentialSchedule& schedule);

}  // namespace bogolab
