#pragma once

// Exact N-boson sector over the lattice modes: occupation basis, sparse
// second quantization, H^t / H~^t assembly, time propagation, the full
// sector-projector / counting-operator calculus, and reduced densities.
//
// Many-body amplitudes are coefficients in the orthonormal occupation basis
// built over the weighted delta modes e_x / sqrt(a); the coefficient vector
// of a one-body field phi is c_phi = sqrt(a) * phi.  Operator matrices from
// lattice.hpp act on coefficient vectors unchanged.

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "bogolab/lattice.hpp"

namespace bogolab {

inline Vec coefficient_vector(const LatticeSpace& space, const OneBodyField& phi) {
  return std::sqrt(space.spacing) * phi.values;
}

// -- occupation basis --------------------------------------------------------

class FockBasis {
 public:
  static constexpr std::size_t kDefaultCap = 200000;

  // complete basis of `particles` bosons in `modes` modes, lexicographically
  // descending occupation order; throws when the dimension exceeds `cap`
  static std::shared_ptr<const FockBasis> make(int particles, int modes,
                                               std::size_t cap = kDefaultCap);

  int particles() const { return particles_; }
  int modes() const { return modes_; }
  int dim() const { return dim_; }
  std::span<const std::uint32_t> occ(int i) const {
    return {flat_.data() + static_cast<std::size_t>(i) * modes_,
            static_cast<std::size_t>(modes_)};
  }
  // index of an occupation vector, -1 if absent
  int find(std::span<const std::uint32_t> n) const;

  static std::size_t dimension_of(int particles, int modes);

 private:
  int particles_ = 0, modes_ = 0, dim_ = 0;
  std::vector<std::uint32_t> flat_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

// sector bases k = 0..k_max over a fixed mode count, built lazily
class SectorBases {
 public:
  SectorBases(int modes, int k_max);
  const BasisPtr& at(int k) const { return bases_.at(k); }
  int k_max() const { return static_cast<int>(bases_.size()) - 1; }
  void extend(int k_max);
  int modes() const { return modes_; }
  // target index of occ(s) + e_u in sector k+1, flattened (s * modes + u);
  // references stay valid across later extend/creation_map calls
  const std::vector<std::int32_t>& creation_map(int k);

 private:
  int modes_;
  std::vector<BasisPtr> bases_;
  std::deque<std::vector<std::int32_t>> creation_maps_;
};

struct ManyBodyState {
  BasisPtr basis;
  Vec amplitudes;

  double norm() const { return amplitudes.norm(); }
};

// product state phi^{(x) N}
ManyBodyState product_state(const LatticeSpace& space, const OneBodyField& phi,
                            const BasisPtr& basis);

// -- second quantization -----------------------------------------------------

// dGamma(A) + lambda * sum_{i<j} V_ij with cached transition structure; the
// kernels can be refreshed in place each time step without re-sorting.
class SecondQuantizedOp {
 public:
  SecondQuantizedOp(BasisPtr basis, bool with_two_body);

  // A is M x M; V is M^2 x M^2 on the composite index x*M + y and must be
  // exchange symmetric (S V S = V); throws otherwise
  void set_one_body(const Mat& A);
  void set(const Mat& A, const Mat& V, double lambda);

  Vec apply(const Vec& v) const;
  Mat dense() const;
  double op_norm_bound() const;  // max row 1-norm
  const BasisPtr& basis() const { return basis_; }

 private:
  void refresh();
  BasisPtr basis_;
  bool two_body_;
  std::vector<Complex> kernel_;  // [A entries | lambda * V entries]
  struct Contribution {
    std::int32_t slot;
    std::int32_t kernel_index;
    double weight;
  };
  std::vector<Contribution> contributions_;
  std::vector<std::int64_t> row_start_;  // CSR over rows (targets)
  std::vector<std::int32_t> col_;
  std::vector<Complex> val_;
};

Mat dense_one_body_operator(const Mat& A, const BasisPtr& basis);
Mat dense_two_body_operator(const Mat& V, const BasisPtr& basis);

// a^dag(f), a(f) between adjacent sectors (f given in coefficient convention)
Vec apply_creation(const Vec& f, const Vec& in, const FockBasis& from, const FockBasis& to);
Vec apply_annihilation(const Vec& f, const Vec& in, const FockBasis& from, const FockBasis& to);
// single-mode a_x
Vec apply_annihilation_mode(int x, const Vec& in, const FockBasis& from, const FockBasis& to);

// -- exact basis change ------------------------------------------------------

// Amplitudes of the same state over a different set of modes.  Column j of
// `mode_coords` holds the j-th source mode expressed in target-mode
// coordinates (target mode count may differ; the matrix must be an isometry).
// Built by creation-operator chains, exact up to roundoff.
Vec fock_basis_change(const Vec& in, const FockBasis& source, const Mat& mode_coords,
                      SectorBases& target_sectors);

// unitary M x M with first column = c_phi (deterministic Householder complement)
Mat condensate_frame(const LatticeSpace& space, const OneBodyField& phi);

// -- sector calculus ---------------------------------------------------------

// weight function f : {0..N} -> R>=0 with the shift (tau_d f)(k) = f(k+d),
// zero-padded outside [0, N]
struct WeightFunction {
  RVec values;

  WeightFunction shifted(int d) const;
  static WeightFunction m_weight(int N);   // k/N
  static WeightFunction n_weight(int N);   // sqrt(k/N)
  static WeightFunction mu_weight(int N);  // N/k, 0 at k=0
  static WeightFunction nu_weight(int N);  // sqrt(N/k), 0 at k=0
  static WeightFunction parity(int N, bool odd);
};

// resolution of a state into the P_{N,k} sectors of a condensate phi
struct SectorResolution {
  // chi[k]: k-boson amplitudes over the M lattice modes, orthogonal to phi in
  // every slot; the n_phi = N-k slice of the state in the rotated frame
  std::vector<Vec> chi;
  std::vector<double> weights;  // |P_{N,k} Psi|^2 = |chi[k]|^2
  std::shared_ptr<SectorBases> sectors;
};

class SectorCalculus {
 public:
  SectorCalculus(const LatticeSpace& space, const OneBodyField& phi, BasisPtr basis);

  SectorResolution resolve(const ManyBodyState& psi) const;
  ManyBodyState sector_project(int k, const ManyBodyState& psi) const;
  ManyBodyState apply_weight(const WeightFunction& f, const ManyBodyState& psi) const;
  std::pair<ManyBodyState, ManyBodyState> parity_split(const ManyBodyState& psi) const;
  // <Psi, q_1...q_n Psi> via sector weights and exchange symmetry
  double counting_expectation(const ManyBodyState& psi, int n) const;

  // rebuild an N-boson state from sector components (inverse of resolve)
  ManyBodyState assemble(const std::vector<Vec>& chi) const;

  const Mat& frame() const { return frame_; }
  const LatticeSpace& space() const { return space_; }

 private:
  Vec to_rotated(const Vec& amplitudes) const;
  Vec from_rotated(const Vec& rotated) const;

  LatticeSpace space_;
  OneBodyField phi_;
  BasisPtr basis_;
  Mat frame_;  // [c_phi | complement]
  mutable SectorBases full_sectors_;     // over M modes
  mutable SectorBases rotated_sectors_;  // over M-1 complement modes
};

// -- hamiltonians ------------------------------------------------------------

double lambda_coupling(int N);  // 1/(N-1); rejects N < 2

class FullHamiltonian {
 public:
  FullHamiltonian(const LatticeSpace& space, const PotentialSchedule& schedule,
                  const Interaction& vint, BasisPtr basis);
  void prepare(double t);
  Vec apply(const Vec& v) const { return op_.apply(v); }
  bool static_on(double t0, double t1) const { return schedule_.static_on(t0, t1); }
  const SecondQuantizedOp& op() const { return op_; }

 private:
  LatticeSpace space_;
  PotentialSchedule schedule_;
  Interaction vint_;
  Mat v2_;
  SecondQuantizedOp op_;
};

class HartreeTrajectory;  // hartree.hpp

class TildeHamiltonian {
 public:
  TildeHamiltonian(const LatticeSpace& space, const PotentialSchedule& schedule,
                   const Interaction& vint, BasisPtr basis, const HartreeTrajectory& traj);
  void prepare(double t);  // pulls phi_t from the shared-clock trajectory
  Vec apply(const Vec& v) const { return op_.apply(v); }
  const SecondQuantizedOp& op() const { return op_; }

 private:
  LatticeSpace space_;
  PotentialSchedule schedule_;
  Interaction vint_;
  const HartreeTrajectory* traj_;
  SecondQuantizedOp op_;
};

// -- propagation & ground state ----------------------------------------------

struct PropagationStats {
  double max_norm_drift = 0.0;  // per step, pre-correction
  int max_krylov_dim = 0;
  long krylov_refinements = 0;
  long steps = 0;
};

struct PropagationOptions {
  double krylov_tol = 1e-12;
  int krylov_max_dim = 40;
  int max_refine_depth = 8;
  int dense_cutoff = 512;  // dense exponential for static generators up to this size
};

// advance psi from t0 to t1 with midpoint-frozen exponential steps
// exp(-i dt H(t + dt/2)); `prepare` assembles the generator at the requested
// time, `apply` applies it.  `on_step(t)` fires after each accepted step.
void propagate(Vec& psi, const std::function<void(double)>& prepare,
               const std::function<Vec(const Vec&)>& apply, int dim, bool generator_static,
               double t0, double t1, double dt, const PropagationOptions& opts,
               PropagationStats& stats,
               const std::function<void(double, const Vec&)>& on_step = {});

struct GroundStateResult {
  double energy = 0.0;
  Vec state;
  double residual = 0.0;
  int iterations = 0;
};

// lowest eigenpair; dense up to opts.dense_cutoff, else Lanczos with full
// reorthogonalization; residual |H psi - E psi| < tol enforced
GroundStateResult ground_state(const std::function<Vec(const Vec&)>& apply, int dim,
                               double tol = 1e-8, int max_iter = 5000);

// -- reduced densities -------------------------------------------------------

// trace-1 k-body reduced density as an operator matrix (k <= 2)
Mat reduced_density(const ManyBodyState& psi, int k);

}  // namespace bogolab
