#pragma once

// Periodic 1-D one-body discretization and every one-body operator derived
// from a condensate field: potentials, convolutions, projectors, Bogoliubov
// kernels, sqrt(1 - laplacian).
//
// Conventions used throughout the code base:
//   * L2 inner products carry the quadrature weight a:  <f,g> = a sum conj(f) g.
//   * Integral kernels K(x,y) are stored with one factor of a folded in, so a
//     plain matrix-vector product approximates the integral operator.
//   * Multiplication and difference operators (W, v*|phi|^2, -laplacian) act
//     entrywise / by plain matvec, no extra weight.
// With a uniform weight, hermiticity and spectra of the stored matrices agree
// with those of the operators they represent.

#include <complex>
#include <memory>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bogolab {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr Complex kI{0.0, 1.0};

struct LatticeSpace {
  int sites = 0;         // M
  double length = 0.0;   // L
  double spacing = 0.0;  // a = L/M
  RMat laplacian;        // -Delta, periodic 3-point stencil; positive semidefinite

  static LatticeSpace ring(int sites, double length);

  int wrap(int j) const {
    int m = j % sites;
    return m < 0 ? m + sites : m;
  }

  // chord distance on the ring for a site displacement d
  double ring_distance(int d) const {
    int m = wrap(d);
    return spacing * std::min(m, sites - m);
  }

  Complex inner(const Vec& f, const Vec& g) const { return spacing * f.dot(g); }
  double norm(const Vec& f) const { return std::sqrt(spacing) * f.norm(); }

  // closed-form stencil spectrum 2(1 - cos(2 pi k / M)) / a^2
  double laplacian_eig(int k) const;
  double laplacian_eig_max() const;
};

// Normalized complex field on the lattice, a * sum |phi|^2 = 1.
struct OneBodyField {
  Vec values;

  double norm_defect(const LatticeSpace& space) const {
    return std::abs(space.norm(values) - 1.0);
  }
  static OneBodyField normalized(const LatticeSpace& space, Vec values);
};

// W^t = switch(t) * W0 with a cubic switch-off ramp over [0, tau].
// tau <= 0 means the trap stays on (static potential).
struct PotentialSchedule {
  RVec profile;      // W0
  double tau = 0.0;  // switch-off duration

  double switch_factor(double t) const;
  double switch_rate(double t) const;  // d/dt switch_factor
  RVec potential_at(double t) const { return switch_factor(t) * profile; }
  bool static_on(double t0, double t1) const;

  static PotentialSchedule harmonic_quench(const LatticeSpace& space, double amplitude,
                                           double tau);
};

enum class InteractionKind { SoftCoulomb, Gaussian, Contact, Constant };

InteractionKind interaction_kind_from_string(const std::string& s);
std::string to_string(InteractionKind k);

// Real even pair potential indexed by lattice displacement, v(-x) = v(x)
// under periodic wrap.  The discrete analogue of v^2 <= C (1 - Delta) is
// recorded at construction and asserted.
struct Interaction {
  InteractionKind kind = InteractionKind::Constant;
  RVec v;                        // displacement-indexed values
  double bound_constant = 0.0;   // C with max v^2 <= C (1 + lambda_max(-Delta))

  static Interaction make(const LatticeSpace& space, InteractionKind kind, double strength,
                          double epsilon);
  double operator()(int displacement, const LatticeSpace& space) const {
    return v[space.wrap(displacement)];
  }
};

// q K~1 q and (q x q) K~2, both carrying one quadrature weight so matvecs
// approximate the corresponding integral operators.
struct BogoliubovKernels {
  Mat K1;  // hermitian, K1 phi = 0
  Mat K2;  // symmetric (K2 = K2^T), phi-contraction vanishes in both slots
};

// -- one-body assembly ------------------------------------------------------

// h^t = -Delta + diag(W^t)
Mat assemble_one_body(const LatticeSpace& space, const PotentialSchedule& schedule, double t);

// (v * |phi|^2)(x), discrete circular convolution with weight a
RVec mean_field_potential(const LatticeSpace& space, const Interaction& vint,
                          const OneBodyField& phi);

// mu^phi = (a/2) sum_x (v * |phi|^2)(x) |phi(x)|^2
double chemical_phase(const LatticeSpace& space, const Interaction& vint,
                      const OneBodyField& phi);

// h^{t,phi} = h^t + diag(v * |phi|^2) - mu^phi
Mat hartree_hamiltonian(const LatticeSpace& space, const PotentialSchedule& schedule,
                        const Interaction& vint, const OneBodyField& phi, double t);

// p = |phi><phi| (with weight), q = 1 - p; rejects unnormalized phi
struct Projectors {
  Mat p, q;
};
Projectors condensate_projectors(const LatticeSpace& space, const OneBodyField& phi);

BogoliubovKernels bogoliubov_kernels(const LatticeSpace& space, const Interaction& vint,
                                     const OneBodyField& phi);

// principal square root of 1 + (-Delta)
RMat sqrt_one_minus_laplacian(const LatticeSpace& space);

// -- two-body kernels on the composite index (x1*M + x2) --------------------

// A (x) B acting slot-wise
Mat kron2(const Mat& a, const Mat& b);
// slot exchange S
Mat exchange_swap(int modes);
// multiplication by v(x1 - x2), diagonal
Mat two_body_multiplication(const LatticeSpace& space, const Interaction& vint);

// exchange-symmetric kernel of the H~ pair term:
//   (p x q) v (q x p) + (p x p) v (q x q) + h.c.
Mat tilde_pair_kernel(const LatticeSpace& space, const Interaction& vint,
                      const OneBodyField& phi);

// exchange-symmetric kernel W with H - H~ = lambda_N sum_{i<j} W_ij:
//   (p x q)(v - vbar_1)(q x q) + (q x p)(v - vbar_2)(q x q) + h.c.
//   + (q x q)(v - vbar_1 - vbar_2 + 2 mu)(q x q)
// every term carries at least three q's
Mat difference_pair_kernel(const LatticeSpace& space, const Interaction& vint,
                           const OneBodyField& phi);

}  // namespace bogolab
