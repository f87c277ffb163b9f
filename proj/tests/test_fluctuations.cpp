#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "bogolab/fluctuations.hpp"

using namespace bogolab;

namespace {

Vec random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = Complex{g(rng), g(rng)};
  return v / v.norm();
}

OneBodyField random_field(std::mt19937_64& rng, const LatticeSpace& space) {
  return OneBodyField::normalized(space, random_unit(rng, space.sites));
}

// a normalized one-body field orthogonal to phi
Vec orthogonal_field(std::mt19937_64& rng, const LatticeSpace& space, const OneBodyField& phi) {
  Vec psi = random_unit(rng, space.sites);
  psi -= space.inner(phi.values, psi) * phi.values;
  return psi / space.norm(psi);
}

struct Setup {
  LatticeSpace space = LatticeSpace::ring(4, 4.0);
  PotentialSchedule none{RVec::Zero(4), 0.0};
  Interaction vint = Interaction::make(space, InteractionKind::SoftCoulomb, 1.0, 1.0);
};

}  // namespace

TEST_CASE("excitation decomposition") {
  Setup s;
  std::mt19937_64 rng(3);
  const OneBodyField phi = random_field(rng, s.space);
  const int n = 4;
  const auto basis = FockBasis::make(n, s.space.sites);

  SUBCASE("condensate maps to the vacuum") {
    const ManyBodyState psi = product_state(s.space, phi, basis);
    const ExcitationVector chi = excitation_decompose(s.space, psi, phi);
    CHECK(std::abs(std::abs(chi.chi[0][0]) - 1.0) < 1e-12);
    for (int k = 1; k <= n; ++k) CHECK(chi.chi[k].norm() < 1e-12);
  }
  SUBCASE("one excitation lands in chi[1] with the excited mode") {
    const Vec psi_mode = orthogonal_field(rng, s.space, phi);
    // build phi^{N-1} (x)_s psi by reconstruction from chi[1] = psi and
    // cross-check against the first-quantized symmetric product for N = 2
    ExcitationVector chi = vacuum_excitation(s.space, phi, 2);
    chi.chi[0][0] = 0.0;
    chi.chi[1] = std::sqrt(s.space.spacing) * psi_mode;
    const ManyBodyState two = symmetric_reconstruct(s.space, chi, 2);
    CHECK(std::abs(two.norm() - 1.0) < 1e-12);
    // first-quantized oracle: F(x,y) = (phi(x)psi(y) + psi(x)phi(y))/sqrt(2)
    // with occupation amplitudes sqrt(2) F(x,y) off-diagonal and F(x,x) on it
    const Vec cphi = coefficient_vector(s.space, phi);
    const Vec cpsi = std::sqrt(s.space.spacing) * psi_mode;
    const auto b2 = FockBasis::make(2, s.space.sites);
    Vec expected = Vec::Zero(b2->dim());
    std::vector<std::uint32_t> occ(s.space.sites);
    for (int x = 0; x < s.space.sites; ++x)
      for (int y = x; y < s.space.sites; ++y) {
        std::fill(occ.begin(), occ.end(), 0);
        occ[x] += 1;
        occ[y] += 1;
        const Complex f = (cphi[x] * cpsi[y] + cpsi[x] * cphi[y]) / std::sqrt(2.0);
        expected[b2->find(occ)] = (x == y) ? f : std::sqrt(2.0) * f;
      }
    CHECK((two.amplitudes - expected).norm() < 1e-12);
    // decomposition returns chi[1] = psi
    const ExcitationVector back = excitation_decompose(s.space, two, phi);
    CHECK((back.chi[1] - cpsi).norm() < 1e-12);
    CHECK(back.chi[0].norm() < 1e-13);
    CHECK(back.chi[2].norm() < 1e-13);
  }
  SUBCASE("round trip is the identity and isometric") {
    const ManyBodyState psi{basis, random_unit(rng, basis->dim())};
    const ExcitationVector chi = excitation_decompose(s.space, psi, phi);
    CHECK(std::abs(chi.total_norm_sq() - 1.0) < 1e-12);
    CHECK(chi.slot_orthogonality_defect(s.space) < 1e-12);
    const ManyBodyState back = symmetric_reconstruct(s.space, chi, n);
    CHECK((back.amplitudes - psi.amplitudes).norm() < 1e-12);
  }
  SUBCASE("reconstruct rejects non-orthogonal data") {
    ExcitationVector chi = vacuum_excitation(s.space, phi, 2);
    chi.chi[1] = coefficient_vector(s.space, phi);  // pure condensate content
    CHECK_THROWS_AS(symmetric_reconstruct(s.space, chi, 3), std::invalid_argument);
  }
}

TEST_CASE("bogoliubov right-hand side") {
  Setup s;
  std::mt19937_64 rng(7);
  const OneBodyField phi = random_field(rng, s.space);
  const Mat h = hartree_hamiltonian(s.space, s.none, s.vint, phi, 0.0);
  const BogoliubovKernels kernels = bogoliubov_kernels(s.space, s.vint, phi);

  SUBCASE("zero kernels decouple the sectors") {
    BogoliubovKernels zero{Mat::Zero(4, 4), Mat::Zero(4, 4)};
    ExcitationVector chi = vacuum_excitation(s.space, phi, 3);
    chi.chi[1] = Vec::Random(4);
    const ExcitationVector rhs = bogoliubov_rhs(s.space, chi, zero, h);
    // sector 1 evolves by the one-body generator alone
    CHECK((rhs.chi[1] - (-kI) * (h * chi.chi[1])).norm() < 1e-12);
    CHECK(rhs.chi[0].norm() < 1e-14);
    CHECK(rhs.chi[2].norm() < 1e-14);
    CHECK(rhs.chi[3].norm() < 1e-14);
  }
  SUBCASE("one Euler step from the vacuum fills chi[2] with -i dt K2 / sqrt(2)") {
    ExcitationVector chi = vacuum_excitation(s.space, phi, 4);
    const ExcitationVector rhs = bogoliubov_rhs(s.space, chi, kernels, h);
    const double dt = 1e-4;
    const Mat chi2 = chi2_as_matrix(Vec(dt * rhs.chi[2]), *chi.sectors->at(2));
    const Mat expected = -kI * dt / std::sqrt(2.0) * kernels.K2;
    CHECK((chi2 - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(rhs.chi[1].norm() < 1e-14);
    CHECK(rhs.chi[3].norm() < 1e-14);
    // and the small-dt integration agrees with the Euler step at O(dt^2)
    const OneBodyField phi0 = one_body_ground_state(s.space, s.none);
    const auto traj = evolve_hartree(s.space, s.none, s.vint, phi0, dt, dt);
    const BogoliubovKernels k0 = bogoliubov_kernels(s.space, s.vint, phi0);
    HierarchyOptions opts;
    opts.k_max = 4;
    const auto run = evolve_hierarchy(s.space, s.none, s.vint, traj,
                                      vacuum_excitation(s.space, phi0, 4), 0.0, dt, dt, opts);
    const Mat got = chi2_as_matrix(run.chi.chi[2], *run.chi.sectors->at(2));
    CHECK((got - (-kI * dt / std::sqrt(2.0) * k0.K2)).cwiseAbs().maxCoeff() < 10 * dt * dt);
  }
  SUBCASE("generator is hermitian below the truncation cut") {
    ExcitationVector chi = vacuum_excitation(s.space, phi, 6);
    for (int k = 1; k <= 4; ++k) chi.chi[k] = Vec::Random(chi.sectors->at(k)->dim());
    // top two sectors stay empty so the cut is inactive
    const ExcitationVector rhs = bogoliubov_rhs(s.space, chi, kernels, h);
    Complex acc = 0.0;
    for (int k = 0; k <= 6; ++k) acc += chi.chi[k].dot(rhs.chi[k]);
    CHECK(std::abs(std::real(acc)) < 1e-10);
  }
}

TEST_CASE("hierarchy evolution") {
  Setup s;
  const PotentialSchedule trap = PotentialSchedule::harmonic_quench(s.space, 1.0, 0.1);
  const OneBodyField phi0 = one_body_ground_state(s.space, trap);

  SUBCASE("free case conserves the norm exactly and stays one-body") {
    const Interaction zero = Interaction::make(s.space, InteractionKind::Constant, 0.0, 1.0);
    const auto traj = evolve_hartree(s.space, trap, zero, phi0, 0.3, 1e-3);
    std::mt19937_64 rng(11);
    ExcitationVector chi0 = vacuum_excitation(s.space, phi0, 4);
    chi0.chi[1] = orthogonal_field(rng, s.space, phi0) * std::sqrt(s.space.spacing) * 0.5;
    chi0.chi[0][0] = std::sqrt(1.0 - chi0.chi[1].squaredNorm());
    HierarchyOptions opts;
    opts.k_max = 4;
    const auto run =
        evolve_hierarchy(s.space, trap, zero, traj, chi0, 0.0, 0.3, 1e-3, opts);
    CHECK(run.max_norm_drift < 1e-10);
    CHECK(run.chi.chi[2].norm() < 1e-12);
    CHECK(run.max_orthogonality_defect < 1e-10);
  }
  SUBCASE("vacuum start: |chi2| grows at rate |K2|_F / sqrt(2)") {
    const auto traj = evolve_hartree(s.space, trap, s.vint, phi0, 0.02, 1e-3);
    HierarchyOptions opts;
    opts.k_max = 6;
    const BogoliubovKernels k0 = bogoliubov_kernels(s.space, s.vint, phi0);
    const double t = 0.02;
    const auto run = evolve_hierarchy(s.space, trap, s.vint, traj,
                                      vacuum_excitation(s.space, phi0, opts.k_max), 0.0, t,
                                      1e-3, opts);
    const double slope = run.chi.chi[2].norm() / t;
    CHECK(slope == doctest::Approx(k0.K2.norm() / std::sqrt(2.0)).epsilon(0.02));
  }
  SUBCASE("insufficient truncation is reported, orthogonality is enforced") {
    const auto traj = evolve_hartree(s.space, trap, s.vint, phi0, 0.3, 1e-3);
    HierarchyOptions tiny;
    tiny.k_max = 2;
    tiny.k_max_cap = 2;       // no room to grow
    tiny.tail_abort = 1e-10;  // the pair sector alone exceeds this immediately
    CHECK_THROWS_WITH_AS(
        static_cast<void>(evolve_hierarchy(s.space, trap, s.vint, traj,
                                           vacuum_excitation(s.space, phi0, 2), 0.0, 0.3, 1e-3,
                                           tiny)),
        doctest::Contains("increase k_max"), std::runtime_error);
    ExcitationVector bad = vacuum_excitation(s.space, phi0, 3);
    bad.chi[1] = coefficient_vector(s.space, phi0);  // condensate content
    HierarchyOptions opts;
    opts.k_max = 3;
    CHECK_THROWS_AS(static_cast<void>(evolve_hierarchy(s.space, trap, s.vint, traj,
                                                       std::move(bad), 0.0, 0.1, 1e-3, opts)),
                    std::invalid_argument);
  }
  SUBCASE("truncation self-convergence in k_max") {
    // the adaptive sufficiency point for this scenario is k_max ~ 8-10
    // (tail below 1e-10); doubling beyond it moves the state by < 1e-8
    const auto traj = evolve_hartree(s.space, trap, s.vint, phi0, 0.4, 1e-3);
    HierarchyOptions lo, hi;
    lo.k_max = 10;
    lo.k_max_cap = 10;
    hi.k_max = 14;
    hi.k_max_cap = 14;
    const auto run_lo = evolve_hierarchy(s.space, trap, s.vint, traj,
                                         vacuum_excitation(s.space, phi0, lo.k_max), 0.0, 0.4,
                                         1e-3, lo);
    CHECK(run_lo.max_tail < 1e-10);
    const auto run_hi = evolve_hierarchy(s.space, trap, s.vint, traj,
                                         vacuum_excitation(s.space, phi0, hi.k_max), 0.0, 0.4,
                                         1e-3, hi);
    CHECK(std::sqrt(excitation_distance_sq(run_lo.chi, run_hi.chi)) < 1e-8);
    CHECK(run_hi.max_norm_drift < 1e-9);
  }
}

TEST_CASE("finite hierarchy") {
  Setup s;
  std::mt19937_64 rng(13);
  const OneBodyField phi = random_field(rng, s.space);
  const Mat h = hartree_hamiltonian(s.space, s.none, s.vint, phi, 0.0);
  const BogoliubovKernels kernels = bogoliubov_kernels(s.space, s.vint, phi);

  SUBCASE("coefficients converge to the N-independent hierarchy") {
    ExcitationVector chi = vacuum_excitation(s.space, phi, 5);
    for (int k = 1; k <= 5; ++k) chi.chi[k] = Vec::Random(chi.sectors->at(k)->dim());
    const ExcitationVector a = bogoliubov_rhs(s.space, chi, kernels, h);
    const ExcitationVector b = finite_hierarchy_rhs(s.space, chi, 1000000, kernels, h);
    for (int k = 0; k <= 5; ++k)
      CHECK((a.chi[k] - b.chi[k]).norm() < 1e-4 * (1.0 + a.chi[k].norm()));
  }
  SUBCASE("k = N line has no annihilation feed from above") {
    const int n = 4;
    ExcitationVector chi = vacuum_excitation(s.space, phi, n);
    chi.chi[n] = Vec::Random(chi.sectors->at(n)->dim());
    // with only the top sector filled, the k = N - 2 line receives the
    // annihilation term with weight sqrt((N-k)(N-k-1))/(N-1) = sqrt(2)/3;
    // the k = N line itself gets the one-body part only
    const ExcitationVector rhs = finite_hierarchy_rhs(s.space, chi, n, kernels, h);
    const Mat heff = h + (static_cast<double>(n - n) / (n - 1)) * kernels.K1;
    Vec expected = Vec::Zero(chi.sectors->at(n)->dim());
    {
      // one-body action on the top sector via an independent dense assembly
      SecondQuantizedOp op(chi.sectors->at(n), false);
      op.set_one_body(heff);
      expected = -kI * op.apply(chi.chi[n]);
    }
    CHECK((rhs.chi[n] - expected).norm() < 1e-12);
  }
  SUBCASE("matches the H~ flow through the excitation map (N=4, M=3)") {
    const LatticeSpace space = LatticeSpace::ring(3, 3.0);
    const PotentialSchedule trap = PotentialSchedule::harmonic_quench(space, 1.0, 0.1);
    const Interaction vint = Interaction::make(space, InteractionKind::SoftCoulomb, 1.0, 1.0);
    const OneBodyField phi0 = one_body_ground_state(space, trap);
    const int n = 4;
    const double t1 = 0.3, dt = 1e-3;
    const auto traj = evolve_hartree(space, trap, vint, phi0, t1, dt);
    // exact H~ propagation of the product state
    const auto basis = FockBasis::make(n, 3);
    TildeHamiltonian ht(space, trap, vint, basis, traj);
    Vec tilde = product_state(space, phi0, basis).amplitudes;
    PropagationOptions popts;
    PropagationStats stats;
    propagate(
        tilde, [&](double t) { ht.prepare(t); }, [&](const Vec& v) { return ht.apply(v); },
        basis->dim(), false, 0.0, t1, dt, popts, stats);
    const ExcitationVector from_flow =
        excitation_decompose(space, ManyBodyState{basis, tilde}, traj.field_at(t1));
    // finite hierarchy with k_max = N
    HierarchyOptions opts;
    opts.k_max = n;
    opts.k_max_cap = n;
    opts.finite_n = true;
    opts.particles = n;
    const auto run = evolve_hierarchy(space, trap, vint, traj,
                                      vacuum_excitation(space, phi0, n), 0.0, t1, dt, opts);
    // limited by the RK4 / Krylov-midpoint scheme mismatch at this dt
    CHECK(std::sqrt(excitation_distance_sq(from_flow, run.chi)) < 1e-6);
  }
}

TEST_CASE("pair equations") {
  Setup s;
  std::mt19937_64 rng(17);
  const OneBodyField phi = random_field(rng, s.space);
  const BogoliubovKernels kernels = bogoliubov_kernels(s.space, s.vint, phi);
  const Mat h = hartree_hamiltonian(s.space, s.none, s.vint, phi, 0.0);
  const int m = s.space.sites;

  SUBCASE("vacuum Euler step reads off the alpha equation") {
    const CorrelationPair vac{Mat::Zero(m, m), Mat::Zero(m, m)};
    const CorrelationPair d = pair_rhs(vac, kernels, h);
    CHECK((d.alpha - (-kI) * kernels.K2).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(d.gamma.cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("free flow conjugates gamma unitarily") {
    const PotentialSchedule trap = PotentialSchedule::harmonic_quench(s.space, 1.0, 0.0);
    const Interaction zero = Interaction::make(s.space, InteractionKind::Constant, 0.0, 1.0);
    const OneBodyField phi0 = one_body_ground_state(s.space, trap);
    const auto traj = evolve_hartree(s.space, trap, zero, phi0, 0.4, 1e-3);
    // start from a q-projected random PSD gamma
    const auto pq = condensate_projectors(s.space, phi0);
    Mat g = Mat::Random(m, m);
    g = (g * g.adjoint()).eval();
    g = (pq.q * g * pq.q).eval();
    const CorrelationPair start{g, Mat::Zero(m, m)};
    Eigen::SelfAdjointEigenSolver<Mat> before(start.gamma);
    const auto run = evolve_pair(s.space, trap, zero, traj, start, 0.0, 0.4, 1e-3);
    Eigen::SelfAdjointEigenSolver<Mat> after(run.pair.gamma);
    CHECK((before.eigenvalues() - after.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(run.pair.alpha.norm() < 1e-12);
  }
  SUBCASE("hierarchy-contracted correlations obey the trace rule") {
    ExcitationVector chi = vacuum_excitation(s.space, phi, 4);
    for (int k = 1; k <= 4; ++k) chi.chi[k] = 0.3 * Vec::Random(chi.sectors->at(k)->dim());
    const CorrelationPair pair = correlations_from_chi(chi);
    double expected = 0.0;
    for (int k = 1; k <= 4; ++k) expected += k * chi.chi[k].squaredNorm();
    CHECK(std::abs(std::real(pair.gamma.trace()) - expected) < 1e-12);
    CHECK((pair.gamma - pair.gamma.adjoint()).norm() < 1e-12);
    CHECK((pair.alpha - pair.alpha.transpose()).norm() < 1e-14);
  }
  SUBCASE("single excitation gives gamma = |psi><psi| and no pairing") {
    const Vec psi = orthogonal_field(rng, s.space, phi) * std::sqrt(s.space.spacing);
    ExcitationVector chi = vacuum_excitation(s.space, phi, 2);
    chi.chi[0][0] = 0.0;
    chi.chi[1] = psi;
    const CorrelationPair pair = correlations_from_chi(chi);
    CHECK((pair.gamma - psi * psi.adjoint()).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(pair.alpha.norm() < 1e-13);
  }
}

TEST_CASE("hierarchy vs pair flow and purity (vacuum start)") {
  Setup s;
  const PotentialSchedule trap = PotentialSchedule::harmonic_quench(s.space, 1.0, 0.1);
  const OneBodyField phi0 = one_body_ground_state(s.space, trap);
  const double t1 = 0.5, dt = 1e-3;
  const auto traj = evolve_hartree(s.space, trap, s.vint, phi0, t1, dt);

  HierarchyOptions opts;
  opts.k_max = 10;
  opts.k_max_cap = 12;
  std::vector<std::pair<double, CorrelationPair>> from_chi;
  const auto run = evolve_hierarchy(
      s.space, trap, s.vint, traj, vacuum_excitation(s.space, phi0, opts.k_max), 0.0, t1, dt,
      opts, [&](double t, const ExcitationVector& c) {
        const long step = std::lround(t / dt);
        if (step % 100 == 0) from_chi.push_back({t, correlations_from_chi(c)});
      });
  CHECK(run.max_norm_drift < 1e-9);

  std::vector<std::pair<double, CorrelationPair>> from_pair;
  const int m = s.space.sites;
  evolve_pair(s.space, trap, s.vint, traj, CorrelationPair{Mat::Zero(m, m), Mat::Zero(m, m)},
              0.0, t1, dt, [&](double t, const CorrelationPair& p) {
                const long step = std::lround(t / dt);
                if (step % 100 == 0) from_pair.push_back({t, p});
              });
  REQUIRE(from_chi.size() == from_pair.size());
  double worst = 0.0, purity_chi = 0.0, purity_pair = 0.0;
  for (std::size_t i = 0; i < from_chi.size(); ++i) {
    worst = std::max(worst, (from_chi[i].second.gamma - from_pair[i].second.gamma).norm() +
                                (from_chi[i].second.alpha - from_pair[i].second.alpha).norm());
    // convention gate for the quasi-free purity relation: the hierarchy-derived
    // (gamma, alpha) must satisfy it before it is enforced on the pair flow
    purity_chi = std::max(purity_chi, pair_purity_defect(from_chi[i].second));
    purity_pair = std::max(purity_pair, pair_purity_defect(from_pair[i].second));
  }
  CHECK(worst < 1e-6);
  CHECK(purity_chi < 1e-6);
  CHECK(purity_pair < 1e-6);
}
