#include "bogolab/identity_suite.hpp"

#include <cmath>
#include <random>

#include "bogolab/diagnostics.hpp"
#include "bogolab/fluctuations.hpp"
#include "bogolab/fock.hpp"
#include "bogolab/lattice.hpp"

namespace bogolab {

namespace {

// Dense first-quantized workspace on (C^M)^{(x) N}: slot operators, the
// symmetrized sector projectors of the counting calculus, and the isometry
// from the occupation basis.  Independent of the production occupation-basis
// code paths; sizes stay at M^N <= 81.
struct FirstQuantized {
  int N, M, dim;
  LatticeSpace space;
  OneBodyField phi;
  Vec cphi;

  FirstQuantized(int n, int m, const LatticeSpace& s, const OneBodyField& f)
      : N(n), M(m), dim(1), space(s), phi(f), cphi(coefficient_vector(s, f)) {
    for (int i = 0; i < N; ++i) dim *= M;
  }

  int slot_digit(int state, int slot) const {
    int d = state;
    for (int i = N - 1; i > slot; --i) d /= M;
    return d % M;
  }
  int with_digit(int state, int slot, int digit) const {
    int stride = 1;
    for (int i = N - 1; i > slot; --i) stride *= M;
    return state + (digit - slot_digit(state, slot)) * stride;
  }

  Mat slot_op(const Mat& a, int slot) const {
    Mat out = Mat::Zero(dim, dim);
    for (int s = 0; s < dim; ++s) {
      const int xs = slot_digit(s, slot);
      for (int x = 0; x < M; ++x) out(with_digit(s, slot, x), s) += a(x, xs);
    }
    return out;
  }

  Mat two_slot_op(const Mat& v, int i, int j) const {
    Mat out = Mat::Zero(dim, dim);
    for (int s = 0; s < dim; ++s) {
      const int xi = slot_digit(s, i), xj = slot_digit(s, j);
      for (int yi = 0; yi < M; ++yi)
        for (int yj = 0; yj < M; ++yj) {
          const int t = with_digit(with_digit(s, i, yi), j, yj);
          out(t, s) += v(yi * M + yj, xi * M + xj);
        }
    }
    return out;
  }

  Mat p_slot(int slot) const { return slot_op(cphi * cphi.adjoint(), slot); }
  Mat q_slot(int slot) const { return Mat::Identity(dim, dim) - p_slot(slot); }

  // P_{N,k} as the sum over all placements of k q's and N-k p's
  Mat sector_projector(int k) const {
    Mat out = Mat::Zero(dim, dim);
    for (int mask = 0; mask < (1 << N); ++mask) {
      if (__builtin_popcount(static_cast<unsigned>(mask)) != k) continue;
      Mat term = Mat::Identity(dim, dim);
      for (int slot = 0; slot < N; ++slot)
        term = ((mask >> slot) & 1) ? Mat(q_slot(slot) * term) : Mat(p_slot(slot) * term);
      out += term;
    }
    return out;
  }

  Mat weight_op(const RVec& f) const {
    Mat out = Mat::Zero(dim, dim);
    for (int k = 0; k <= N; ++k) out += f[k] * sector_projector(k);
    return out;
  }

  // isometry occupation basis -> symmetric first-quantized vectors
  Mat occupation_isometry(const FockBasis& basis) const {
    Mat iso = Mat::Zero(dim, basis.dim());
    std::vector<std::uint32_t> occ(M);
    for (int s = 0; s < dim; ++s) {
      std::fill(occ.begin(), occ.end(), 0);
      for (int slot = 0; slot < N; ++slot) occ[slot_digit(s, slot)] += 1;
      double lg = -std::lgamma(N + 1.0);
      for (int x = 0; x < M; ++x) lg += std::lgamma(occ[x] + 1.0);
      iso(s, basis.find(occ)) = std::exp(0.5 * lg);
    }
    return iso;
  }

  Vec random_symmetric_state(std::mt19937_64& rng, const FockBasis& basis) const {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec occ_amps(basis.dim());
    for (int i = 0; i < basis.dim(); ++i) occ_amps[i] = Complex{g(rng), g(rng)};
    occ_amps /= occ_amps.norm();
    return occ_amps;
  }
};

struct Suite {
  std::vector<IdentityCheck> checks;
  void add(const std::string& name, double defect, double tol) {
    checks.push_back({name, defect, tol, defect <= tol});
  }
};

Vec random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = Complex{g(rng), g(rng)};
  return v / v.norm();
}

OneBodyField random_field(std::mt19937_64& rng, const LatticeSpace& space) {
  return OneBodyField::normalized(space, random_unit(rng, space.sites));
}

void run_size(Suite& suite, int N, int M, std::uint64_t seed) {
  std::mt19937_64 rng(seed * 7919u + static_cast<std::uint64_t>(N) * 131u + M);
  const std::string tag =
      "[N=" + std::to_string(N) + ",M=" + std::to_string(M) + ",seed=" + std::to_string(seed) + "] ";
  const LatticeSpace space = LatticeSpace::ring(M, static_cast<double>(M));
  const Interaction vint = Interaction::make(space, InteractionKind::SoftCoulomb, 1.0, 1.0);
  const OneBodyField phi = random_field(rng, space);
  const auto basis = FockBasis::make(N, M);
  const SectorCalculus calc(space, phi, basis);
  const ManyBodyState psi{basis, random_unit(rng, basis->dim())};

  // --- P_{N,k} calculus on the production path
  {
    std::vector<ManyBodyState> parts;
    Vec sum = Vec::Zero(basis->dim());
    for (int k = 0; k <= N; ++k) {
      parts.push_back(calc.sector_project(k, psi));
      sum += parts.back().amplitudes;
    }
    suite.add(tag + "P_{N,k} resolution of identity", (sum - psi.amplitudes).norm(), 1e-10);
    double ortho = 0.0, idem = 0.0;
    for (int k = 0; k <= N; ++k)
      for (int l = 0; l <= N; ++l) {
        const ManyBodyState pk = calc.sector_project(k, parts[l]);
        const double d = (pk.amplitudes - (k == l ? parts[l].amplitudes : Vec::Zero(basis->dim())))
                             .norm();
        (k == l ? idem : ortho) = std::max(k == l ? idem : ortho, d);
      }
    suite.add(tag + "P_{N,k} idempotence", idem, 1e-10);
    suite.add(tag + "P_{N,k} mutual orthogonality", ortho, 1e-10);
    // self-adjointness on a random pair
    const ManyBodyState chi{basis, random_unit(rng, basis->dim())};
    double adj = 0.0;
    for (int k = 0; k <= N; ++k) {
      const Complex a = chi.amplitudes.dot(parts[k].amplitudes);
      const Complex b = calc.sector_project(k, chi).amplitudes.dot(psi.amplitudes);
      adj = std::max(adj, std::abs(a - b));
    }
    suite.add(tag + "P_{N,k} self-adjointness", adj, 1e-10);
  }

  // --- first-quantized cross-checks (kept small)
  const bool small_fq = std::pow(M, N) <= 256;
  if (small_fq) {
    const FirstQuantized fq(N, M, space, phi);
    const Mat iso = fq.occupation_isometry(*basis);
    // production sector projector vs symmetrized-product assembly
    double worst = 0.0;
    for (int k = 0; k <= N; ++k) {
      const Mat pk = fq.sector_projector(k);
      const Vec lhs = iso * calc.sector_project(k, psi).amplitudes;
      const Vec rhs = pk * (iso * psi.amplitudes);
      worst = std::max(worst, (lhs - rhs).norm());
    }
    suite.add(tag + "P_{N,k} matches symmetrized-product oracle", worst, 1e-10);
    // commutation with slot projectors
    double comm = 0.0;
    for (int k = 0; k <= N; ++k) {
      const Mat pk = fq.sector_projector(k);
      for (int slot = 0; slot < N; ++slot) {
        comm = std::max(comm, (pk * fq.p_slot(slot) - fq.p_slot(slot) * pk).cwiseAbs().maxCoeff());
        comm = std::max(comm, (pk * fq.q_slot(slot) - fq.q_slot(slot) * pk).cwiseAbs().maxCoeff());
      }
    }
    suite.add(tag + "[P_{N,k}, p_l] = [P_{N,k}, q_l] = 0", comm, 1e-10);

    // pull-through formula for all sector pairs with a random two-body block
    {
      Mat a2(M * M, M * M);
      std::normal_distribution<double> g(0.0, 1.0);
      for (int i = 0; i < M * M; ++i)
        for (int j = 0; j < M * M; ++j) a2(i, j) = Complex{g(rng), g(rng)};
      const Mat p1 = fq.p_slot(0), p2 = fq.p_slot(1);
      const Mat q1 = fq.q_slot(0), q2 = fq.q_slot(1);
      const Mat blocks[3] = {p1 * p2, p1 * q2 + q1 * p2, q1 * q2};
      RVec fw(N + 1);
      for (int k = 0; k <= N; ++k) fw[k] = std::abs(g(rng)) + 0.1;
      WeightFunction f{fw};
      const Mat a12 = fq.two_slot_op(a2, 0, 1);
      double defect = 0.0;
      for (int i = 0; i <= 2; ++i)
        for (int j = 0; j <= 2; ++j) {
          const Mat op = blocks[i] * a12 * blocks[j];
          const Mat lhs = op * fq.weight_op(f.values);
          const Mat rhs = fq.weight_op(f.shifted(j - i).values) * op;
          defect = std::max(defect, (lhs - rhs).cwiseAbs().maxCoeff());
        }
      suite.add(tag + "pull-through formula (all sector pairs)", defect, 1e-10);
    }

    // (1/N) sum_l q_l = m-hat
    {
      Mat qsum = Mat::Zero(fq.dim, fq.dim);
      for (int slot = 0; slot < N; ++slot) qsum += fq.q_slot(slot);
      const Mat mhat = fq.weight_op(WeightFunction::m_weight(N).values);
      suite.add(tag + "(1/N) sum q_l = m-hat",
                (qsum / static_cast<double>(N) - mhat).cwiseAbs().maxCoeff(), 1e-10);
      // cross-check the production weight application against the oracle
      const Vec lhs = iso * calc.apply_weight(WeightFunction::m_weight(N), psi).amplitudes;
      const Vec rhs = mhat * (iso * psi.amplitudes);
      suite.add(tag + "m-hat production vs oracle", (lhs - rhs).norm(), 1e-10);
    }

    // (I)_{m^n, Psi} = 0 for n = 1, 2
    {
      const RVec mf = mean_field_potential(space, vint, phi);
      Mat z2 = two_body_multiplication(space, vint);
      for (int x = 0; x < M; ++x)
        for (int y = 0; y < M; ++y) z2(x * M + y, x * M + y) -= mf[x] + mf[y];
      z2 *= 0.5;
      const Mat z12 = fq.two_slot_op(z2, 0, 1);
      const Mat p1 = fq.p_slot(0), p2 = fq.p_slot(1), q1 = fq.q_slot(0);
      const Vec v = iso * psi.amplitudes;
      for (int n = 1; n <= 2; ++n) {
        RVec mw = WeightFunction::m_weight(N).values;
        RVec mn(N + 1), mns(N + 1);
        for (int k = 0; k <= N; ++k) mn[k] = std::pow(mw[k], n);
        WeightFunction fn{mn};
        const Mat dw = fq.weight_op(fn.values) - fq.weight_op(fn.shifted(-1).values);
        const Complex val = v.dot(p1 * p2 * z12 * q1 * p2 * dw * v);
        suite.add(tag + "(I)_{m^" + std::to_string(n) + "} vanishes",
                  std::abs(4.0 * N * std::imag(val)), 1e-10);
      }
    }
  }

  // --- weight algebra on the production path
  {
    const auto m = WeightFunction::m_weight(N);
    const auto mu = WeightFunction::mu_weight(N);
    const ManyBodyState mmu = calc.apply_weight(m, calc.apply_weight(mu, psi));
    const Vec rhs = psi.amplitudes - calc.sector_project(0, psi).amplitudes;
    suite.add(tag + "m-hat mu-hat = 1 - P_{N,0}", (mmu.amplitudes - rhs).norm(), 1e-10);
    double worst = 0.0, worst_mu = 0.0;
    for (int d = -2; d <= 2; ++d) {
      const auto tm = m.shifted(d);
      const auto tn = WeightFunction::n_weight(N).shifted(d);
      const ManyBodyState lhs = calc.apply_weight(tm, psi);
      const ManyBodyState rhs2 = calc.apply_weight(tn, calc.apply_weight(tn, psi));
      worst = std::max(worst, (lhs.amplitudes - rhs2.amplitudes).norm());
      const auto tmu = mu.shifted(d);
      const auto tnu = WeightFunction::nu_weight(N).shifted(d);
      const ManyBodyState lmu = calc.apply_weight(tmu, psi);
      const ManyBodyState rnu = calc.apply_weight(tnu, calc.apply_weight(tnu, psi));
      worst_mu = std::max(worst_mu, (lmu.amplitudes - rnu.amplitudes).norm());
    }
    suite.add(tag + "(tau_d m)-hat = (tau_d n)-hat^2", worst, 1e-10);
    suite.add(tag + "(tau_d mu)-hat = (tau_d nu)-hat^2", worst_mu, 1e-10);
  }

  // --- pvp mean-field identity
  {
    const auto pq = condensate_projectors(space, phi);
    const Mat v2 = two_body_multiplication(space, vint);
    const RVec mf = mean_field_potential(space, vint, phi);
    Mat d1 = Mat::Zero(M * M, M * M);
    for (int x = 0; x < M; ++x)
      for (int y = 0; y < M; ++y) d1(x * M + y, x * M + y) = mf[x];
    const Mat p2 = kron2(Mat::Identity(M, M), pq.p);
    suite.add(tag + "pvp mean-field identity", (p2 * v2 * p2 - p2 * d1 * p2).cwiseAbs().maxCoeff(),
              1e-12);
  }

  // --- H - H~ difference identity as a matrix equality
  {
    SecondQuantizedOp hop(basis, true);
    const PotentialSchedule none{RVec::Zero(M), 0.0};
    hop.set(assemble_one_body(space, none, 0.0), two_body_multiplication(space, vint),
            lambda_coupling(N));
    const Mat h = hop.dense();
    SecondQuantizedOp top(basis, true);
    top.set(hartree_hamiltonian(space, none, vint, phi, 0.0), tilde_pair_kernel(space, vint, phi),
            lambda_coupling(N));
    const Mat ht = top.dense();
    const Mat diff = dense_two_body_operator(difference_pair_kernel(space, vint, phi), basis) *
                     lambda_coupling(N);
    suite.add(tag + "H - H~ difference identity", (h - ht - diff).cwiseAbs().maxCoeff(), 1e-10);
  }

  // --- decomposition round trip
  {
    const ExcitationVector chi = excitation_decompose(space, psi, phi);
    const ManyBodyState back = symmetric_reconstruct(space, chi, N);
    suite.add(tag + "decompose/reconstruct round trip", (back.amplitudes - psi.amplitudes).norm(),
              1e-12);
    double total = 0.0;
    for (const auto& c : chi.chi) total += c.squaredNorm();
    suite.add(tag + "decomposition is isometric", std::abs(total - psi.amplitudes.squaredNorm()),
              1e-12);
  }
}

}  // namespace

std::vector<IdentityCheck> run_identity_suite(const IdentitySuiteOptions& opts) {
  Suite suite;
  for (const auto& [n, m] : opts.sizes)
    for (std::uint64_t seed : opts.seeds) run_size(suite, n, m, seed);

  // sandwich inequality on 100 random states
  {
    std::mt19937_64 rng(opts.seeds.empty() ? 0 : opts.seeds.front());
    const LatticeSpace space = LatticeSpace::ring(3, 3.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 2 + static_cast<int>(rng() % 3);
      const auto basis = FockBasis::make(n, 3);
      const OneBodyField phi = random_field(rng, space);
      const ManyBodyState psi{basis, random_unit(rng, basis->dim())};
      const double q1 = counting_expectation(space, psi, phi, 1);
      const Mat gamma = reduced_density(psi, 1);
      const Mat proj = space.spacing * phi.values * phi.values.adjoint();
      const double td = trace_norm_distance(gamma, proj);
      worst = std::max(worst, q1 - td);
      worst = std::max(worst, td - std::sqrt(8.0 * q1));
    }
    suite.checks.push_back({"sandwich inequality q1 <= Tr|.| <= sqrt(8 q1), 100 states", worst,
                            1e-10, worst <= 1e-10});
  }
  return suite.checks;
}

}  // namespace bogolab
