#include "bogolab/fluctuations.hpp"

#include <cmath>

namespace bogolab {

double ExcitationVector::total_norm_sq() const {
  double acc = 0.0;
  for (const auto& c : chi) acc += c.squaredNorm();
  return acc;
}

double ExcitationVector::slot_orthogonality_defect(const LatticeSpace& space) const {
  const Vec cphi = coefficient_vector(space, phi);
  double worst = 0.0;
  for (int k = 1; k <= k_max(); ++k) {
    const Vec low = apply_annihilation(cphi, chi[k], *sectors->at(k), *sectors->at(k - 1));
    worst = std::max(worst, low.norm());
  }
  return worst;
}

ExcitationVector vacuum_excitation(const LatticeSpace& space, const OneBodyField& phi,
                                   int k_max) {
  ExcitationVector out;
  out.phi = phi;
  out.sectors = std::make_shared<SectorBases>(space.sites, k_max);
  out.chi.resize(k_max + 1);
  for (int k = 0; k <= k_max; ++k) out.chi[k] = Vec::Zero(out.sectors->at(k)->dim());
  out.chi[0][0] = 1.0;
  return out;
}

double excitation_distance_sq(const ExcitationVector& a, const ExcitationVector& b) {
  const int kmax = std::max(a.k_max(), b.k_max());
  double acc = 0.0;
  for (int k = 0; k <= kmax; ++k) {
    if (k > a.k_max())
      acc += b.chi[k].squaredNorm();
    else if (k > b.k_max())
      acc += a.chi[k].squaredNorm();
    else
      acc += (a.chi[k] - b.chi[k]).squaredNorm();
  }
  return acc;
}

Mat chi2_as_matrix(const Vec& amplitudes, const FockBasis& basis2) {
  const int m = basis2.modes();
  Mat out = Mat::Zero(m, m);
  for (int i = 0; i < basis2.dim(); ++i) {
    auto occ = basis2.occ(i);
    int x = -1, y = -1;
    for (int u = 0; u < m; ++u) {
      if (occ[u] == 2) x = y = u;
      if (occ[u] == 1) (x < 0 ? x : y) = u;
    }
    if (x == y)
      out(x, x) = amplitudes[i];
    else
      out(x, y) = out(y, x) = amplitudes[i] / std::sqrt(2.0);
  }
  return out;
}

Vec chi2_from_matrix(const Mat& array, const FockBasis& basis2) {
  const int m = basis2.modes();
  Vec out = Vec::Zero(basis2.dim());
  for (int i = 0; i < basis2.dim(); ++i) {
    auto occ = basis2.occ(i);
    int x = -1, y = -1;
    for (int u = 0; u < m; ++u) {
      if (occ[u] == 2) x = y = u;
      if (occ[u] == 1) (x < 0 ? x : y) = u;
    }
    out[i] = (x == y) ? array(x, x) : std::sqrt(2.0) * array(x, y);
  }
  return out;
}

ExcitationVector excitation_decompose(const LatticeSpace& space, const ManyBodyState& psi,
                                      const OneBodyField& phi) {
  SectorCalculus calc(space, phi, psi.basis);
  SectorResolution res = calc.resolve(psi);
  ExcitationVector out;
  out.phi = phi;
  out.sectors = res.sectors;
  out.chi = std::move(res.chi);
  return out;
}

ManyBodyState symmetric_reconstruct(const LatticeSpace& space, const ExcitationVector& chi,
                                    int particles) {
  if (chi.k_max() > particles)
    throw std::invalid_argument("symmetric_reconstruct: k_max exceeds particle number");
  const double defect = chi.slot_orthogonality_defect(space);
  if (defect > 1e-6)
    throw std::invalid_argument("symmetric_reconstruct: slot-orthogonality defect " +
                                std::to_string(defect) + " above 1e-6");
  auto basis = FockBasis::make(particles, space.sites);
  SectorCalculus calc(space, chi.phi, basis);
  return calc.assemble(chi.chi);
}

// -- sector right-hand sides --------------------------------------------------

namespace {

// (1/2) sum K_xy adag_x adag_y from sector k-2 into sector k (or its adjoint)
void pair_ladder(const Mat& kernel, const Vec& in, SectorBases& sectors, int k, bool adjoint,
                 Vec& out) {
  const auto& low = *sectors.at(k - 2);
  const auto& mid = *sectors.at(k - 1);
  const int m = sectors.modes();
  const auto& map0 = sectors.creation_map(k - 2);
  const auto& map1 = sectors.creation_map(k - 1);
  for (int s = 0; s < low.dim(); ++s) {
    auto n = low.occ(s);
    if (!adjoint && in[s] == Complex{0.0, 0.0}) continue;
    for (int x = 0; x < m; ++x) {
      const int i1 = map0[static_cast<std::size_t>(s) * m + x];
      const double fx = std::sqrt(static_cast<double>(n[x]) + 1.0);
      auto n1 = mid.occ(i1);
      for (int y = 0; y < m; ++y) {
        const int t = map1[static_cast<std::size_t>(i1) * m + y];
        const double w = 0.5 * fx * std::sqrt(static_cast<double>(n1[y]) + 1.0);
        if (adjoint)
          out[s] += std::conj(w * kernel(x, y)) * in[t];
        else
          out[t] += w * kernel(x, y) * in[s];
      }
    }
  }
}

// dGamma(A) within sector k
Vec sector_one_body(const Mat& a, const Vec& in, SectorBases& sectors, int k) {
  const auto& basis = *sectors.at(k);
  const int m = sectors.modes();
  Vec out = Vec::Zero(basis.dim());
  if (k == 0) return out;
  const auto& map = sectors.creation_map(k - 1);
  const auto& lower = *sectors.at(k - 1);
  // a^dag_x a_y via the lower sector: for each lower state l and modes (x, y)
  // the transition occ(l)+e_y -> occ(l)+e_x
  for (int l = 0; l < lower.dim(); ++l) {
    auto n = lower.occ(l);
    for (int y = 0; y < m; ++y) {
      const int s = map[static_cast<std::size_t>(l) * m + y];
      const double fy = std::sqrt(static_cast<double>(n[y]) + 1.0);
      const Complex amp = in[s] * fy;
      if (amp == Complex{0.0, 0.0}) continue;
      for (int x = 0; x < m; ++x) {
        const int t = map[static_cast<std::size_t>(l) * m + x];
        out[t] += a(x, y) * std::sqrt(static_cast<double>(n[x]) + 1.0) * amp;
      }
    }
  }
  return out;
}

ExcitationVector hierarchy_rhs_impl(const ExcitationVector& chi,
                                    const BogoliubovKernels& kernels, const Mat& h_phi,
                                    bool finite_n, int particles) {
  const int kmax = chi.k_max();
  ExcitationVector out;
  out.phi = chi.phi;
  out.sectors = chi.sectors;
  out.chi.resize(kmax + 1);
  auto& sectors = *chi.sectors;
  const Mat h_eff = h_phi + kernels.K1;
  for (int k = 0; k <= kmax; ++k) {
    Vec acc = Vec::Zero(sectors.at(k)->dim());
    if (k > 0) {
      if (finite_n) {
        const double w1 = static_cast<double>(particles - k) / (particles - 1);
        acc += sector_one_body(h_phi + w1 * kernels.K1, chi.chi[k], sectors, k);
      } else {
        acc += sector_one_body(h_eff, chi.chi[k], sectors, k);
      }
    }
    if (k >= 2) {
      double w = 1.0;
      if (finite_n)
        w = std::sqrt(static_cast<double>(particles - k + 2) *
                      static_cast<double>(particles - k + 1)) /
            (particles - 1);
      Vec created = Vec::Zero(sectors.at(k)->dim());
      pair_ladder(kernels.K2, chi.chi[k - 2], sectors, k, false, created);
      acc += w * created;
    }
    if (k + 2 <= kmax) {
      double w = 1.0;
      if (finite_n)
        w = std::sqrt(static_cast<double>(particles - k) *
                      static_cast<double>(particles - k - 1)) /
            (particles - 1);
      Vec killed = Vec::Zero(sectors.at(k)->dim());
      pair_ladder(kernels.K2, chi.chi[k + 2], sectors, k + 2, true, killed);
      acc += w * killed;
    }
    out.chi[k] = -kI * acc;
  }
  return out;
}

}  // namespace

ExcitationVector bogoliubov_rhs(const LatticeSpace&, const ExcitationVector& chi,
                                const BogoliubovKernels& kernels, const Mat& h_phi) {
  return hierarchy_rhs_impl(chi, kernels, h_phi, false, 0);
}

ExcitationVector finite_hierarchy_rhs(const LatticeSpace&, const ExcitationVector& chi,
                                      int particles, const BogoliubovKernels& kernels,
                                      const Mat& h_phi) {
  if (particles < 2)
    throw std::invalid_argument("finite_hierarchy_rhs: need at least two particles");
  return hierarchy_rhs_impl(chi, kernels, h_phi, true, particles);
}

CorrelationPair pair_rhs(const CorrelationPair& pair, const BogoliubovKernels& kernels,
                         const Mat& h_phi) {
  const Mat h = h_phi + kernels.K1;
  const Mat& k2 = kernels.K2;
  // the bracket for gamma is anti-hermitian and the one for alpha symmetric,
  // so d/dt gamma is hermitian and d/dt alpha symmetric; enforce both exactly
  const Mat dg = h * pair.gamma - pair.gamma * h + k2 * pair.alpha.conjugate() -
                 pair.alpha * k2.conjugate();
  const Mat da = h * pair.alpha + pair.alpha * h.transpose() + k2 +
                 k2 * pair.gamma.transpose() + pair.gamma * k2;
  Mat out_g = -kI * dg;
  out_g = 0.5 * (out_g + out_g.adjoint()).eval();
  Mat out_a = -kI * da;
  out_a = 0.5 * (out_a + out_a.transpose()).eval();
  return {std::move(out_g), std::move(out_a)};
}

CorrelationPair correlations_from_chi(const ExcitationVector& chi) {
  const int m = chi.sectors->modes();
  const int kmax = chi.k_max();
  CorrelationPair out{Mat::Zero(m, m), Mat::Zero(m, m)};
  std::vector<std::vector<Vec>> lowered(kmax + 1);
  for (int k = 1; k <= kmax; ++k) {
    lowered[k].resize(m);
    for (int x = 0; x < m; ++x)
      lowered[k][x] =
          apply_annihilation_mode(x, chi.chi[k], *chi.sectors->at(k), *chi.sectors->at(k - 1));
  }
  for (int k = 1; k <= kmax; ++k)
    for (int x = 0; x < m; ++x)
      for (int y = 0; y < m; ++y) out.gamma(x, y) += lowered[k][y].dot(lowered[k][x]);
  for (int k = 0; k + 2 <= kmax; ++k)
    for (int x = 0; x < m; ++x) {
      // a_y a_x chi[k+2]
      const Vec& ax = lowered[k + 2][x];
      for (int y = 0; y < m; ++y) {
        const Vec ayax =
            apply_annihilation_mode(y, ax, *chi.sectors->at(k + 1), *chi.sectors->at(k));
        out.alpha(x, y) += chi.chi[k].dot(ayax);
      }
    }
  out.alpha = 0.5 * (out.alpha + out.alpha.transpose()).eval();
  return out;
}

double pair_purity_defect(const CorrelationPair& pair) {
  const int m = static_cast<int>(pair.gamma.rows());
  const Mat lhs = pair.alpha * pair.alpha.conjugate();
  const Mat rhs = pair.gamma * (Mat::Identity(m, m) + pair.gamma);
  return (lhs - rhs).norm();
}

// -- integrators ---------------------------------------------------------------

namespace {

struct StageKernels {
  Mat h;
  BogoliubovKernels kernels;
  Projectors pq;
};

StageKernels stage_kernels(const LatticeSpace& space, const PotentialSchedule& schedule,
                           const Interaction& vint, const HartreeTrajectory& traj, double t) {
  const OneBodyField phi = traj.field_at(t);
  return {hartree_hamiltonian(space, schedule, vint, phi, t),
          bogoliubov_kernels(space, vint, phi), condensate_projectors(space, phi)};
}

void axpy(ExcitationVector& y, double a, const ExcitationVector& x) {
  for (int k = 0; k <= y.k_max(); ++k) y.chi[k] += a * x.chi[k];
}

// exact projector onto vanishing condensate-mode occupation, normal ordered:
// sum_j (-1)^j / j! adag(phi)^j a(phi)^j.  Eigenvalues are exactly {0, 1}, so
// unlike the first-order cleanup 1 - n_phi it never amplifies stray content
// in higher occupation sectors.
void project_out_condensate(Vec& chi_k, SectorBases& sectors, int k, const Vec& cphi) {
  if (k == 0) return;
  const double scale = chi_k.squaredNorm();
  std::vector<Vec> lowered;
  lowered.reserve(k);
  Vec cur = chi_k;
  for (int j = 1; j <= k; ++j) {
    cur = apply_annihilation(cphi, cur, *sectors.at(k - j + 1), *sectors.at(k - j));
    if (cur.squaredNorm() <= 1e-64 * scale) break;
    lowered.push_back(cur);
  }
  double coeff = 1.0;
  for (int j = 1; j <= static_cast<int>(lowered.size()); ++j) {
    coeff *= -1.0 / j;
    Vec raised = lowered[j - 1];
    for (int l = k - j; l < k; ++l)
      raised = apply_creation(cphi, raised, *sectors.at(l), *sectors.at(l + 1));
    chi_k += coeff * raised;
  }
}

}  // namespace

HierarchyRun evolve_hierarchy(const LatticeSpace& space, const PotentialSchedule& schedule,
                              const Interaction& vint, const HartreeTrajectory& traj,
                              ExcitationVector chi0, double t0, double t1, double dt,
                              const HierarchyOptions& opts,
                              const std::function<void(double, const ExcitationVector&)>&
                                  on_step) {
  if (!(dt > 0.0)) throw std::invalid_argument("evolve_hierarchy: dt must be positive");
  HierarchyRun run;
  ExcitationVector chi = std::move(chi0);
  // pad up to the requested truncation order
  if (chi.k_max() < opts.k_max) {
    chi.sectors->extend(opts.k_max);
    for (int k = chi.k_max() + 1; k <= opts.k_max; ++k)
      chi.chi.push_back(Vec::Zero(chi.sectors->at(k)->dim()));
  }
  {
    const double defect = chi.slot_orthogonality_defect(space);
    if (defect > 1e-6)
      throw std::invalid_argument("evolve_hierarchy: initial data not q-orthogonal");
  }
  const double norm0 = std::sqrt(chi.total_norm_sq());
  const long nsteps = std::max<long>(1, std::lround((t1 - t0) / dt));
  const double h = (t1 - t0) / nsteps;
  const auto rhs = [&](const ExcitationVector& c, const StageKernels& sk) {
    return opts.finite_n ? finite_hierarchy_rhs(space, c, opts.particles, sk.kernels, sk.h)
                         : bogoliubov_rhs(space, c, sk.kernels, sk.h);
  };
  for (long s = 0; s < nsteps; ++s) {
    const double t = t0 + s * h;
    const StageKernels sk0 = stage_kernels(space, schedule, vint, traj, t);
    const StageKernels skm = stage_kernels(space, schedule, vint, traj, t + 0.5 * h);
    const StageKernels sk1 = stage_kernels(space, schedule, vint, traj, t + h);

    const ExcitationVector k1 = rhs(chi, sk0);
    ExcitationVector y = chi;
    axpy(y, 0.5 * h, k1);
    const ExcitationVector k2 = rhs(y, skm);
    y = chi;
    axpy(y, 0.5 * h, k2);
    const ExcitationVector k3 = rhs(y, skm);
    y = chi;
    axpy(y, h, k3);
    const ExcitationVector k4 = rhs(y, sk1);
    axpy(chi, h / 6.0, k1);
    axpy(chi, h / 3.0, k2);
    axpy(chi, h / 3.0, k3);
    axpy(chi, h / 6.0, k4);

    // moving-frame constraint: re-project each sector by q^{t+h}; the flow
    // preserves orthogonality exactly, this removes integrator noise only
    chi.phi = traj.field_at(t + h);
    const Vec cphi = coefficient_vector(space, chi.phi);
    for (int k = 1; k <= chi.k_max(); ++k)
      project_out_condensate(chi.chi[k], *chi.sectors, k, cphi);
    run.max_orthogonality_defect =
        std::max(run.max_orthogonality_defect, chi.slot_orthogonality_defect(space));

    // the top sector of the finite hierarchy is physical, not a truncation
    if (!opts.finite_n) {
      const double tail = chi.chi[chi.k_max()].squaredNorm();
      run.max_tail = std::max(run.max_tail, tail);
      const bool can_grow =
          chi.k_max() < opts.k_max_cap &&
          FockBasis::dimension_of(std::min(chi.k_max() + 2, opts.k_max_cap),
                                  chi.sectors->modes()) <= FockBasis::kDefaultCap;
      if (tail > opts.tail_grow_threshold && can_grow) {
        const int grown = std::min(chi.k_max() + 2, opts.k_max_cap);
        chi.sectors->extend(grown);
        while (chi.k_max() < grown)
          chi.chi.push_back(Vec::Zero(chi.sectors->at(chi.k_max() + 1)->dim()));
      } else if (tail > opts.tail_abort) {
        throw std::runtime_error(
            "evolve_hierarchy: truncation insufficient (tail " + std::to_string(tail) +
            " at k_max " + std::to_string(chi.k_max()) + "); increase k_max");
      }
    }
    run.max_norm_drift =
        std::max(run.max_norm_drift, std::abs(std::sqrt(chi.total_norm_sq()) - norm0));
    if (on_step) on_step(t + h, chi);
  }
  run.chi = std::move(chi);
  run.final_k_max = run.chi.k_max();
  return run;
}

PairRun evolve_pair(const LatticeSpace& space, const PotentialSchedule& schedule,
                    const Interaction& vint, const HartreeTrajectory& traj,
                    CorrelationPair pair0, double t0, double t1, double dt,
                    const std::function<void(double, const CorrelationPair&)>& on_step) {
  if (!(dt > 0.0)) throw std::invalid_argument("evolve_pair: dt must be positive");
  PairRun run;
  CorrelationPair pair = std::move(pair0);
  const long nsteps = std::max<long>(1, std::lround((t1 - t0) / dt));
  const double h = (t1 - t0) / nsteps;
  for (long s = 0; s < nsteps; ++s) {
    const double t = t0 + s * h;
    const StageKernels sk0 = stage_kernels(space, schedule, vint, traj, t);
    const StageKernels skm = stage_kernels(space, schedule, vint, traj, t + 0.5 * h);
    const StageKernels sk1 = stage_kernels(space, schedule, vint, traj, t + h);
    const CorrelationPair k1 = pair_rhs(pair, sk0.kernels, sk0.h);
    const CorrelationPair k2 =
        pair_rhs({pair.gamma + 0.5 * h * k1.gamma, pair.alpha + 0.5 * h * k1.alpha}, skm.kernels,
                 skm.h);
    const CorrelationPair k3 =
        pair_rhs({pair.gamma + 0.5 * h * k2.gamma, pair.alpha + 0.5 * h * k2.alpha}, skm.kernels,
                 skm.h);
    const CorrelationPair k4 =
        pair_rhs({pair.gamma + h * k3.gamma, pair.alpha + h * k3.alpha}, sk1.kernels, sk1.h);
    pair.gamma += (h / 6.0) * (k1.gamma + 2.0 * k2.gamma + 2.0 * k3.gamma + k4.gamma);
    pair.alpha += (h / 6.0) * (k1.alpha + 2.0 * k2.alpha + 2.0 * k3.alpha + k4.alpha);
    // q^t re-projection in the moving frame
    const Projectors pq = stage_kernels(space, schedule, vint, traj, t + h).pq;
    pair.gamma = (pq.q * pair.gamma * pq.q).eval();
    pair.alpha = (pq.q * pair.alpha * pq.q.transpose()).eval();
    run.max_hermiticity_defect = std::max(
        {run.max_hermiticity_defect, (pair.gamma - pair.gamma.adjoint()).norm(),
         (pair.alpha - pair.alpha.transpose()).norm()});
    if (on_step) on_step(t + h, pair);
  }
  run.pair = std::move(pair);
  return run;
}

}  // namespace bogolab
