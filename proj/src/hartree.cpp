#include "bogolab/hartree.hpp"

#include <cmath>

namespace bogolab {

namespace {

// -i h^{t,phi} phi without assembling the matrix; optionally drops the
// -mu^phi phase term (gauge-consistency checks)
Vec rhs_impl(const LatticeSpace& space, const PotentialSchedule& schedule,
             const Interaction& vint, const Vec& phi, double t, bool with_phase) {
  OneBodyField f{phi};
  const RVec mf = mean_field_potential(space, vint, f);
  const RVec w = schedule.potential_at(t);
  Vec h = space.laplacian * phi;
  for (int j = 0; j < space.sites; ++j) h[j] += (w[j] + mf[j]) * phi[j];
  if (with_phase) {
    double mu = 0.0;
    for (int j = 0; j < space.sites; ++j) mu += mf[j] * std::norm(phi[j]);
    mu *= 0.5 * space.spacing;
    h -= mu * phi;
  }
  return -kI * h;
}

}  // namespace

Vec hartree_rhs(const LatticeSpace& space, const PotentialSchedule& schedule,
                const Interaction& vint, const OneBodyField& phi, double t) {
  return rhs_impl(space, schedule, vint, phi.values, t, true);
}

double hartree_energy(const LatticeSpace& space, const PotentialSchedule& schedule,
                      const Interaction& vint, const OneBodyField& phi, double t) {
  const RVec w = schedule.potential_at(t);
  const Vec lap = space.laplacian * phi.values;
  double kin = 0.0, pot = 0.0;
  for (int j = 0; j < space.sites; ++j) {
    kin += std::real(std::conj(phi.values[j]) * lap[j]);
    pot += w[j] * std::norm(phi.values[j]);
  }
  return space.spacing * (kin + pot) + chemical_phase(space, vint, phi);
}

HartreeTrajectory::HartreeTrajectory(const LatticeSpace& space, double t0, double dt_store,
                                     std::vector<Vec> fields, double max_renorm_defect)
    : space_(space),
      t0_(t0),
      dt_store_(dt_store),
      fields_(std::move(fields)),
      max_renorm_defect_(max_renorm_defect) {}

OneBodyField HartreeTrajectory::field_at(double t) const {
  const double pos = (t - t0_) / dt_store_;
  const long idx = std::lround(pos);
  if (idx < 0 || idx >= static_cast<long>(fields_.size()) ||
      std::abs(pos - static_cast<double>(idx)) > 1e-6)
    throw std::invalid_argument("HartreeTrajectory: requested time off the stored grid");
  return OneBodyField{fields_[static_cast<std::size_t>(idx)]};
}

HartreeTrajectory evolve_hartree(const LatticeSpace& space, const PotentialSchedule& schedule,
                                 const Interaction& vint, const OneBodyField& phi0, double t1,
                                 double dt, bool with_phase) {
  if (!(dt > 0.0)) throw std::invalid_argument("evolve_hartree: dt must be positive");
  if (t1 < 0.0) throw std::invalid_argument("evolve_hartree: t1 must be nonnegative");
  if (phi0.norm_defect(space) > 1e-10)
    throw std::invalid_argument("evolve_hartree: initial field not normalized");

  const double h = dt / 2;  // integration and storage step
  const long nsteps = std::max<long>(0, std::lround(t1 / h));
  std::vector<Vec> fields;
  fields.reserve(nsteps + 1);
  Vec phi = phi0.values;
  fields.push_back(phi);
  double max_defect = 0.0;
  const auto f = [&](const Vec& y, double t) {
    return rhs_impl(space, schedule, vint, y, t, with_phase);
  };
  for (long s = 0; s < nsteps; ++s) {
    const double t = s * h;
    const Vec k1 = f(phi, t);
    const Vec k2 = f(phi + 0.5 * h * k1, t + 0.5 * h);
    const Vec k3 = f(phi + 0.5 * h * k2, t + 0.5 * h);
    const Vec k4 = f(phi + h * k3, t + h);
    phi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!phi.allFinite())
      throw std::runtime_error("evolve_hartree: non-finite field (step-size failure) at t=" +
                               std::to_string(t + h));
    const double norm = space.norm(phi);
    const double defect = std::abs(norm - 1.0);
    max_defect = std::max(max_defect, defect);
    if (defect > 1e-10)
      throw std::runtime_error("evolve_hartree: norm drift " + std::to_string(defect) +
                               " above 1e-10 in one step; reduce dt");
    phi /= norm;
    fields.push_back(phi);
  }
  return HartreeTrajectory(space, 0.0, h, std::move(fields), max_defect);
}

OneBodyField one_body_ground_state(const LatticeSpace& space,
                                   const PotentialSchedule& schedule) {
  RMat h = space.laplacian;
  for (int j = 0; j < space.sites; ++j) h(j, j) += schedule.profile[j];
  Eigen::SelfAdjointEigenSolver<RMat> es(h);
  Vec phi = es.eigenvectors().col(0).cast<Complex>();
  // deterministic sign: largest-magnitude entry positive real
  int jmax = 0;
  for (int j = 1; j < space.sites; ++j)
    if (std::abs(phi[j]) > std::abs(phi[jmax])) jmax = j;
  phi *= std::abs(phi[jmax]) / phi[jmax];
  return OneBodyField::normalized(space, phi);
}

OneBodyField hartree_minimizer(const LatticeSpace& space, const PotentialSchedule& schedule,
                               const Interaction& vint, int max_iter, double tol) {
  OneBodyField phi = one_body_ground_state(space, schedule);
  const double mix = 0.5;
  for (int it = 0; it < max_iter; ++it) {
    RMat h = space.laplacian;
    const RVec mf = mean_field_potential(space, vint, phi);
    for (int j = 0; j < space.sites; ++j) h(j, j) += schedule.profile[j] + mf[j];
    Eigen::SelfAdjointEigenSolver<RMat> es(h);
    Vec next = es.eigenvectors().col(0).cast<Complex>();
    int jmax = 0;
    for (int j = 1; j < space.sites; ++j)
      if (std::abs(next[j]) > std::abs(next[jmax])) jmax = j;
    next *= std::abs(next[jmax]) / next[jmax];
    next = OneBodyField::normalized(space, next).values;
    if (next.dot(phi.values).real() < 0.0) next = -next;
    const Vec mixed = (1.0 - mix) * phi.values + mix * next;
    const OneBodyField cand = OneBodyField::normalized(space, mixed);
    const double delta = space.norm(Vec(cand.values - phi.values));
    phi = cand;
    if (delta < tol) return phi;
  }
  return phi;  // damped iteration is monotone enough at these sizes
}

}  // namespace bogolab
