#include "bogolab/fock.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "bogolab/hartree.hpp"

namespace bogolab {

namespace {

bool lex_greater(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

std::size_t FockBasis::dimension_of(int particles, int modes) {
  // binomial(N + M - 1, N), saturating
  std::uint64_t res = 1;
  const std::uint64_t n = static_cast<std::uint64_t>(particles) + modes - 1;
  const std::uint64_t k = std::min<std::uint64_t>(particles, modes - 1);
  for (std::uint64_t i = 1; i <= k; ++i) {
    if (res > (std::uint64_t{1} << 52) / (n - k + i)) return SIZE_MAX;
    res = res * (n - k + i) / i;
  }
  return res;
}

std::shared_ptr<const FockBasis> FockBasis::make(int particles, int modes, std::size_t cap) {
  if (particles < 0) throw std::invalid_argument("FockBasis: negative particle number");
  if (modes < 1) throw std::invalid_argument("FockBasis: need at least one mode");
  const std::size_t d = dimension_of(particles, modes);
  if (d > cap)
    throw std::invalid_argument("FockBasis: dimension " + std::to_string(d) + " for N=" +
                                std::to_string(particles) + ", M=" + std::to_string(modes) +
                                " exceeds cap " + std::to_string(cap));
  auto basis = std::make_shared<FockBasis>();
  basis->particles_ = particles;
  basis->modes_ = modes;
  basis->dim_ = static_cast<int>(d);
  basis->flat_.reserve(d * modes);
  // lexicographically descending occupation vectors
  std::vector<std::uint32_t> occ(modes, 0);
  const std::function<void(int, int)> rec = [&](int mode, int remaining) {
    if (mode == modes - 1) {
      occ[mode] = static_cast<std::uint32_t>(remaining);
      basis->flat_.insert(basis->flat_.end(), occ.begin(), occ.end());
      return;
    }
    for (int c = remaining; c >= 0; --c) {
      occ[mode] = static_cast<std::uint32_t>(c);
      rec(mode + 1, remaining - c);
    }
  };
  rec(0, particles);
  return basis;
}

int FockBasis::find(std::span<const std::uint32_t> n) const {
  int lo = 0, hi = dim_;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (lex_greater(occ(mid), n))
      lo = mid + 1;
    else
      hi = mid;
  }
  if (lo < dim_ && std::equal(occ(lo).begin(), occ(lo).end(), n.begin())) return lo;
  return -1;
}

SectorBases::SectorBases(int modes, int k_max) : modes_(modes) { extend(k_max); }

void SectorBases::extend(int k_max) {
  for (int k = static_cast<int>(bases_.size()); k <= k_max; ++k)
    bases_.push_back(FockBasis::make(k, modes_));
}

const std::vector<std::int32_t>& SectorBases::creation_map(int k) {
  if (k + 1 > k_max()) extend(k + 1);
  if (static_cast<int>(creation_maps_.size()) <= k) creation_maps_.resize(k + 1);
  auto& map = creation_maps_[k];
  if (map.empty()) {
    const auto& from = *bases_[k];
    const auto& to = *bases_[k + 1];
    map.resize(static_cast<std::size_t>(from.dim()) * modes_);
    std::vector<std::uint32_t> tgt(modes_);
    for (int s = 0; s < from.dim(); ++s) {
      auto n = from.occ(s);
      std::copy(n.begin(), n.end(), tgt.begin());
      for (int u = 0; u < modes_; ++u) {
        tgt[u] += 1;
        map[static_cast<std::size_t>(s) * modes_ + u] = to.find(tgt);
        tgt[u] -= 1;
      }
    }
  }
  return map;
}

ManyBodyState product_state(const LatticeSpace& space, const OneBodyField& phi,
                            const BasisPtr& basis) {
  const Vec c = coefficient_vector(space, phi);
  const int n = basis->particles();
  Vec amps(basis->dim());
  for (int i = 0; i < basis->dim(); ++i) {
    auto occ = basis->occ(i);
    double lg = std::lgamma(n + 1.0);
    Complex prod = 1.0;
    for (int x = 0; x < basis->modes(); ++x) {
      lg -= std::lgamma(occ[x] + 1.0);
      for (std::uint32_t j = 0; j < occ[x]; ++j) prod *= c[x];
    }
    amps[i] = std::exp(0.5 * lg) * prod;
  }
  amps /= amps.norm();
  return ManyBodyState{basis, std::move(amps)};
}

// -- SecondQuantizedOp -------------------------------------------------------

SecondQuantizedOp::SecondQuantizedOp(BasisPtr basis, bool with_two_body)
    : basis_(std::move(basis)), two_body_(with_two_body) {
  const int m = basis_->modes();
  const int dim = basis_->dim();
  const int m2 = m * m;
  kernel_.assign(two_body_ ? m2 + m2 * m2 : m2, Complex{0.0, 0.0});

  struct RawEntry {
    std::int32_t row, col, kernel_index;
    double weight;
  };
  std::vector<RawEntry> raw;
  raw.reserve(static_cast<std::size_t>(dim) * (two_body_ ? 32 * m2 : 2 * m2));

  std::vector<std::uint32_t> n1(m), n2(m), n3(m), tgt(m);
  for (int s = 0; s < dim; ++s) {
    auto n = basis_->occ(s);
    // one-body: sum A_xy a^dag_x a_y
    for (int y = 0; y < m; ++y) {
      if (n[y] == 0) continue;
      std::copy(n.begin(), n.end(), tgt.begin());
      tgt[y] -= 1;
      const double fy = std::sqrt(static_cast<double>(n[y]));
      for (int x = 0; x < m; ++x) {
        tgt[x] += 1;
        const int t = basis_->find(tgt);
        raw.push_back({t, s, x * m + y, fy * std::sqrt(static_cast<double>(tgt[x]))});
        tgt[x] -= 1;
      }
    }
    if (!two_body_) continue;
    // two-body: 1/2 sum V_{(x y),(x' y')} a^dag_x a^dag_y a_{y'} a_{x'}
    for (int xp = 0; xp < m; ++xp) {
      if (n[xp] == 0) continue;
      std::copy(n.begin(), n.end(), n1.begin());
      n1[xp] -= 1;
      const double f1 = std::sqrt(static_cast<double>(n[xp]));
      for (int yp = 0; yp < m; ++yp) {
        if (n1[yp] == 0) continue;
        std::copy(n1.begin(), n1.end(), n2.begin());
        n2[yp] -= 1;
        const double f2 = std::sqrt(static_cast<double>(n1[yp]));
        for (int y = 0; y < m; ++y) {
          std::copy(n2.begin(), n2.end(), n3.begin());
          n3[y] += 1;
          const double f3 = std::sqrt(static_cast<double>(n3[y]));
          for (int x = 0; x < m; ++x) {
            n3[x] += 1;
            const int t = basis_->find(n3);
            raw.push_back({t, s, m2 + (x * m + y) * m2 + (xp * m + yp),
                           0.5 * f1 * f2 * f3 * std::sqrt(static_cast<double>(n3[x]))});
            n3[x] -= 1;
          }
        }
      }
    }
  }

  // unique (row, col) pairs -> CSR slots
  std::vector<std::uint64_t> keys(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    keys[i] = (static_cast<std::uint64_t>(raw[i].row) << 32) | static_cast<std::uint32_t>(raw[i].col);
  std::vector<std::uint64_t> uniq = keys;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

  row_start_.assign(dim + 1, 0);
  col_.resize(uniq.size());
  val_.assign(uniq.size(), Complex{0.0, 0.0});
  for (std::size_t i = 0; i < uniq.size(); ++i) {
    const int r = static_cast<int>(uniq[i] >> 32);
    col_[i] = static_cast<std::int32_t>(uniq[i] & 0xffffffffu);
    row_start_[r + 1] = static_cast<std::int64_t>(i + 1);
  }
  for (int r = 0; r < dim; ++r) row_start_[r + 1] = std::max(row_start_[r + 1], row_start_[r]);

  contributions_.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto it = std::lower_bound(uniq.begin(), uniq.end(), keys[i]);
    contributions_[i] = {static_cast<std::int32_t>(it - uniq.begin()), raw[i].kernel_index,
                         raw[i].weight};
  }
}

void SecondQuantizedOp::set_one_body(const Mat& A) {
  const int m = basis_->modes();
  if (A.rows() != m || A.cols() != m)
    throw std::invalid_argument("SecondQuantizedOp: one-body dimension mismatch");
  for (int y = 0; y < m; ++y)
    for (int x = 0; x < m; ++x) kernel_[x * m + y] = A(x, y);
  if (two_body_) std::fill(kernel_.begin() + m * m, kernel_.end(), Complex{0.0, 0.0});
  refresh();
}

void SecondQuantizedOp::set(const Mat& A, const Mat& V, double lambda) {
  const int m = basis_->modes();
  const int m2 = m * m;
  if (!two_body_) throw std::logic_error("SecondQuantizedOp: built without a two-body channel");
  if (A.rows() != m || V.rows() != m2)
    throw std::invalid_argument("SecondQuantizedOp: kernel dimension mismatch");
  // reject kernels that are not exchange symmetric
  double scale = 1e-300, defect = 0.0;
  for (int x = 0; x < m; ++x)
    for (int y = 0; y < m; ++y)
      for (int xp = 0; xp < m; ++xp)
        for (int yp = 0; yp < m; ++yp) {
          const Complex v = V(x * m + y, xp * m + yp);
          scale = std::max(scale, std::abs(v));
          defect = std::max(defect, std::abs(v - V(y * m + x, yp * m + xp)));
        }
  if (defect > 1e-10 * scale)
    throw std::invalid_argument("SecondQuantizedOp: two-body kernel not exchange symmetric");
  for (int y = 0; y < m; ++y)
    for (int x = 0; x < m; ++x) kernel_[x * m + y] = A(x, y);
  for (int i = 0; i < m2; ++i)
    for (int j = 0; j < m2; ++j) kernel_[m2 + i * m2 + j] = lambda * V(i, j);
  refresh();
}

void SecondQuantizedOp::refresh() {
  std::fill(val_.begin(), val_.end(), Complex{0.0, 0.0});
  for (const auto& c : contributions_) val_[c.slot] += c.weight * kernel_[c.kernel_index];
}

Vec SecondQuantizedOp::apply(const Vec& v) const {
  const int dim = basis_->dim();
  if (v.size() != dim) throw std::invalid_argument("SecondQuantizedOp: state dimension mismatch");
  Vec out = Vec::Zero(dim);
  for (int r = 0; r < dim; ++r) {
    Complex acc{0.0, 0.0};
    for (std::int64_t i = row_start_[r]; i < row_start_[r + 1]; ++i) acc += val_[i] * v[col_[i]];
    out[r] = acc;
  }
  return out;
}

Mat SecondQuantizedOp::dense() const {
  const int dim = basis_->dim();
  Mat out = Mat::Zero(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (std::int64_t i = row_start_[r]; i < row_start_[r + 1]; ++i) out(r, col_[i]) = val_[i];
  return out;
}

double SecondQuantizedOp::op_norm_bound() const {
  double best = 0.0;
  for (int r = 0; r < basis_->dim(); ++r) {
    double acc = 0.0;
    for (std::int64_t i = row_start_[r]; i < row_start_[r + 1]; ++i) acc += std::abs(val_[i]);
    best = std::max(best, acc);
  }
  return best;
}

Mat dense_one_body_operator(const Mat& A, const BasisPtr& basis) {
  SecondQuantizedOp op(basis, false);
  op.set_one_body(A);
  return op.dense();
}

Mat dense_two_body_operator(const Mat& V, const BasisPtr& basis) {
  SecondQuantizedOp op(basis, true);
  op.set(Mat::Zero(basis->modes(), basis->modes()), V, 1.0);
  return op.dense();
}

Vec apply_creation(const Vec& f, const Vec& in, const FockBasis& from, const FockBasis& to) {
  if (to.particles() != from.particles() + 1 || to.modes() != from.modes())
    throw std::invalid_argument("apply_creation: incompatible sectors");
  const int m = from.modes();
  Vec out = Vec::Zero(to.dim());
  std::vector<std::uint32_t> tgt(m);
  for (int s = 0; s < from.dim(); ++s) {
    if (in[s] == Complex{0.0, 0.0}) continue;
    auto n = from.occ(s);
    std::copy(n.begin(), n.end(), tgt.begin());
    for (int u = 0; u < m; ++u) {
      if (f[u] == Complex{0.0, 0.0}) continue;
      tgt[u] += 1;
      out[to.find(tgt)] += f[u] * std::sqrt(static_cast<double>(tgt[u])) * in[s];
      tgt[u] -= 1;
    }
  }
  return out;
}

Vec apply_annihilation(const Vec& f, const Vec& in, const FockBasis& from, const FockBasis& to) {
  if (to.particles() != from.particles() - 1 || to.modes() != from.modes())
    throw std::invalid_argument("apply_annihilation: incompatible sectors");
  const int m = from.modes();
  Vec out = Vec::Zero(to.dim());
  std::vector<std::uint32_t> tgt(m);
  for (int s = 0; s < from.dim(); ++s) {
    if (in[s] == Complex{0.0, 0.0}) continue;
    auto n = from.occ(s);
    std::copy(n.begin(), n.end(), tgt.begin());
    for (int u = 0; u < m; ++u) {
      if (n[u] == 0 || f[u] == Complex{0.0, 0.0}) continue;
      tgt[u] -= 1;
      out[to.find(tgt)] += std::conj(f[u]) * std::sqrt(static_cast<double>(n[u])) * in[s];
      tgt[u] += 1;
    }
  }
  return out;
}

Vec apply_annihilation_mode(int x, const Vec& in, const FockBasis& from, const FockBasis& to) {
  Vec f = Vec::Zero(from.modes());
  f[x] = 1.0;
  return apply_annihilation(f, in, from, to);
}

Vec fock_basis_change(const Vec& in, const FockBasis& source, const Mat& mode_coords,
                      SectorBases& target_sectors) {
  const int n = source.particles();
  const int ms = source.modes();
  const int mt = target_sectors.modes();
  if (mode_coords.cols() != ms)
    throw std::invalid_argument("fock_basis_change: mode coordinate mismatch");
  if (mt != mode_coords.rows())
    throw std::invalid_argument("fock_basis_change: target sector mismatch");
  target_sectors.extend(n);
  // sqrt tables and creation maps shared across all chains
  std::vector<const std::vector<std::int32_t>*> cmap(n);
  for (int k = 0; k < n; ++k) cmap[k] = &target_sectors.creation_map(k);
  std::vector<double> sq(static_cast<std::size_t>(n) + 2);
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = std::sqrt(static_cast<double>(i));

  Vec out = Vec::Zero(target_sectors.at(n)->dim());
  Vec cur, next;
  for (int s = 0; s < source.dim(); ++s) {
    if (in[s] == Complex{0.0, 0.0}) continue;
    auto occ = source.occ(s);
    cur = Vec::Ones(1);
    int k = 0;
    for (int x = 0; x < ms; ++x) {
      for (std::uint32_t j = 1; j <= occ[x]; ++j) {
        const auto& from = *target_sectors.at(k);
        const auto& to = *target_sectors.at(k + 1);
        const auto& map = *cmap[k];
        next = Vec::Zero(to.dim());
        const double jnorm = 1.0 / sq[j];
        for (int src = 0; src < from.dim(); ++src) {
          const Complex amp = cur[src] * jnorm;
          if (amp == Complex{0.0, 0.0}) continue;
          auto nf = from.occ(src);
          for (int u = 0; u < mt; ++u) {
            const Complex fu = mode_coords(u, x);
            if (fu == Complex{0.0, 0.0}) continue;
            next[map[static_cast<std::size_t>(src) * mt + u]] += fu * sq[nf[u] + 1] * amp;
          }
        }
        cur.swap(next);
        ++k;
      }
    }
    out += in[s] * cur;
  }
  return out;
}

Mat condensate_frame(const LatticeSpace& space, const OneBodyField& phi) {
  const int m = space.sites;
  const Vec c = coefficient_vector(space, phi);
  Mat seed(m, m);
  seed.col(0) = c;
  for (int j = 1; j < m; ++j) seed.col(j) = Vec::Unit(m, j - 1);
  Eigen::HouseholderQR<Mat> qr(seed);
  Mat frame = qr.householderQ();
  Complex z = frame.col(0).dot(c);
  z /= std::abs(z);
  frame.col(0) *= z;
  frame.col(0) = c;  // exact first column; complement stays orthonormal to roundoff
  return frame;
}

// -- weights -----------------------------------------------------------------

WeightFunction WeightFunction::shifted(int d) const {
  const int n = static_cast<int>(values.size()) - 1;
  WeightFunction out;
  out.values = RVec::Zero(n + 1);
  for (int k = 0; k <= n; ++k) {
    const int kd = k + d;
    if (kd >= 0 && kd <= n) out.values[k] = values[kd];
  }
  return out;
}

WeightFunction WeightFunction::m_weight(int N) {
  WeightFunction f;
  f.values = RVec::LinSpaced(N + 1, 0.0, 1.0);
  return f;
}

WeightFunction WeightFunction::n_weight(int N) {
  WeightFunction f = m_weight(N);
  f.values = f.values.cwiseSqrt();
  return f;
}

WeightFunction WeightFunction::mu_weight(int N) {
  WeightFunction f;
  f.values = RVec::Zero(N + 1);
  for (int k = 1; k <= N; ++k) f.values[k] = static_cast<double>(N) / k;
  return f;
}

WeightFunction WeightFunction::nu_weight(int N) {
  WeightFunction f = mu_weight(N);
  f.values = f.values.cwiseSqrt();
  return f;
}

WeightFunction WeightFunction::parity(int N, bool odd) {
  WeightFunction f;
  f.values = RVec::Zero(N + 1);
  for (int k = 0; k <= N; ++k) f.values[k] = (k % 2 == (odd ? 1 : 0)) ? 1.0 : 0.0;
  return f;
}

// -- SectorCalculus ----------------------------------------------------------

SectorCalculus::SectorCalculus(const LatticeSpace& space, const OneBodyField& phi,
                               BasisPtr basis)
    : space_(space),
      phi_(phi),
      basis_(std::move(basis)),
      frame_(condensate_frame(space, phi)),
      full_sectors_(space.sites, basis_->particles()),
      rotated_sectors_(std::max(space.sites - 1, 1), basis_->particles()) {
  if (phi_.norm_defect(space_) > 1e-10)
    throw std::invalid_argument("SectorCalculus: field not normalized");
}

Vec SectorCalculus::to_rotated(const Vec& amplitudes) const {
  return fock_basis_change(amplitudes, *basis_, frame_.adjoint(), full_sectors_);
}

Vec SectorCalculus::from_rotated(const Vec& rotated) const {
  return fock_basis_change(rotated, *basis_, frame_, full_sectors_);
}

SectorResolution SectorCalculus::resolve(const ManyBodyState& psi) const {
  const int n = basis_->particles();
  const int m = space_.sites;
  const Vec rot = to_rotated(psi.amplitudes);
  SectorResolution out;
  out.sectors = std::make_shared<SectorBases>(m, n);
  out.chi.resize(n + 1);
  out.weights.assign(n + 1, 0.0);
  const Mat complement = frame_.rightCols(m - 1);
  std::vector<std::uint32_t> full(m);
  for (int k = 0; k <= n; ++k) {
    const auto& small = rotated_sectors_.at(k);
    Vec slice(small->dim());
    for (int i = 0; i < small->dim(); ++i) {
      auto mocc = small->occ(i);
      full[0] = static_cast<std::uint32_t>(n - k);
      std::copy(mocc.begin(), mocc.end(), full.begin() + 1);
      slice[i] = rot[basis_->find(full)];
    }
    out.weights[k] = slice.squaredNorm();
    out.chi[k] = fock_basis_change(slice, *small, complement, *out.sectors);
  }
  return out;
}

ManyBodyState SectorCalculus::assemble(const std::vector<Vec>& chi) const {
  const int n = basis_->particles();
  const Vec cphi = coefficient_vector(space_, phi_);
  Vec out = Vec::Zero(basis_->dim());
  for (int k = 0; k < static_cast<int>(chi.size()); ++k) {
    if (k > n) throw std::invalid_argument("SectorCalculus::assemble: sector beyond N");
    if (chi[k].size() == 0 || chi[k].isZero(0.0)) continue;
    Vec cur = chi[k];
    for (int j = 1; j <= n - k; ++j) {
      cur = apply_creation(cphi, cur, *full_sectors_.at(k + j - 1), *full_sectors_.at(k + j));
      cur /= std::sqrt(static_cast<double>(j));
    }
    out += cur;
  }
  return ManyBodyState{basis_, std::move(out)};
}

ManyBodyState SectorCalculus::sector_project(int k, const ManyBodyState& psi) const {
  const int n = basis_->particles();
  if (k < 0 || k > n) throw std::invalid_argument("sector_project: k outside [0, N]");
  WeightFunction f;
  f.values = RVec::Zero(n + 1);
  f.values[k] = 1.0;
  return apply_weight(f, psi);
}

ManyBodyState SectorCalculus::apply_weight(const WeightFunction& f,
                                           const ManyBodyState& psi) const {
  const int n = basis_->particles();
  if (f.values.size() != n + 1)
    throw std::invalid_argument("apply_weight: weight length must be N + 1");
  Vec rot = to_rotated(psi.amplitudes);
  for (int i = 0; i < basis_->dim(); ++i) {
    const int k = n - static_cast<int>(basis_->occ(i)[0]);
    rot[i] *= f.values[k];
  }
  return ManyBodyState{basis_, from_rotated(rot)};
}

std::pair<ManyBodyState, ManyBodyState> SectorCalculus::parity_split(
    const ManyBodyState& psi) const {
  const int n = basis_->particles();
  return {apply_weight(WeightFunction::parity(n, true), psi),
          apply_weight(WeightFunction::parity(n, false), psi)};
}

double SectorCalculus::counting_expectation(const ManyBodyState& psi, int n) const {
  const int N = basis_->particles();
  if (n < 0 || n > N) throw std::invalid_argument("counting_expectation: need 0 <= n <= N");
  if (n == 0) return psi.amplitudes.squaredNorm();
  const Vec rot = to_rotated(psi.amplitudes);
  RVec weights = RVec::Zero(N + 1);
  for (int i = 0; i < basis_->dim(); ++i) {
    const int k = N - static_cast<int>(basis_->occ(i)[0]);
    weights[k] += std::norm(rot[i]);
  }
  double acc = 0.0;
  for (int k = 0; k <= N; ++k) {
    double factor = 1.0;
    for (int j = 0; j < n; ++j) factor *= static_cast<double>(k - j) / (N - j);
    if (k >= n) acc += factor * weights[k];
  }
  return acc;
}

// -- hamiltonians ------------------------------------------------------------

double lambda_coupling(int N) {
  if (N < 2) throw std::invalid_argument("lambda_N = 1/(N-1) requires N >= 2");
  return 1.0 / (N - 1);
}

FullHamiltonian::FullHamiltonian(const LatticeSpace& space, const PotentialSchedule& schedule,
                                 const Interaction& vint, BasisPtr basis)
    : space_(space),
      schedule_(schedule),
      vint_(vint),
      v2_(two_body_multiplication(space, vint)),
      op_(std::move(basis), true) {
  lambda_coupling(op_.basis()->particles());
  prepare(0.0);
}

void FullHamiltonian::prepare(double t) {
  op_.set(assemble_one_body(space_, schedule_, t), v2_,
          lambda_coupling(op_.basis()->particles()));
}

TildeHamiltonian::TildeHamiltonian(const LatticeSpace& space, const PotentialSchedule& schedule,
                                   const Interaction& vint, BasisPtr basis,
                                   const HartreeTrajectory& traj)
    : space_(space), schedule_(schedule), vint_(vint), traj_(&traj), op_(std::move(basis), true) {
  lambda_coupling(op_.basis()->particles());
  prepare(traj.t0());
}

void TildeHamiltonian::prepare(double t) {
  const OneBodyField phi = traj_->field_at(t);
  op_.set(hartree_hamiltonian(space_, schedule_, vint_, phi, t),
          tilde_pair_kernel(space_, vint_, phi), lambda_coupling(op_.basis()->particles()));
}

// -- propagation -------------------------------------------------------------

namespace {

// one midpoint-frozen exponential step by Hermitian Lanczos; splits the step
// when the subspace does not converge
void krylov_step(const std::function<Vec(const Vec&)>& apply, Vec& psi, double dt, double tol,
                 int m_max, int depth, PropagationStats& stats) {
  const double beta0 = psi.norm();
  if (beta0 == 0.0) return;
  const int dim = static_cast<int>(psi.size());
  const int mm = std::min(m_max, dim);
  std::vector<Vec> basis;
  basis.reserve(mm);
  basis.push_back(psi / beta0);
  std::vector<double> alpha, beta;
  for (int j = 0; j < mm; ++j) {
    Vec w = apply(basis[j]);
    const double a = std::real(basis[j].dot(w));
    alpha.push_back(a);
    w -= a * basis[j];
    if (j > 0) w -= beta[j - 1] * basis[j - 1];
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& v : basis) w -= v.dot(w) * v;
    const double b = w.norm();

    const int k = j + 1;
    RMat t = RMat::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<RMat> es(t);
    const Mat z = es.eigenvectors().cast<Complex>();
    const Vec phases = (-kI * dt * es.eigenvalues().cast<Complex>().array()).exp().matrix();
    const Vec u = z * phases.cwiseProduct(z.adjoint().col(0));
    const double err = b * std::abs(u[k - 1]) * std::min(1.0, std::abs(dt));
    const bool happy = b < 1e-13 * (1.0 + std::abs(a));
    if (err < tol || happy || k == dim) {
      Vec out = Vec::Zero(dim);
      for (int i = 0; i < k; ++i) out += u[i] * basis[i];
      psi = beta0 * out;
      stats.max_krylov_dim = std::max(stats.max_krylov_dim, k);
      return;
    }
    if (k == mm) break;
    beta.push_back(b);
    basis.push_back(w / b);
  }
  if (depth == 0)
    throw std::runtime_error(
        "Krylov propagation did not converge; refine dt (step splitting exhausted)");
  stats.krylov_refinements += 1;
  krylov_step(apply, psi, dt / 2, tol, m_max, depth - 1, stats);
  krylov_step(apply, psi, dt / 2, tol, m_max, depth - 1, stats);
}

}  // namespace

void propagate(Vec& psi, const std::function<void(double)>& prepare,
               const std::function<Vec(const Vec&)>& apply, int dim, bool generator_static,
               double t0, double t1, double dt, const PropagationOptions& opts,
               PropagationStats& stats, const std::function<void(double, const Vec&)>& on_step) {
  if (!(dt > 0.0)) throw std::invalid_argument("propagate: dt must be positive");
  if (t1 < t0) throw std::invalid_argument("propagate: t1 < t0");
  const double span = t1 - t0;
  if (span == 0.0) return;
  const long nsteps = std::max<long>(1, std::lround(span / dt));
  const double h = span / nsteps;

  Mat evecs;
  Vec phases;
  Eigen::VectorXd evals;
  bool dense_ready = false;
  if (generator_static && dim <= opts.dense_cutoff) {
    prepare(t0 + 0.5 * h);
    Mat hmat(dim, dim);
    for (int j = 0; j < dim; ++j) hmat.col(j) = apply(Vec::Unit(dim, j));
    Eigen::SelfAdjointEigenSolver<Mat> es(hmat);
    evecs = es.eigenvectors();
    evals = es.eigenvalues();
    phases = (-kI * h * evals.cast<Complex>().array()).exp().matrix();
    dense_ready = true;
  }

  for (long step = 0; step < nsteps; ++step) {
    const double t = t0 + step * h;
    if (dense_ready) {
      psi = evecs * (phases.asDiagonal() * (evecs.adjoint() * psi));
    } else {
      prepare(t + 0.5 * h);
      krylov_step(apply, psi, h, opts.krylov_tol, opts.krylov_max_dim, opts.max_refine_depth,
                  stats);
    }
    stats.steps += 1;
    stats.max_norm_drift = std::max(stats.max_norm_drift, std::abs(psi.norm() - 1.0));
    if (on_step) on_step(t + h, psi);
  }
}

// -- ground state ------------------------------------------------------------

GroundStateResult ground_state(const std::function<Vec(const Vec&)>& apply, int dim, double tol,
                               int max_iter) {
  GroundStateResult out;
  if (dim <= 512) {
    Mat hmat(dim, dim);
    for (int j = 0; j < dim; ++j) hmat.col(j) = apply(Vec::Unit(dim, j));
    Eigen::SelfAdjointEigenSolver<Mat> es(hmat);
    out.energy = es.eigenvalues()[0];
    out.state = es.eigenvectors().col(0);
    out.residual = (apply(out.state) - out.energy * out.state).norm();
    out.iterations = 1;
    if (out.residual >= tol)
      throw std::runtime_error("ground_state: dense residual above tolerance");
    return out;
  }
  // Lanczos with full reorthogonalization, restarted on the best Ritz vector
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = Complex{gauss(rng), gauss(rng)};
  v /= v.norm();
  const int m = std::min(dim, 160);
  int iterations = 0;
  for (int restart = 0; restart < std::max(1, max_iter / m); ++restart) {
    std::vector<Vec> basis{v};
    std::vector<double> alpha, beta;
    for (int j = 0; j < m; ++j) {
      Vec w = apply(basis[j]);
      const double a = std::real(basis[j].dot(w));
      alpha.push_back(a);
      w -= a * basis[j];
      if (j > 0) w -= beta[j - 1] * basis[j - 1];
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : basis) w -= q.dot(w) * q;
      const double b = w.norm();
      ++iterations;
      if (b < 1e-13 || j == m - 1) break;
      beta.push_back(b);
      basis.push_back(w / b);
    }
    const int k = static_cast<int>(alpha.size());
    RMat t = RMat::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<RMat> es(t);
    Vec ritz = Vec::Zero(dim);
    for (int i = 0; i < k; ++i) ritz += es.eigenvectors()(i, 0) * basis[i];
    ritz /= ritz.norm();
    out.energy = es.eigenvalues()[0];
    out.state = ritz;
    out.residual = (apply(ritz) - out.energy * ritz).norm();
    out.iterations = iterations;
    if (out.residual < tol) return out;
    v = ritz;
  }
  throw std::runtime_error("ground_state: Lanczos did not converge after max iterations");
}

// -- reduced densities -------------------------------------------------------

Mat reduced_density(const ManyBodyState& psi, int k) {
  const int n = psi.basis->particles();
  const int m = psi.basis->modes();
  if (k < 1 || k > 2) throw std::invalid_argument("reduced_density: only k <= 2 supported");
  if (k > n) throw std::invalid_argument("reduced_density: k exceeds particle number");
  if (k == 1) {
    const auto lower = FockBasis::make(n - 1, m);
    std::vector<Vec> w(m);
    for (int x = 0; x < m; ++x)
      w[x] = apply_annihilation_mode(x, psi.amplitudes, *psi.basis, *lower);
    Mat g(m, m);
    for (int x = 0; x < m; ++x)
      for (int y = 0; y < m; ++y) g(x, y) = w[y].dot(w[x]) / static_cast<double>(n);
    return g;
  }
  const auto mid = FockBasis::make(n - 1, m);
  const auto lower = FockBasis::make(n - 2, m);
  std::vector<Vec> w(static_cast<std::size_t>(m) * m);
  for (int x = 0; x < m; ++x) {
    const Vec ax = apply_annihilation_mode(x, psi.amplitudes, *psi.basis, *mid);
    for (int y = 0; y < m; ++y)
      w[static_cast<std::size_t>(x) * m + y] = apply_annihilation_mode(y, ax, *mid, *lower);
  }
  const double denom = static_cast<double>(n) * (n - 1);
  Mat g(m * m, m * m);
  for (int i = 0; i < m * m; ++i)
    for (int j = 0; j < m * m; ++j) g(i, j) = w[j].dot(w[i]) / denom;
  return g;
}

}  // namespace bogolab
