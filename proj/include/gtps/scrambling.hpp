#ifndef GTPS_SCRAMBLING_HPP
#define GTPS_SCRAMBLING_HPP

#include <cstdint>
#include <limits>
#include <tuple>
#include <vector>

#include "gtps/algebra.hpp"
#include "gtps/rng.hpp"
#include "gtps/spectral.hpp"

namespace gtps {

// short-time scrambling rate sigma_s = ||Q(H)||_2
inline double sigma_s(const AlgebraSpec& alg, const cmat& h) {
  require_hermitian(h, "sigma_s");
  return complement_projector(alg).apply(h).norm();
}

// Haar unitary inside the algebra: block-diagonal 1_n ⊗ u_J with u_J Haar on
// each irreducible factor (phases for abelian blocks), rotated by the frame.
inline cmat random_algebra_unitary(const AlgebraSpec& alg, RngStream& rng) {
  cmat u = cmat::Zero(alg.dim(), alg.dim());
  for (std::size_t j = 0; j < alg.blocks().size(); ++j) {
    const Eigen::Index o = alg.block_offset(j), n = alg.blocks()[j].mult, d = alg.blocks()[j].dim;
    const cmat uj = haar_unitary(d, rng);
    for (Eigen::Index e = 0; e < n; ++e) u.block(o + e * d, o + e * d, d, d) = uj;
  }
  return alg.frame() * u * alg.frame().adjoint();
}

// Haar unitary inside the commutant: u'_J ⊗ 1_d per block.
inline cmat random_commutant_unitary(const AlgebraSpec& alg, RngStream& rng) {
  cmat u = cmat::Zero(alg.dim(), alg.dim());
  for (std::size_t j = 0; j < alg.blocks().size(); ++j) {
    const Eigen::Index o = alg.block_offset(j), n = alg.blocks()[j].mult, d = alg.blocks()[j].dim;
    const cmat uj = haar_unitary(n, rng);
    for (Eigen::Index e = 0; e < n; ++e)
      for (Eigen::Index f = 0; f < n; ++f)
        u.block(o + e * d, o + f * d, d, d) = uj(e, f) * cmat::Identity(d, d);
  }
  return alg.frame() * u * alg.frame().adjoint();
}

struct OtocEstimate {
  double t;
  double mean;
  double std_error;
  int n_samples;
  std::uint64_t seed;
};

// Monte-Carlo A-OTOC G_A(t) = (1/2d) E[ ||[X, U_t Y U_t†]||_2^2 ] with
// antithetic (X,Y) / (X†,Y†) pairs.
inline OtocEstimate otoc_mc(const AlgebraSpec& alg, const HamiltonianModel& ham, double t,
                            int n_samples, RngStream& rng) {
  if (n_samples < 1) throw std::invalid_argument("otoc_mc: n_samples must be >= 1");
  const Eigen::Index d = alg.dim();
  const cmat ut = ham.spec.evolution(t);
  const double dd = static_cast<double>(d);
  // ||[X, Yt]||_2^2 / (2d) = 1 - Re Tr(Yt† X† Yt X)/d for unitary X, Yt
  auto one_sample = [dd](const cmat& x, const cmat& yt) {
    return 1.0 - ((x * yt).conjugate().cwiseProduct(yt * x)).sum().real() / dd;
  };
  double sum = 0.0, sumsq = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const cmat x = random_algebra_unitary(alg, rng);
    const cmat y = random_commutant_unitary(alg, rng);
    const cmat yt = ut * y * ut.adjoint();
    const double g =
        0.5 * (one_sample(x, yt) + one_sample(x.adjoint(), yt.adjoint()));
    sum += g;
    sumsq += g * g;
  }
  const double mean = sum / n_samples;
  const double var = std::max(0.0, sumsq / n_samples - mean * mean);
  const double se = n_samples > 1 ? std::sqrt(var / (n_samples - 1)) : 0.0;
  return OtocEstimate{t, mean, se, n_samples, rng.seed()};
}

// Gram matrices of the reduced rotated Hamiltonian eigenstates for a factor
// algebra, plus the normalized R^(0)/R^(1) views entering the closed form.
struct GramPair {
  rmat gram_a, gram_b;        // <rho_k^X, rho_l^X>, X = algebra side (a) / commutant side (b)
  Eigen::Index dim_a, dim_b;  // Hilbert factor dimensions

  rmat r0_a() const { return gram_b / static_cast<double>(dim_b); }
  rmat r1_a() const { return gram_a / static_cast<double>(dim_b); }
  rmat r0_b() const { return gram_a / static_cast<double>(dim_a); }
  rmat r1_b() const { return gram_b / static_cast<double>(dim_a); }
};

namespace detail {

inline void require_factor(const AlgebraSpec& alg, const char* what) {
  if (alg.blocks().size() != 1)
    throw std::invalid_argument(std::string(what) + ": factor (single-block) algebra required");
}

// columns psi_k = W† V phi_k, i.e. the rotated eigenvectors expressed in the
// decomposition basis (env ⊗ sys)
inline cmat rotated_eigvecs(const AlgebraSpec& alg, const HamiltonianModel& ham, const cmat& v) {
  return alg.frame().adjoint() * (v * ham.spec.eigenvectors);
}

struct ReducedStates {
  std::vector<cmat> sys, env;  // rho_k on each side
  Eigen::Index d_sys, d_env;
};

inline ReducedStates reduced_states(const cmat& psi, Eigen::Index d_env, Eigen::Index d_sys) {
  const Eigen::Index d = psi.rows();
  ReducedStates out;
  out.d_sys = d_sys;
  out.d_env = d_env;
  out.sys.reserve(d);
  out.env.reserve(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const Eigen::Map<const cmat> m(psi.col(k).data(), d_sys, d_env);  // column-major: m(s,e)
    // psi index = e*d_sys + s, so the map has sys along rows
    out.sys.push_back(m * m.adjoint());
    out.env.push_back((m.adjoint() * m).transpose());
  }
  return out;
}

inline rmat gram_of(const std::vector<cmat>& rho) {
  const Eigen::Index d = static_cast<Eigen::Index>(rho.size());
  rmat g(d, d);
  for (Eigen::Index k = 0; k < d; ++k)
    for (Eigen::Index l = 0; l <= k; ++l) {
      const double v = rho[static_cast<std::size_t>(k)]
                           .conjugate()
                           .cwiseProduct(rho[static_cast<std::size_t>(l)])
                           .sum()
                           .real();
      g(k, l) = v;
      g(l, k) = v;
    }
  return g;
}

}  // namespace detail

inline GramPair gram_matrices(const AlgebraSpec& bipartition, const HamiltonianModel& ham,
                              const cmat& v) {
  detail::require_factor(bipartition, "gram_matrices");
  require_unitary(v, "gram_matrices rotation");
  const Eigen::Index d_env = bipartition.blocks()[0].mult;
  const Eigen::Index d_sys = bipartition.blocks()[0].dim;
  const cmat psi = detail::rotated_eigvecs(bipartition, ham, v);
  const auto red = detail::reduced_states(psi, d_env, d_sys);
  return GramPair{detail::gram_of(red.sys), detail::gram_of(red.env), d_sys, d_env};
}

// NRC closed form of the infinite-time averaged A-OTOC, evaluated from
// the Gram matrices of the reduced rotated eigenstates.
inline double sigma_l_nrc_value(const GramPair& g) {
  const Eigen::Index d = g.dim_a * g.dim_b;
  const rmat r0a = g.r0_a(), r1a = g.r1_a(), r0b = g.r0_b(), r1b = g.r1_b();
  const double bulk = (r0a.cwiseProduct(r1b.transpose())).sum() +
                      (r0b.cwiseProduct(r1a.transpose())).sum();
  const double diag = r0a.diagonal().dot(r1b.diagonal()) + r0b.diagonal().dot(r1a.diagonal());
  return 1.0 - (bulk - 0.5 * diag) / static_cast<double>(d);
}

struct ResonanceReport {
  std::int64_t count = 0;             // gap coincidences below tol among distinct pairs
  double min_delta = 0.0;             // smallest |gap difference| observed
  double tol = 0.0;
  std::vector<std::tuple<int, int, int, int, double>> worst;  // (k,l,m,n,delta)
};

inline ResonanceReport resonance_check(const HamiltonianModel& ham, double tol) {
  const Eigen::Index d = ham.spec.dim();
  struct Gap {
    double value;
    int k, l;
  };
  std::vector<Gap> gaps;
  gaps.reserve(static_cast<std::size_t>(d * (d - 1) / 2));
  for (Eigen::Index k = 0; k < d; ++k)
    for (Eigen::Index l = k + 1; l < d; ++l)
      gaps.push_back({ham.spec.eigenvalues(l) - ham.spec.eigenvalues(k), static_cast<int>(k),
                      static_cast<int>(l)});
  std::sort(gaps.begin(), gaps.end(), [](const Gap& a, const Gap& b) { return a.value < b.value; });

  ResonanceReport rep;
  rep.tol = tol;
  rep.min_delta = std::numeric_limits<double>::infinity();
  std::size_t lo = 0;
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    const double delta = gaps[i].value - gaps[i - 1].value;
    if (delta < rep.min_delta) rep.min_delta = delta;
    while (gaps[i].value - gaps[lo].value >= tol) ++lo;
    rep.count += static_cast<std::int64_t>(i - lo);
    if (delta < tol && rep.worst.size() < 8)
      rep.worst.emplace_back(gaps[i - 1].k, gaps[i - 1].l, gaps[i].k, gaps[i].l, delta);
  }
  if (gaps.size() < 2) rep.min_delta = 0.0;
  return rep;
}

struct SigmaLong {
  double value;
  ResonanceReport resonances;
};

// Long-time average through the NRC closed form. The formula is evaluated
// regardless of the actual resonance structure (the sweeps cross integrable
// points where the NRC hypothesis fails); the diagnostic is attached instead
// of aborting.
inline SigmaLong sigma_l_nrc(const AlgebraSpec& bipartition, const HamiltonianModel& ham,
                             const cmat& v, double resonance_tol = 1e-8) {
  const double value = sigma_l_nrc_value(gram_matrices(bipartition, ham, v));
  return SigmaLong{value, resonance_check(ham, resonance_tol)};
}

}  // namespace gtps

#endif
