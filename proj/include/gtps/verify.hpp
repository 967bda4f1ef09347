#ifndef GTPS_VERIFY_HPP
#define GTPS_VERIFY_HPP

#include <string>
#include <vector>

#include "gtps/models.hpp"
#include "gtps/optim.hpp"
#include "gtps/scrambling.hpp"
#include "gtps/sweep.hpp"

namespace gtps {

struct CheckResult {
  std::string name;
  bool pass = false;
  double tolerance = 0.0;
  double observed = 0.0;  // worst measured error
  std::string detail;
};

// second-order finite difference of D(A, Ad_{e^{i eps K}} A)^2 / eps^2,
// Richardson-extrapolated (D^2/eps^2 is even in eps)
inline double metric_fd(const AlgebraSpec& a, const cmat& k, double eps = 2e-2) {
  auto g = [&](double e) {
    const cmat u = unitary_exp(cxd(0.0, e) * k);
    const double dd = distance(a, conjugate(a, u));
    return dd * dd / (e * e);
  };
  return (4.0 * g(eps / 2) - g(eps)) / 3.0;
}

// Time-averaged MC A-OTOC over [0, T] by the trapezoid rule, for a factor
// algebra. The Haar average over X = 1 ⊗ u is carried out exactly per sampled
// Y (a first-moment identity; only partial traces of Y_t enter):
//   E_X ||[X, Y_t]||^2 / (2d) = 1 - ||Tr_sys(Y_t)||^2 / (d_sys^2 d_env),
// which removes the X-fluctuations from the estimator. One fixed Y per
// sample, averaged in time; the standard error is the spread of the
// per-sample time averages.
struct TimeAverage {
  double mean;
  double std_error;
};

inline TimeAverage otoc_time_average_mc(const AlgebraSpec& alg, const HamiltonianModel& ham,
                                        double t_max, int n_t, int n_samples, RngStream& rng) {
  detail::require_factor(alg, "otoc_time_average_mc");
  const Eigen::Index d_env = alg.blocks()[0].mult;
  const Eigen::Index d_sys = alg.blocks()[0].dim;
  const double denom = static_cast<double>(d_sys) * d_sys * d_env;

  // commutant unitaries expressed in the decomposition basis (env ⊗ sys)
  std::vector<cmat> ys;
  ys.reserve(static_cast<std::size_t>(n_samples));
  for (int s = 0; s < n_samples; ++s) {
    const cmat y = random_commutant_unitary(alg, rng);
    ys.push_back(alg.frame().adjoint() * y * alg.frame());
  }
  auto one = [&](const cmat& yt) {
    const cmat tr_sys = partial_trace_factor(yt, d_env, d_sys, Side::left);
    return 1.0 - tr_sys.squaredNorm() / denom;
  };
  std::vector<double> acc(static_cast<std::size_t>(n_samples), 0.0);
  const cmat phi_dec = alg.frame().adjoint() * ham.spec.eigenvectors;
  for (int j = 0; j <= n_t; ++j) {
    const double t = t_max * j / n_t;
    cvec ph(phi_dec.cols());
    for (Eigen::Index k = 0; k < phi_dec.cols(); ++k)
      ph(k) = std::exp(cxd(0.0, t * ham.spec.eigenvalues(k)));
    const cmat ut = phi_dec * ph.asDiagonal() * phi_dec.adjoint();
    const double w = (j == 0 || j == n_t) ? 0.5 : 1.0;
    for (int s = 0; s < n_samples; ++s) {
      const cmat yt = ut * ys[static_cast<std::size_t>(s)] * ut.adjoint();
      acc[static_cast<std::size_t>(s)] += w * 0.5 * (one(yt) + one(yt.adjoint()));
    }
  }
  double sum = 0.0, sumsq = 0.0;
  for (double& a : acc) {
    a /= n_t;
    sum += a;
    sumsq += a * a;
  }
  const double mean = sum / n_samples;
  const double var = std::max(0.0, sumsq / n_samples - mean * mean);
  return {mean, n_samples > 1 ? std::sqrt(var / (n_samples - 1)) : 0.0};
}

namespace detail {

inline cmat random_collinear_k(Eigen::Index d, RngStream& rng) {
  cmat k = random_hermitian(d, rng);
  return k / k.norm();
}

// Rejection-sample a Hamiltonian whose spectral gaps are pairwise separated.
// The spectrum is rescaled to the fixed window [-10, 10] (eigenvectors, and
// hence every Gram quantity, are untouched); a floor on the gap spacing makes
// the time average settle within T ~ 10^3 instead of 1/min|gap diff|.
inline HamiltonianModel random_nonresonant_hamiltonian(Eigen::Index d, RngStream& rng,
                                                       double min_spacing = 0.05) {
  for (int attempt = 0; attempt < 256; ++attempt) {
    const cmat g = random_hermitian(d, rng);
    const SpectralDecomp sd = eig_hermitian(g);
    const double lo = sd.eigenvalues(0), hi = sd.eigenvalues(d - 1);
    if (hi - lo < 1e-6) continue;
    const double scale = 20.0 / (hi - lo);
    const cmat h = scale * (g - lo * cmat::Identity(d, d)) - 10.0 * cmat::Identity(d, d);
    const HamiltonianModel ham = make_hamiltonian(h);
    double min_level_gap = 1e300;
    for (Eigen::Index k = 0; k + 1 < d; ++k)
      min_level_gap = std::min(min_level_gap, ham.spec.eigenvalues(k + 1) - ham.spec.eigenvalues(k));
    if (min_level_gap < min_spacing) continue;
    if (resonance_check(ham, min_spacing).count == 0) return ham;
  }
  throw std::runtime_error("random_nonresonant_hamiltonian: rejection sampling failed");
}

}  // namespace detail

// Metric closed form: kappa^2 ||Q(K)||^2 against the finite-difference
// squared-distance, random collinear algebras at d = 4, 8, 16.
// kappa_sq_fault exists for mutation smoke tests only.
inline CheckResult metric_oracle_check(std::uint64_t seed, double kappa_sq_fault = 1.0) {
  RngStream rng(seed, "verify/metric");
  CheckResult res{"metric-fd-oracle", true, 1e-5, 0.0, ""};
  int idx = 0;
  for (int rep = 0; rep < 20; ++rep) {
    AlgebraSpec a = [&]() -> AlgebraSpec {
      switch (idx++ % 6) {
        case 0: return maximal_abelian(2, haar_unitary(4, rng));
        case 1: return factor_bipartition(2, {0}, haar_unitary(4, rng));
        case 2: return maximal_abelian(3, haar_unitary(8, rng));
        case 3: return factor_bipartition(3, {0}, haar_unitary(8, rng));
        case 4: return maximal_abelian(4, haar_unitary(16, rng));
        default: return factor_bipartition(4, {0, 1}, haar_unitary(16, rng));
      }
    }();
    const cmat k = detail::random_collinear_k(a.dim(), rng);
    const double m = kappa_sq_fault * metric_element(a, k);
    const double fd = metric_fd(a, k);
    const double rel = std::abs(fd - m) / std::max(std::abs(fd), 1e-300);
    res.observed = std::max(res.observed, rel);
  }
  res.pass = res.observed < res.tolerance;
  res.detail = "max rel err over 20 collinear algebras, d in {4,8,16}";
  return res;
}

// NRC closed form vs the trapezoid time average of the MC A-OTOC
// n_t must keep the trapezoid comb away from the spectral frequencies:
// |omega|_max = 2 * width = 40 after normalization, so n_t > T*40/(2 pi).
inline CheckResult nrc_time_average_check(std::uint64_t seed,
                                          const std::vector<Eigen::Index>& dims = {4, 8},
                                          double t_max = 1e3, int n_t = 8192,
                                          int n_samples = 256) {
  RngStream rng(seed, "verify/nrc");
  CheckResult res{"nrc-vs-time-average", true, 0.0, 0.0, ""};
  double worst_margin = -1e300;
  int inst = 0;
  for (Eigen::Index d : dims) {
    const HamiltonianModel ham = detail::random_nonresonant_hamiltonian(d, rng);
    const AlgebraSpec bip = factor_bipartition(d == 4 ? 2 : 3, {0}, cmat::Identity(d, d));
    const double nrc = sigma_l_nrc_value(gram_matrices(bip, ham, cmat::Identity(d, d)));
    RngStream sub = rng.substream("ta/" + std::to_string(inst++));
    // smaller d has a wider per-sample spread; spend samples there
    const int ns = d == 4 ? 4 * n_samples : n_samples;
    const TimeAverage ta = otoc_time_average_mc(bip, ham, t_max, n_t, ns, sub);
    const double err = std::abs(nrc - ta.mean);
    const double tol = ta.std_error + 5e-3;
    if (err - tol > worst_margin) {
      worst_margin = err - tol;
      res.observed = err;
      res.tolerance = tol;
    }
    if (err > tol) res.pass = false;
  }
  res.detail = "|NRC - trapezoid MC average| vs (std err + 5e-3), d in {4,8}";
  return res;
}

// Gradient: directional finite differences against 2 Re Tr(Gamma† Z V),
// and the doubled-space swap route against the reduced-operator route
inline CheckResult gradient_check(std::uint64_t seed) {
  RngStream rng(seed, "verify/grad");
  CheckResult res{"gradient-fd-oracle", true, 1e-5, 0.0, ""};
  for (Eigen::Index d : {Eigen::Index{4}, Eigen::Index{16}}) {
    const int n = d == 4 ? 2 : 4;
    const AlgebraSpec bip =
        factor_bipartition(n, n == 2 ? std::vector<int>{0} : std::vector<int>{0, 1},
                           cmat::Identity(d, d));
    const HamiltonianModel ham = make_hamiltonian(random_hermitian(d, rng));
    const cmat v = haar_unitary(d, rng);
    const cmat gamma = euclid_gradient(bip, ham, v);
    for (int rep = 0; rep < 4; ++rep) {
      cmat z = cxd(0, 1) * random_hermitian(d, rng);
      z /= z.norm();
      const double s = 1e-6;
      const double fp = objective(bip, ham, unitary_exp(s * z) * v);
      const double fm = objective(bip, ham, unitary_exp(-s * z) * v);
      const double fd = (fp - fm) / (2 * s);
      // 2 Re Tr(Gamma† Z V) = 2 Re <Gamma, ZV>_HS
      const double an = 2.0 * (gamma.conjugate().cwiseProduct(z * v)).sum().real();
      const double rel = std::abs(fd - an) / std::max(std::abs(an), 1e-12);
      res.observed = std::max(res.observed, rel);
    }
    // dual-route agreement
    const cmat gamma2 = euclid_gradient_doubled(bip, ham, v);
    const double route_err = (gamma - gamma2).norm();
    if (route_err > 1e-10) {
      res.pass = false;
      res.detail = "doubled-space route deviates: " + std::to_string(route_err);
    }
  }
  if (res.observed >= res.tolerance) res.pass = false;
  if (res.detail.empty())
    res.detail = "max rel err of directional derivatives at d in {4,16}; routes agree to 1e-10";
  return res;
}

// covariance of sigma_s and sigma_l under simultaneous rotation
inline CheckResult covariance_check(std::uint64_t seed, int n_instances = 20) {
  RngStream rng(seed, "verify/cov");
  CheckResult res{"covariance", true, 1e-10, 0.0, ""};
  for (int rep = 0; rep < n_instances; ++rep) {
    const Eigen::Index d = rep % 2 == 0 ? 4 : 8;
    const int n = d == 4 ? 2 : 3;
    const AlgebraSpec alg = rep % 4 < 2 ? factor_bipartition(n, {0}, haar_unitary(d, rng))
                                        : maximal_abelian(n, haar_unitary(d, rng));
    cmat h = random_hermitian(d, rng);
    h /= h.norm();
    const cmat u = haar_unitary(d, rng);
    const double lhs_s = sigma_s(conjugate(alg, u), h);
    const double rhs_s = sigma_s(alg, u.adjoint() * h * u);
    res.observed = std::max(res.observed, std::abs(lhs_s - rhs_s));
    if (alg.blocks().size() == 1) {
      const HamiltonianModel ham = make_hamiltonian(h);
      const HamiltonianModel ham_rot = make_hamiltonian(u.adjoint() * h * u);
      const cmat id = cmat::Identity(d, d);
      const double lhs_l = sigma_l_nrc_value(gram_matrices(conjugate(alg, u), ham, id));
      const double rhs_l = sigma_l_nrc_value(gram_matrices(alg, ham_rot, id));
      res.observed = std::max(res.observed, std::abs(lhs_l - rhs_l));
    }
  }
  res.pass = res.observed < res.tolerance;
  res.detail = "sigma_s and sigma_l under simultaneous (algebra, H) rotation";
  return res;
}

inline std::vector<CheckResult> run_verify(std::uint64_t seed) {
  return {metric_oracle_check(seed), gradient_check(seed), covariance_check(seed),
          nrc_time_average_check(seed)};
}

}  // namespace gtps

#endif
