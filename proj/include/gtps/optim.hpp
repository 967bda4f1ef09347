#ifndef GTPS_OPTIM_HPP
#define GTPS_OPTIM_HPP

#include <vector>

#include "gtps/scrambling.hpp"

namespace gtps {

struct OptConfig {
  double epsilon = 1e-10;  // convergence: |f(V^{k+1}) - f(V^k)| <= epsilon
  int max_iters = 10000;
  double mu0 = 0.1;
  double mu_min = 1e-8;
  double mu_max = 1.0;
  double grad_tol = 1e-8;     // stationarity exit
  int reorth_every = 100;     // polar re-orthonormalization cadence
  std::uint64_t seed = 0;     // carried into sweep records
};

struct TracePoint {
  int iter;
  double f;
  double grad_norm;
  double mu;
};

struct OptState {
  cmat v;  // unitary iterate
  double f = 0.0;
  double mu = 0.0;
  int iter = 0;
  bool converged = false;
  std::vector<TracePoint> trace;
};

namespace detail {

// canonical-coordinate evaluation: everything is a function of psi = W† V Phi
struct NrcWork {
  Eigen::Index d_sys, d_env, d;
  cmat psi;  // rotated eigenvectors in the decomposition basis
  std::vector<cmat> rho_sys, rho_env;
  rmat g_sys, g_env;

  void compute(cmat psi_, Eigen::Index d_env_, Eigen::Index d_sys_) {
    d_sys = d_sys_;
    d_env = d_env_;
    d = psi_.rows();
    psi = std::move(psi_);
    auto red = reduced_states(psi, d_env, d_sys);
    rho_sys = std::move(red.sys);
    rho_env = std::move(red.env);
    g_sys = gram_of(rho_sys);
    g_env = gram_of(rho_env);
  }

  double objective() const {
    double s = 0.0;
    for (Eigen::Index k = 0; k < d; ++k)
      for (Eigen::Index l = 0; l < d; ++l) {
        const double w = k == l ? 0.5 : 1.0;
        s += w * (g_sys(k, l) * g_sys(k, l) + g_env(k, l) * g_env(k, l));
      }
    return 1.0 - s / (static_cast<double>(d) * static_cast<double>(d));
  }

  // Gamma in canonical coordinates: -(4/d²) Σ_k M_k psi_k phi_k† with
  // M_k = Σ_l (1-δ_kl/2) [ G^env_kl (rho^env_l ⊗ 1) + G^sys_kl (1 ⊗ rho^sys_l) ]
  cmat gradient(const cmat& eigvecs) const {
    cmat gamma = cmat::Zero(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
      cmat c_sys = cmat::Zero(d_sys, d_sys);
      cmat c_env = cmat::Zero(d_env, d_env);
      for (Eigen::Index l = 0; l < d; ++l) {
        const double w = k == l ? 0.5 : 1.0;
        c_sys += w * g_sys(k, l) * rho_sys[static_cast<std::size_t>(l)];
        c_env += w * g_env(k, l) * rho_env[static_cast<std::size_t>(l)];
      }
      const Eigen::Map<const cmat> m(psi.col(k).data(), d_sys, d_env);
      const cmat y = c_sys * m + m * c_env.transpose();
      const Eigen::Map<const cvec> yv(y.data(), d);
      gamma.noalias() += yv * eigvecs.col(k).adjoint();
    }
    return -4.0 / (static_cast<double>(d) * static_cast<double>(d)) * gamma;
  }
};

}  // namespace detail

// f(V) = NRC long-time average of the A-OTOC for the V-rotated Hamiltonian
inline double objective(const AlgebraSpec& bipartition, const HamiltonianModel& ham,
                        const cmat& v) {
  detail::require_factor(bipartition, "objective");
  detail::NrcWork work;
  work.compute(detail::rotated_eigvecs(bipartition, ham, v), bipartition.blocks()[0].mult,
               bipartition.blocks()[0].dim);
  return work.objective();
}

// Euclidean gradient Gamma_V with delta f = 2 Re Tr(Gamma† delta V);
// reduced-operator form (production path)
inline cmat euclid_gradient(const AlgebraSpec& bipartition, const HamiltonianModel& ham,
                            const cmat& v) {
  detail::require_factor(bipartition, "euclid_gradient");
  detail::NrcWork work;
  work.compute(detail::rotated_eigvecs(bipartition, ham, v), bipartition.blocks()[0].mult,
               bipartition.blocks()[0].dim);
  return bipartition.frame() * work.gradient(ham.spec.eigenvectors);
}

// Doubled-space swap-operator route for Gamma_V (test oracle, d <= 16):
// Gram weights and reduced operators both evaluated through S_{XX'} on H⊗H.
inline cmat euclid_gradient_doubled(const AlgebraSpec& bipartition, const HamiltonianModel& ham,
                                    const cmat& v) {
  detail::require_factor(bipartition, "euclid_gradient_doubled");
  const Eigen::Index d = bipartition.dim();
  if (d > 16) throw std::domain_error("euclid_gradient_doubled: oracle limited to d <= 16");
  const Eigen::Index d_env = bipartition.blocks()[0].mult;
  const Eigen::Index d_sys = bipartition.blocks()[0].dim;
  const cmat psi = detail::rotated_eigvecs(bipartition, ham, v);
  const cmat& phi = ham.spec.eigenvectors;

  // permutation form of the swap operators
  auto perm_of = [&](Side side) {
    const cmat s = swap_doubled(d_env, d_sys, side);
    std::vector<Eigen::Index> p(static_cast<std::size_t>(d * d));
    for (Eigen::Index r = 0; r < d * d; ++r)
      for (Eigen::Index c = 0; c < d * d; ++c)
        if (s(r, c).real() > 0.5) {
          p[static_cast<std::size_t>(r)] = c;
          break;
        }
    return p;
  };
  const auto p_env = perm_of(Side::left), p_sys = perm_of(Side::right);

  cmat gamma = cmat::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const cmat vpk = psi.col(k) * phi.col(k).adjoint();       // V Pi_k (canonical)
    const cmat rk = psi.col(k) * psi.col(k).adjoint();        // V Pi_k V†
    for (Eigen::Index l = 0; l < d; ++l) {
      const double w = k == l ? 0.5 : 1.0;
      const cmat rl = psi.col(l) * psi.col(l).adjoint();
      const cmat big_f = kron(vpk, rl);
      const cmat big_g = kron(rk, rl);
      for (const auto* perm : {&p_sys, &p_env}) {
        // Tr(S (VPi_k V† ⊗ VPi_l V†)) — the Gram weight
        cxd gw = 0.0;
        for (Eigen::Index r = 0; r < d * d; ++r) gw += big_g((*perm)[static_cast<std::size_t>(r)], r);
        // Tr_{2nd copy}(S (VPi_k ⊗ VPi_l V†)) — the reduced-operator factor
        cmat t = cmat::Zero(d, d);
        for (Eigen::Index i = 0; i < d; ++i)
          for (Eigen::Index j = 0; j < d; ++j) {
            cxd acc = 0.0;
            for (Eigen::Index r = 0; r < d; ++r)
              acc += big_f((*perm)[static_cast<std::size_t>(i * d + r)], j * d + r);
            t(i, j) = acc;
          }
        gamma += w * gw.real() * t;
      }
    }
  }
  gamma *= -4.0 / (static_cast<double>(d) * static_cast<double>(d));
  return bipartition.frame() * gamma;
}

// G_V = Gamma V† - V Gamma†, the Riemannian steepest-ascent direction
inline cmat riemannian_grad(const cmat& gamma, const cmat& v) {
  if (gamma.rows() != v.rows() || gamma.cols() != v.cols())
    throw std::invalid_argument("riemannian_grad: dimension mismatch");
  return gamma * v.adjoint() - v * gamma.adjoint();
}

// Steepest descent on the unitary group with geodesic updates
// V <- exp(-mu G) V and accept-and-double / reject-and-halve step control.
inline OptState minimize(const AlgebraSpec& bipartition, const HamiltonianModel& ham,
                         const cmat& v0, const OptConfig& cfg) {
  detail::require_factor(bipartition, "minimize");
  require_unitary(v0, "minimize v0");
  const Eigen::Index d_env = bipartition.blocks()[0].mult;
  const Eigen::Index d_sys = bipartition.blocks()[0].dim;
  const cmat wdag = bipartition.frame().adjoint();

  cmat vt = wdag * v0;  // canonical coordinates
  detail::NrcWork work;
  auto eval = [&](const cmat& vtil, detail::NrcWork& w) {
    w.compute(vtil * ham.spec.eigenvectors, d_env, d_sys);
    return w.objective();
  };

  OptState state;
  state.mu = cfg.mu0;
  state.f = eval(vt, work);
  int stalled = 0;
  for (state.iter = 1; state.iter <= cfg.max_iters; ++state.iter) {
    const cmat gamma = work.gradient(ham.spec.eigenvectors);
    const cmat g = gamma * vt.adjoint() - vt * gamma.adjoint();
    const double gnorm = g.norm();
    state.trace.push_back({state.iter, state.f, gnorm, state.mu});
    if (gnorm <= cfg.grad_tol) {
      state.converged = true;
      break;
    }
    const cmat cand = unitary_exp(-state.mu * g) * vt;
    detail::NrcWork cand_work;
    const double f_cand = eval(cand, cand_work);
    if (f_cand < state.f) {
      const double delta = state.f - f_cand;
      vt = cand;
      work = std::move(cand_work);
      state.f = f_cand;
      state.mu = std::min(2.0 * state.mu, cfg.mu_max);
      stalled = 0;
      if (max_abs(vt.adjoint() * vt - cmat::Identity(vt.rows(), vt.cols())) > 1e-11 ||
          state.iter % cfg.reorth_every == 0)
        vt = polar_unitary(vt);
      if (delta <= cfg.epsilon) {
        state.converged = true;
        break;
      }
    } else {
      if (state.mu <= cfg.mu_min) {
        if (++stalled >= 3) {
          state.converged = true;  // step floor: no measurable descent left
          break;
        }
      }
      state.mu = std::max(0.5 * state.mu, cfg.mu_min);
    }
  }
  if (state.iter > cfg.max_iters) state.iter = cfg.max_iters;
  state.v = bipartition.frame() * vt;
  return state;
}

}  // namespace gtps

#endif
