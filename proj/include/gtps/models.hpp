#ifndef GTPS_MODELS_HPP
#define GTPS_MODELS_HPP

#include <cmath>
#include <optional>
#include <vector>

#include "gtps/algebra.hpp"
#include "gtps/scrambling.hpp"
#include "gtps/spectral.hpp"

namespace gtps {

// parameters of the decoupled-site toy Hamiltonians
struct ToyParams {
  std::vector<double> eps;
  std::vector<double> j;

  int sites() const { return static_cast<int>(eps.size()); }

  void validate_sizes() const {
    if (eps.size() != j.size() || eps.empty())
      throw std::invalid_argument("ToyParams: eps and j must have equal nonzero length");
  }

  // the minimizing angle is undefined where a site has eps_i = J_i = 0;
  // building the Hamiltonian itself is still fine there
  void validate() const {
    validate_sizes();
    for (std::size_t i = 0; i < eps.size(); ++i)
      if (eps[i] == 0.0 && j[i] == 0.0)
        throw std::invalid_argument("ToyParams: eps_i = J_i = 0 leaves theta undefined");
  }
};

struct TfimParams {
  int n = 6;
  double j = 1.05;
  double h = 0.0;
  std::optional<std::vector<double>> j_site;  // disordered variant

  void validate() const {
    if (n < 2) throw std::invalid_argument("TfimParams: need n >= 2");
    if (j_site && static_cast<int>(j_site->size()) != n)
      throw std::invalid_argument("TfimParams: j_site length must equal n");
  }
};

// H = sum_i (eps_i σ_i^z + J_i σ_i^x)
inline HamiltonianModel build_abelian_toy(const ToyParams& p) {
  p.validate_sizes();
  const int n = p.sites();
  cmat h = cmat::Zero(Eigen::Index{1} << n, Eigen::Index{1} << n);
  for (int i = 0; i < n; ++i) {
    h += p.eps[static_cast<std::size_t>(i)] * pauli_string(n, {{i, Axis::z}});
    h += p.j[static_cast<std::size_t>(i)] * pauli_string(n, {{i, Axis::x}});
  }
  return make_hamiltonian(h);
}

// minimizing rotation angles theta_i = atan2(J_i, eps_i), folded into the
// branch (-pi/2, pi/2] (theta is defined modulo pi: a pi-rotation about y
// maps the diagonal algebra onto itself)
inline std::vector<double> theta_min_closed(const ToyParams& p) {
  p.validate();
  std::vector<double> theta(p.eps.size());
  constexpr double pi = 3.14159265358979323846;
  for (std::size_t i = 0; i < p.eps.size(); ++i) {
    double t = std::atan2(p.j[i], p.eps[i]);
    if (t > pi / 2) t -= pi;
    if (t <= -pi / 2) t += pi;
    theta[i] = t;
  }
  return theta;
}

// shift angles by multiples of pi to follow a reference (sweep continuity)
inline std::vector<double> unwrap_angles(const std::vector<double>& reference,
                                         std::vector<double> theta) {
  constexpr double pi = 3.14159265358979323846;
  for (std::size_t i = 0; i < theta.size() && i < reference.size(); ++i) {
    while (theta[i] - reference[i] > pi / 2) theta[i] -= pi;
    while (theta[i] - reference[i] < -pi / 2) theta[i] += pi;
  }
  return theta;
}

// closed-form susceptibility Sigma_i dtheta_i^2 with
// dtheta_i = (eps_i dJ_i - J_i deps_i)/(eps_i^2 + J_i^2). Pure vector
// arithmetic; valid for any N without touching 2^N objects.
inline double abelian_metric_closed(const ToyParams& p, const std::vector<double>& deps,
                                    const std::vector<double>& dj) {
  p.validate();
  if (deps.size() != p.eps.size() || dj.size() != p.eps.size())
    throw std::invalid_argument("abelian_metric_closed: differential length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.eps.size(); ++i) {
    const double denom = p.eps[i] * p.eps[i] + p.j[i] * p.j[i];
    const double dth = (p.eps[i] * dj[i] - p.j[i] * deps[i]) / denom;
    sum += dth * dth;
  }
  return sum;
}

// Product rotation of the toy family. The sign convention is fixed so that
// the minimizing angles come out as theta_i = atan2(J_i, eps_i): per site
// R(t) = exp(-i t σ^y / 2), which maps Ad R(t)†: σ^z -> cos t σ^z - sin t σ^x.
inline cmat abelian_rotation(const std::vector<double>& theta) {
  cmat u = cmat::Identity(1, 1);
  for (double t : theta) {
    cmat r(2, 2);
    r << std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2);
    u = kron(u, r);
  }
  return u;
}

// dK = -i dU U† = (1/2) Σ_i dtheta_i σ_i^y
inline cmat abelian_rotation_generator(const std::vector<double>& dtheta) {
  const int n = static_cast<int>(dtheta.size());
  cmat k = cmat::Zero(Eigen::Index{1} << n, Eigen::Index{1} << n);
  for (int i = 0; i < n; ++i)
    k += 0.5 * dtheta[static_cast<std::size_t>(i)] * pauli_string(n, {{i, Axis::y}});
  return k;
}

// Frozen proportionality constants between the algebra metric element and the
// normalized Σ dθ² form. For the N-site maximal abelian toy:
//   kappa = 2/d, ||Q(dK)||² = ||dK||² = (d/4) Σ dθ²  =>  ds² = (1/d) Σ dθ².
inline double abelian_metric_scale(int n_sites) {
  return 1.0 / static_cast<double>(Eigen::Index{1} << n_sites);
}

// For the n-pair L/R factor toy (d = 4^n):
//   kappa = 2/d, ||dK||² = (1/4) Σ dθ² Tr((K_i^y)²) = (d/8) Σ dθ²
//   =>  ds² = 1/(2d) Σ dθ².
inline double factor_metric_scale(int n_pairs) {
  return 0.5 / static_cast<double>(Eigen::Index{1} << (2 * n_pairs));
}

// ---- factor toy: n L/R pairs on 2n qubits, pair i = sites (i, n+i) ----

namespace detail {

// two-site |a><b| ⊗-embedded operator on 2n qubits at sites (sl, sr)
inline cmat two_site_unit(int n_qubits, int sl, int sr, int al, int bl, int ar, int br) {
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  cmat m = cmat::Zero(d, d);
  const Eigen::Index bl_bit = Eigen::Index{1} << (n_qubits - 1 - sl);
  const Eigen::Index br_bit = Eigen::Index{1} << (n_qubits - 1 - sr);
  for (Eigen::Index rest = 0; rest < d; ++rest) {
    if (rest & (bl_bit | br_bit)) continue;
    const Eigen::Index row = rest | (al ? bl_bit : 0) | (ar ? br_bit : 0);
    const Eigen::Index col = rest | (bl ? bl_bit : 0) | (br ? br_bit : 0);
    m(row, col) += 1.0;
  }
  return m;
}

}  // namespace detail

struct FactorToy {
  HamiltonianModel ham;
  AlgebraSpec algebra;  // B(H_L) ⊗ 1_R, L = first n qubits
  int n_pairs;
};

// H_i = (eps_i/2)(σ_{iL}^z - σ_{iR}^z) + J_i (σ⁺_{iL}σ⁻_{iR} + σ⁺_{iR}σ⁻_{iL});
// trivial on span{|00>,|11>} of each pair and equal to eps σ^z + J σ^x on
// span{|01>,|10>}.
inline FactorToy build_factor_toy(const ToyParams& p) {
  p.validate_sizes();
  const int n = p.sites();
  const int nq = 2 * n;
  const Eigen::Index d = Eigen::Index{1} << nq;
  cmat h = cmat::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    const int sl = i, sr = n + i;
    h += 0.5 * p.eps[static_cast<std::size_t>(i)] *
         (pauli_string(nq, {{sl, Axis::z}}) - pauli_string(nq, {{sr, Axis::z}}));
    // hopping |01><10| + |10><01| on the (L,R) pair
    h += p.j[static_cast<std::size_t>(i)] *
         (detail::two_site_unit(nq, sl, sr, 0, 1, 1, 0) +
          detail::two_site_unit(nq, sl, sr, 1, 0, 0, 1));
  }
  std::vector<int> left(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) left[static_cast<std::size_t>(i)] = i;
  const cmat id = cmat::Identity(d, d);
  return FactorToy{make_hamiltonian(h), factor_bipartition(nq, left, id), n};
}

// K_i^y = -i (σ⁺_{iL}σ⁻_{iR} - σ⁺_{iR}σ⁻_{iL}); acts as σ^y on span{|01>,|10>}
inline cmat factor_pair_generator(int n_pairs, int i) {
  const int nq = 2 * n_pairs;
  const cxd mi(0.0, -1.0);
  return mi * (detail::two_site_unit(nq, i, n_pairs + i, 0, 1, 1, 0) -
               detail::two_site_unit(nq, i, n_pairs + i, 1, 0, 0, 1));
}

// dK = (1/2) Σ_i dtheta_i K_i^y for U_theta = ⊗ exp(i theta_i K_i^y / 2)
inline cmat factor_rotation_generator(const std::vector<double>& dtheta) {
  const int n = static_cast<int>(dtheta.size());
  const Eigen::Index d = Eigen::Index{1} << (2 * n);
  cmat k = cmat::Zero(d, d);
  for (int i = 0; i < n; ++i)
    k += 0.5 * dtheta[static_cast<std::size_t>(i)] * factor_pair_generator(n, i);
  return k;
}

// same sign convention as abelian_rotation: ⊗ exp(-i theta_i K_i^y / 2)
inline cmat factor_rotation(const std::vector<double>& theta) {
  const int n = static_cast<int>(theta.size());
  const Eigen::Index d = Eigen::Index{1} << (2 * n);
  cmat u = cmat::Identity(d, d);
  for (int i = 0; i < n; ++i) {
    const cmat k = factor_pair_generator(n, i);
    u = unitary_exp(cxd(0.0, -0.5 * theta[static_cast<std::size_t>(i)]) * k) * u;
  }
  return u;
}

// open-boundary transverse field Ising chain,
// H = -Σ σ_i^z σ_{i+1}^z - Σ (h σ_i^z + J_i σ_i^x)
inline HamiltonianModel build_tfim(const TfimParams& p) {
  p.validate();
  const Eigen::Index d = Eigen::Index{1} << p.n;
  cmat h = cmat::Zero(d, d);
  for (int i = 0; i + 1 < p.n; ++i)
    h -= pauli_string(p.n, {{i, Axis::z}, {i + 1, Axis::z}});
  for (int i = 0; i < p.n; ++i) {
    const double ji = p.j_site ? (*p.j_site)[static_cast<std::size_t>(i)] : p.j;
    h -= p.h * pauli_string(p.n, {{i, Axis::z}});
    h -= ji * pauli_string(p.n, {{i, Axis::x}});
  }
  return make_hamiltonian(h);
}

// cyclic golden-section recovery of the minimizing angles, restricted to the
// product rotation family; a numerical cross-check of theta_min_closed
inline std::vector<double> recover_theta_numeric(const ToyParams& p, int rounds = 6) {
  p.validate();
  const int n = p.sites();
  const HamiltonianModel ham = build_abelian_toy(p);
  const AlgebraSpec a0 = maximal_abelian(n, cmat::Identity(Eigen::Index{1} << n, Eigen::Index{1} << n));
  std::vector<double> theta(static_cast<std::size_t>(n), 0.0);
  auto objective = [&](const std::vector<double>& th) {
    return sigma_s(conjugate(a0, abelian_rotation(th)), ham.h);
  };
  constexpr double pi = 3.14159265358979323846;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int round = 0; round < rounds; ++round) {
    for (int i = 0; i < n; ++i) {
      double lo = theta[static_cast<std::size_t>(i)] - pi / 2;
      double hi = theta[static_cast<std::size_t>(i)] + pi / 2;
      auto eval = [&](double t) {
        auto th = theta;
        th[static_cast<std::size_t>(i)] = t;
        return objective(th);
      };
      double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
      double f1 = eval(x1), f2 = eval(x2);
      for (int it = 0; it < 60; ++it) {
        if (f1 < f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - gr * (hi - lo);
          f1 = eval(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + gr * (hi - lo);
          f2 = eval(x2);
        }
      }
      theta[static_cast<std::size_t>(i)] = 0.5 * (lo + hi);
    }
  }
  return theta;
}

}  // namespace gtps

#endif
