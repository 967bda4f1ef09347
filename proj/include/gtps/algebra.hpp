#ifndef GTPS_ALGEBRA_HPP
#define GTPS_ALGEBRA_HPP

#include <algorithm>
#include <numeric>
#include <vector>

#include "gtps/linalg.hpp"
#include "gtps/spectral.hpp"

namespace gtps {

// One summand C^mult ⊗ C^dim of the block decomposition. The algebra acts
// irreducibly on the second (dim) factor and trivially on the first.
struct Block {
  Eigen::Index mult;  // n_J
  Eigen::Index dim;   // d_J
};

inline bool operator==(const Block& a, const Block& b) { return a.mult == b.mult && a.dim == b.dim; }

// A hermitian-closed unital subalgebra, given by its block structure and a
// frame unitary mapping the decomposition basis onto the computational one.
// Basis layout inside block J: index = offset_J + e*d_J + s with e the
// multiplicity (commutant) index and s the algebra index.
class AlgebraSpec {
 public:
  AlgebraSpec(Eigen::Index dim, std::vector<Block> blocks, cmat frame)
      : dim_(dim), blocks_(std::move(blocks)), frame_(std::move(frame)) {
    Eigen::Index total = 0;
    for (const auto& b : blocks_) {
      if (b.mult < 1 || b.dim < 1) throw std::invalid_argument("AlgebraSpec: bad block");
      total += b.mult * b.dim;
    }
    if (total != dim_) throw std::invalid_argument("AlgebraSpec: blocks do not sum to dim");
    if (frame_.rows() != dim_ || frame_.cols() != dim_)
      throw std::invalid_argument("AlgebraSpec: frame dimension mismatch");
    require_unitary(frame_, "AlgebraSpec frame");
    offsets_.resize(blocks_.size());
    Eigen::Index off = 0;
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
      offsets_[j] = off;
      off += blocks_[j].mult * blocks_[j].dim;
    }
  }

  Eigen::Index dim() const { return dim_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  const cmat& frame() const { return frame_; }
  Eigen::Index block_offset(std::size_t j) const { return offsets_[j]; }

  Eigen::Index dim_algebra() const {
    Eigen::Index s = 0;
    for (const auto& b : blocks_) s += b.dim * b.dim;
    return s;
  }

  Eigen::Index dim_commutant() const {
    Eigen::Index s = 0;
    for (const auto& b : blocks_) s += b.mult * b.mult;
    return s;
  }

  // n_J/d_J identical across blocks (exact integer cross-check)
  bool collinear() const {
    for (const auto& b : blocks_)
      if (b.mult * blocks_[0].dim != b.dim * blocks_[0].mult) return false;
    return true;
  }

  bool same_type(const AlgebraSpec& other) const {
    if (dim_ != other.dim_ || blocks_.size() != other.blocks_.size()) return false;
    auto key = [](const Block& b) { return std::pair{b.mult, b.dim}; };
    std::vector<std::pair<Eigen::Index, Eigen::Index>> x, y;
    for (const auto& b : blocks_) x.push_back(key(b));
    for (const auto& b : other.blocks_) y.push_back(key(b));
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    return x == y;
  }

 private:
  Eigen::Index dim_;
  std::vector<Block> blocks_;
  cmat frame_;
  std::vector<Eigen::Index> offsets_;
};

// Operators diagonal in the frame basis: d blocks of C^1 ⊗ C^1, A = A'.
inline AlgebraSpec maximal_abelian(int n_qubits, const cmat& frame) {
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  require_unitary(frame, "maximal_abelian frame");
  return AlgebraSpec(d, std::vector<Block>(static_cast<std::size_t>(d), Block{1, 1}), frame);
}

// B(H_left) ⊗ 1 for a subset of qubit sites. The decomposition layout puts
// the commutant (environment) factor first, so the frame carries the bit
// permutation from (env, sys) order back to the computational order, composed
// with the caller's unitary.
inline AlgebraSpec factor_bipartition(int n_qubits, const std::vector<int>& left_sites,
                                      const cmat& frame) {
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  if (left_sites.empty() || static_cast<int>(left_sites.size()) >= n_qubits)
    throw std::invalid_argument("factor_bipartition: left subset must be nonempty and proper");
  std::vector<bool> is_left(static_cast<std::size_t>(n_qubits), false);
  for (int q : left_sites) {
    if (q < 0 || q >= n_qubits || is_left[static_cast<std::size_t>(q)])
      throw std::invalid_argument("factor_bipartition: bad site list");
    is_left[static_cast<std::size_t>(q)] = true;
  }
  require_unitary(frame, "factor_bipartition frame");

  std::vector<int> sys, env;
  for (int q = 0; q < n_qubits; ++q) (is_left[static_cast<std::size_t>(q)] ? sys : env).push_back(q);
  const Eigen::Index d_sys = Eigen::Index{1} << sys.size();
  const Eigen::Index d_env = Eigen::Index{1} << env.size();

  cmat perm = cmat::Zero(d, d);
  for (Eigen::Index e = 0; e < d_env; ++e)
    for (Eigen::Index s = 0; s < d_sys; ++s) {
      Eigen::Index comp = 0;
      for (std::size_t i = 0; i < env.size(); ++i)
        if (e & (Eigen::Index{1} << (env.size() - 1 - i)))
          comp |= Eigen::Index{1} << (n_qubits - 1 - env[i]);
      for (std::size_t i = 0; i < sys.size(); ++i)
        if (s & (Eigen::Index{1} << (sys.size() - 1 - i)))
          comp |= Eigen::Index{1} << (n_qubits - 1 - sys[i]);
      perm(comp, e * d_sys + s) = 1.0;
    }
  return AlgebraSpec(d, {Block{d_env, d_sys}}, frame * perm);
}

inline AlgebraSpec conjugate(const AlgebraSpec& alg, const cmat& u) {
  if (u.rows() != alg.dim() || u.cols() != alg.dim())
    throw std::invalid_argument("conjugate: dimension mismatch");
  require_unitary(u, "conjugate");
  return AlgebraSpec(alg.dim(), alg.blocks(), u * alg.frame());
}

enum class ProjKind { onto_algebra, onto_commutant, onto_sum, complement };

namespace detail {

// block-wise conditional expectations in the decomposition basis
inline cmat project_decomp(const AlgebraSpec& a, ProjKind kind, const cmat& xt) {
  const auto& blocks = a.blocks();
  cmat yt = cmat::Zero(a.dim(), a.dim());
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const Eigen::Index o = a.block_offset(j), n = blocks[j].mult, d = blocks[j].dim;
    const auto xb = xt.block(o, o, n * d, n * d);
    auto yb = yt.block(o, o, n * d, n * d);
    const bool want_alg = kind == ProjKind::onto_algebra || kind == ProjKind::onto_sum ||
                          kind == ProjKind::complement;
    const bool want_comm = kind == ProjKind::onto_commutant || kind == ProjKind::onto_sum ||
                           kind == ProjKind::complement;
    cmat pa, pc;
    if (want_alg) {
      cmat m = cmat::Zero(d, d);
      for (Eigen::Index e = 0; e < n; ++e) m += xb.block(e * d, e * d, d, d);
      m /= static_cast<double>(n);
      pa = kron(cmat::Identity(n, n), m);
    }
    if (want_comm) {
      cmat m = cmat::Zero(n, n);
      for (Eigen::Index e = 0; e < n; ++e)
        for (Eigen::Index f = 0; f < n; ++f) {
          cxd acc = 0.0;
          for (Eigen::Index s = 0; s < d; ++s) acc += xb(e * d + s, f * d + s);
          m(e, f) = acc / static_cast<double>(d);
        }
      pc = kron(m, cmat::Identity(d, d));
    }
    switch (kind) {
      case ProjKind::onto_algebra: yb = pa; break;
      case ProjKind::onto_commutant: yb = pc; break;
      case ProjKind::onto_sum:
      case ProjKind::complement: {
        const cxd center = xb.trace() / static_cast<double>(n * d);
        yb = pa + pc - center * cmat::Identity(n * d, n * d);
        break;
      }
    }
  }
  return yt;
}

// canonical Kraus descriptor: norm_den^{-1/2} * sum_s |row0+s*stride><col0+s*stride|
struct SparseKraus {
  Eigen::Index row0, col0, stride, count;
  Eigen::Index norm_den;  // n_J for the f-family, d_J for the e-family
};

inline std::vector<SparseKraus> canonical_kraus(const AlgebraSpec& a, bool commutant_indexed) {
  std::vector<SparseKraus> out;
  const auto& blocks = a.blocks();
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const Eigen::Index o = a.block_offset(j), n = blocks[j].mult, d = blocks[j].dim;
    if (commutant_indexed) {
      // f_beta = n^{-1/2} |l><m|_env ⊗ 1_d  (Kraus family of P_A)
      for (Eigen::Index l = 0; l < n; ++l)
        for (Eigen::Index m = 0; m < n; ++m) out.push_back({o + l * d, o + m * d, 1, d, n});
    } else {
      // e_alpha = d^{-1/2} 1_n ⊗ |l><m|  (Kraus family of P_{A'})
      for (Eigen::Index l = 0; l < d; ++l)
        for (Eigen::Index m = 0; m < d; ++m) out.push_back({o + l, o + m, d, n, d});
    }
  }
  return out;
}

inline cmat materialize(const SparseKraus& k, Eigen::Index dim) {
  cmat m = cmat::Zero(dim, dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(k.norm_den));
  for (Eigen::Index s = 0; s < k.count; ++s) m(k.row0 + s * k.stride, k.col0 + s * k.stride) = scale;
  return m;
}

}  // namespace detail

// The conditional-expectation CP-map onto an algebra (or its commutant), and
// the derived sum / complement projections of the scrambling functionals.
class SuperProjection {
 public:
  SuperProjection(AlgebraSpec target, ProjKind kind) : target_(std::move(target)), kind_(kind) {}

  const AlgebraSpec& target() const { return target_; }
  ProjKind kind() const { return kind_; }

  cmat apply(const cmat& x) const {
    if (x.rows() != target_.dim() || x.cols() != target_.dim())
      throw std::invalid_argument("SuperProjection: dimension mismatch");
    const cmat xt = target_.frame().adjoint() * x * target_.frame();
    const cmat yt = detail::project_decomp(target_, kind_, xt);
    cmat y = target_.frame() * yt * target_.frame().adjoint();
    if (kind_ == ProjKind::complement) return x - y;
    return y;
  }

  // Kraus family {f_beta} (onto_algebra) or {e_alpha} (onto_commutant),
  // rotated by the frame. The derived projections have no Kraus form.
  std::vector<cmat> kraus() const {
    if (kind_ != ProjKind::onto_algebra && kind_ != ProjKind::onto_commutant)
      throw std::domain_error("SuperProjection::kraus: only CP kinds have a Kraus family");
    std::vector<cmat> out;
    for (const auto& k : detail::canonical_kraus(target_, kind_ == ProjKind::onto_algebra))
      out.push_back(target_.frame() * detail::materialize(k, target_.dim()) *
                    target_.frame().adjoint());
    return out;
  }

 private:
  AlgebraSpec target_;
  ProjKind kind_;
};

inline cmat project(const SuperProjection& p, const cmat& x) { return p.apply(x); }

inline SuperProjection projector_onto(const AlgebraSpec& a) {
  return SuperProjection(a, ProjKind::onto_algebra);
}
inline SuperProjection projector_onto_commutant(const AlgebraSpec& a) {
  return SuperProjection(a, ProjKind::onto_commutant);
}
inline SuperProjection projector_onto_sum(const AlgebraSpec& a) {
  return SuperProjection(a, ProjKind::onto_sum);
}
inline SuperProjection complement_projector(const AlgebraSpec& a) {
  return SuperProjection(a, ProjKind::complement);
}

// Choi state rho = (P ⊗ 1)|Phi+><Phi+| of a conditional expectation.
struct ChoiState {
  Eigen::Index dim;  // of the underlying space; rho is dim^2 x dim^2
  cmat rho;
};

inline ChoiState choi(const SuperProjection& p) {
  if (p.kind() != ProjKind::onto_algebra)
    throw std::domain_error("choi: expected the onto-algebra projection");
  const Eigen::Index d = p.target().dim();
  if (d > 64) throw std::domain_error("choi: doubled space too large");
  cmat rho = cmat::Zero(d * d, d * d);
  cmat e = cmat::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      e(i, j) = 1.0;
      const cmat pe = p.apply(e) / static_cast<double>(d);
      e(i, j) = 0.0;
      for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b) rho(a * d + i, b * d + j) = pe(a, b);
    }
  return ChoiState{d, std::move(rho)};
}

namespace detail {

inline long double projection_overlap_ld(const AlgebraSpec& a, const AlgebraSpec& b) {
  // extended precision throughout: near-equal algebras cancel O(dim A) down
  // to O(eps), and the relative frame must stay unitary well below that
  using cld = std::complex<long double>;
  using mld = Eigen::Matrix<cld, Eigen::Dynamic, Eigen::Dynamic>;
  mld z = a.frame().cast<cld>().adjoint() * b.frame().cast<cld>();
  // Newton-Schulz polar step: frames are unitary only to storage precision,
  // and that Hermitian defect enters the overlap at first order
  const mld id3 = 3.0L * mld::Identity(z.rows(), z.cols());
  for (int it = 0; it < 2; ++it) z = 0.5L * (z * (id3 - z.adjoint() * z));
  const auto ka = detail::canonical_kraus(a, true);
  const auto kb = detail::canonical_kraus(b, true);
  long double total = 0.0L;
  for (const auto& fi : ka)
    for (const auto& fj : kb) {
      cld acc = 0.0L;
      for (Eigen::Index si = 0; si < fi.count; ++si) {
        const Eigen::Index r1 = fi.row0 + si * fi.stride, r2 = fi.col0 + si * fi.stride;
        for (Eigen::Index sj = 0; sj < fj.count; ++sj) {
          const Eigen::Index c1 = fj.col0 + sj * fj.stride, c2 = fj.row0 + sj * fj.stride;
          // Tr(f_i† Z f_j Z†) accumulated entrywise
          acc += z(r1, c2) * std::conj(z(r2, c1));
        }
      }
      // |Tr(f_i† Z f_j Z†)|^2 with the exact 1/(n_i n_j) normalization
      const long double scale = 1.0L / (static_cast<long double>(fi.norm_den) * fj.norm_den);
      total += scale * (acc.real() * acc.real() + acc.imag() * acc.imag());
    }
  return total;
}

}  // namespace detail

// Tr_HS(P_a P_b) = sum_{ij} |Tr(f_i^a† f_j^b)|^2 over the two Kraus families,
// evaluated through the relative frame Z = W_a† W_b with the canonical
// (sparse) Kraus descriptors.
inline double projection_overlap(const AlgebraSpec& a, const AlgebraSpec& b) {
  return static_cast<double>(detail::projection_overlap_ld(a, b));
}

// Grassmannian distance D = d^{-1} ||P_a - P_b||_HS between g-TPS's of the
// same isomorphism class.
inline double distance(const AlgebraSpec& a, const AlgebraSpec& b) {
  if (!a.same_type(b)) throw std::invalid_argument("distance: incompatible algebra specs");
  const long double sq = static_cast<long double>(a.dim_algebra() + b.dim_algebra()) -
                         2.0L * detail::projection_overlap_ld(a, b);
  return static_cast<double>(std::sqrt(std::max(0.0L, sq)) / a.dim());
}

// Choi-representation route ||rho_a - rho_b||_2; agrees with distance() and is
// kept as the independent cross-check.
inline double distance_choi(const AlgebraSpec& a, const AlgebraSpec& b) {
  if (!a.same_type(b)) throw std::invalid_argument("distance_choi: incompatible algebra specs");
  const ChoiState ra = choi(projector_onto(a));
  const ChoiState rb = choi(projector_onto(b));
  return (ra.rho - rb.rho).norm();
}

inline bool approx_equal(const AlgebraSpec& a, const AlgebraSpec& b, double tol = 1e-8) {
  return a.same_type(b) && distance(a, b) < tol;
}

// Metric element ds^2 = kappa^2 ||Q(k)||_2^2 for collinear algebras;
// anything else is refused rather than extrapolated. The coefficient is
// kappa^2 = 4/(d * dim A'), the value that matches the second-order expansion
// of the squared algebra distance (the rescaling ||[K, e~]||^2 =
// sqrt(dim A / dim A') ||[K, e]||^2 carries a square root of the collinear
// ratio). It reduces to (2/dim A')^2 whenever dim A = dim A', which covers
// every maximal abelian algebra and every symmetric bipartition.
inline double metric_element(const AlgebraSpec& alg, const cmat& k) {
  if (!alg.collinear()) throw std::domain_error("metric_element: algebra is not collinear");
  require_hermitian(k, "metric_element");
  const double kappa_sq =
      4.0 / (static_cast<double>(alg.dim()) * static_cast<double>(alg.dim_commutant()));
  const double qn = complement_projector(alg).apply(k).norm();
  return kappa_sq * qn * qn;
}

// Null-space solve of [X, a_i] = 0 over the algebra's basis; returns an
// HS-orthonormal basis of the commutant. Oracle scale only.
inline std::vector<cmat> commutant_bruteforce(const AlgebraSpec& alg) {
  const Eigen::Index d = alg.dim();
  if (d > 16) throw std::domain_error("commutant_bruteforce: oracle limited to d <= 16");
  std::vector<cmat> gens;
  for (const auto& k : detail::canonical_kraus(alg, false))
    gens.push_back(alg.frame() * detail::materialize(k, d) * alg.frame().adjoint());

  const Eigen::Index d2 = d * d;
  cmat normal = cmat::Zero(d2, d2);
  const cmat id = cmat::Identity(d, d);
  for (const auto& g : gens) {
    const cmat m = kron(g.transpose(), id) - kron(id, g);  // vec([X,g]) = M vec(X)
    normal += m.adjoint() * m;
  }
  Eigen::SelfAdjointEigenSolver<cmat> solver(normal);
  const double lmax = std::max(1.0, solver.eigenvalues().cwiseAbs().maxCoeff());
  std::vector<cmat> out;
  for (Eigen::Index i = 0; i < d2; ++i) {
    if (solver.eigenvalues()(i) > 1e-10 * lmax) continue;
    cmat x(d, d);
    for (Eigen::Index c = 0; c < d; ++c) x.col(c) = solver.eigenvectors().col(i).segment(c * d, d);
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace gtps

#endif
