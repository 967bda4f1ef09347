#ifndef GTPS_LINALG_HPP
#define GTPS_LINALG_HPP

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

namespace gtps {

using cxd = std::complex<double>;
using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;
using rvec = Eigen::VectorXd;
using rmat = Eigen::MatrixXd;

// construction-time hermiticity tolerance and post-condition tolerance
inline constexpr double kHermTol = 1e-12;
inline constexpr double kPostTol = 1e-10;

inline double max_abs(const cmat& m) { return m.cwiseAbs().maxCoeff(); }

inline bool is_hermitian(const cmat& m, double tol = kHermTol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m - m.adjoint()) <= tol * std::max(1.0, max_abs(m));
}

inline bool is_skew_hermitian(const cmat& m, double tol = kPostTol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m + m.adjoint()) <= tol * std::max(1.0, max_abs(m));
}

inline bool is_unitary(const cmat& m, double tol = kPostTol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m.adjoint() * m - cmat::Identity(m.rows(), m.cols())) <= tol;
}

inline void require_hermitian(const cmat& m, const char* what) {
  if (!is_hermitian(m)) throw std::invalid_argument(std::string(what) + ": matrix is not Hermitian");
}

inline void require_unitary(const cmat& m, const char* what) {
  if (!is_unitary(m)) throw std::invalid_argument(std::string(what) + ": matrix is not unitary");
}

// Hilbert-Schmidt inner product <A,B> = Tr(A† B)
inline cxd hs_inner(const cmat& a, const cmat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("hs_inner: dimension mismatch");
  return (a.conjugate().cwiseProduct(b)).sum();
}

inline double hs_norm(const cmat& a) { return a.norm(); }  // Frobenius = HS

inline cmat kron(const cmat& a, const cmat& b) {
  cmat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

enum class Axis { x, y, z };

inline cmat pauli(Axis ax) {
  cmat s(2, 2);
  switch (ax) {
    case Axis::x: s << 0, 1, 1, 0; break;
    case Axis::y: s << 0, cxd(0, -1), cxd(0, 1), 0; break;
    case Axis::z: s << 1, 0, 0, -1; break;
  }
  return s;
}

// Tensor product of Paulis on the listed sites, identity elsewhere.
// Site 0 is the leftmost tensor factor (most significant bit of the index).
inline cmat pauli_string(int n_qubits, const std::vector<std::pair<int, Axis>>& ops) {
  if (n_qubits < 1) throw std::invalid_argument("pauli_string: need at least one qubit");
  std::vector<int> which(static_cast<std::size_t>(n_qubits), -1);
  for (const auto& [site, ax] : ops) {
    if (site < 0 || site >= n_qubits) throw std::invalid_argument("pauli_string: site out of range");
    if (which[static_cast<std::size_t>(site)] != -1)
      throw std::invalid_argument("pauli_string: duplicate site");
    which[static_cast<std::size_t>(site)] = static_cast<int>(ax);
  }
  cmat out = cmat::Identity(1, 1);
  for (int s = 0; s < n_qubits; ++s) {
    const cmat factor = which[static_cast<std::size_t>(s)] < 0
                            ? cmat(cmat::Identity(2, 2))
                            : pauli(static_cast<Axis>(which[static_cast<std::size_t>(s)]));
    out = kron(out, factor);
  }
  return out;
}

// Partial trace over the complement of `keep` for an N-qubit operator.
inline cmat partial_trace(const cmat& op, int n_qubits, const std::vector<int>& keep) {
  const Eigen::Index d = op.rows();
  if (op.cols() != d || d != (Eigen::Index{1} << n_qubits))
    throw std::invalid_argument("partial_trace: operator is not on 2^N");
  std::vector<bool> keep_mask(static_cast<std::size_t>(n_qubits), false);
  for (int q : keep) {
    if (q < 0 || q >= n_qubits) throw std::invalid_argument("partial_trace: invalid subset");
    if (keep_mask[static_cast<std::size_t>(q)]) throw std::invalid_argument("partial_trace: invalid subset");
    keep_mask[static_cast<std::size_t>(q)] = true;
  }
  const int nk = static_cast<int>(keep.size());
  const Eigen::Index dk = Eigen::Index{1} << nk;
  const Eigen::Index dt = d >> nk;

  // bit positions: site q occupies bit (n_qubits-1-q)
  std::vector<int> keep_bits, traced_bits;
  for (int q = 0; q < n_qubits; ++q) {
    const int bit = n_qubits - 1 - q;
    (keep_mask[static_cast<std::size_t>(q)] ? keep_bits : traced_bits).push_back(bit);
  }
  auto assemble = [](const std::vector<int>& bits, Eigen::Index sub) {
    Eigen::Index idx = 0;
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (sub & (Eigen::Index{1} << (bits.size() - 1 - i))) idx |= Eigen::Index{1} << bits[i];
    return idx;
  };

  cmat out = cmat::Zero(dk, dk);
  for (Eigen::Index r = 0; r < dk; ++r)
    for (Eigen::Index c = 0; c < dk; ++c) {
      const Eigen::Index rbase = assemble(keep_bits, r), cbase = assemble(keep_bits, c);
      cxd acc = 0.0;
      for (Eigen::Index t = 0; t < dt; ++t) {
        const Eigen::Index toff = assemble(traced_bits, t);
        acc += op(rbase | toff, cbase | toff);
      }
      out(r, c) = acc;
    }
  return out;
}

enum class Side { left, right };

// Partial trace for a bipartite space H = C^dl ⊗ C^dr (index = l*dr + r).
inline cmat partial_trace_factor(const cmat& op, Eigen::Index dl, Eigen::Index dr, Side keep) {
  if (op.rows() != dl * dr || op.cols() != dl * dr)
    throw std::invalid_argument("partial_trace_factor: inconsistent factorization");
  if (keep == Side::left) {
    cmat out = cmat::Zero(dl, dl);
    for (Eigen::Index i = 0; i < dl; ++i)
      for (Eigen::Index j = 0; j < dl; ++j) {
        cxd acc = 0.0;
        for (Eigen::Index r = 0; r < dr; ++r) acc += op(i * dr + r, j * dr + r);
        out(i, j) = acc;
      }
    return out;
  }
  cmat out = cmat::Zero(dr, dr);
  for (Eigen::Index r = 0; r < dr; ++r)
    for (Eigen::Index s = 0; s < dr; ++s) {
      cxd acc = 0.0;
      for (Eigen::Index i = 0; i < dl; ++i) acc += op(i * dr + r, i * dr + s);
      out(r, s) = acc;
    }
  return out;
}

// Swap operator on H ⊗ H' where H = C^dl ⊗ C^dr, exchanging the named factor
// of the first copy with the same factor of the second copy. dl = d, dr = 1
// with Side::left gives the full swap S|ab> = |ba>.
inline cmat swap_doubled(Eigen::Index dl, Eigen::Index dr, Side which) {
  const Eigen::Index d = dl * dr;
  if (d < 1) throw std::invalid_argument("swap_doubled: inconsistent factorization");
  cmat s = cmat::Zero(d * d, d * d);
  for (Eigen::Index l1 = 0; l1 < dl; ++l1)
    for (Eigen::Index r1 = 0; r1 < dr; ++r1)
      for (Eigen::Index l2 = 0; l2 < dl; ++l2)
        for (Eigen::Index r2 = 0; r2 < dr; ++r2) {
          const Eigen::Index col = (l1 * dr + r1) * d + (l2 * dr + r2);
          const Eigen::Index row = which == Side::left ? (l2 * dr + r1) * d + (l1 * dr + r2)
                                                       : (l1 * dr + r2) * d + (l2 * dr + r1);
          s(row, col) = 1.0;
        }
  return s;
}

inline cmat swap_full(Eigen::Index d) { return swap_doubled(d, 1, Side::left); }

}  // namespace gtps

#endif
