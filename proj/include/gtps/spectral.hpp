#ifndef GTPS_SPECTRAL_HPP
#define GTPS_SPECTRAL_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "gtps/linalg.hpp"
#include "gtps/rng.hpp"

namespace gtps {

// Eigen-decomposition of a Hermitian operator. Eigenvalues ascending;
// eigenvector phases fixed so the first component above 1e-12 is real
// positive, which makes warm starts reproducible across sweep points.
struct SpectralDecomp {
  rvec eigenvalues;   // ascending
  cmat eigenvectors;  // columns |phi_k>

  Eigen::Index dim() const { return eigenvalues.size(); }

  cmat projector(Eigen::Index k) const {
    return eigenvectors.col(k) * eigenvectors.col(k).adjoint();
  }

  cmat reconstruct() const {
    return eigenvectors * eigenvalues.asDiagonal().toDenseMatrix().cast<cxd>() *
           eigenvectors.adjoint();
  }

  // exp(i t H) assembled from the cached spectrum
  cmat evolution(double t) const {
    cvec ph(dim());
    for (Eigen::Index k = 0; k < dim(); ++k) ph(k) = std::exp(cxd(0.0, t * eigenvalues(k)));
    return eigenvectors * ph.asDiagonal() * eigenvectors.adjoint();
  }
};

inline void fix_eigenvector_phases(cmat& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      const cxd z = v(r, c);
      if (std::abs(z) > 1e-12) {
        v.col(c) *= std::conj(z) / std::abs(z);
        break;
      }
    }
  }
}

inline SpectralDecomp eig_hermitian(const cmat& h) {
  require_hermitian(h, "eig_hermitian");
  Eigen::SelfAdjointEigenSolver<cmat> solver(0.5 * (h + h.adjoint()));
  if (solver.info() != Eigen::Success) throw std::runtime_error("eig_hermitian: solver failed");
  SpectralDecomp out{solver.eigenvalues(), solver.eigenvectors()};
  fix_eigenvector_phases(out.eigenvectors);
  return out;
}

// exp(K) for skew-Hermitian K, via the spectrum of the Hermitian -iK.
inline cmat unitary_exp(const cmat& k) {
  if (!is_skew_hermitian(k)) throw std::invalid_argument("unitary_exp: input is not skew-Hermitian");
  const cmat h = cxd(0.0, -1.0) * k;  // Hermitian
  Eigen::SelfAdjointEigenSolver<cmat> solver(0.5 * (h + h.adjoint()));
  cvec ph(k.rows());
  for (Eigen::Index i = 0; i < k.rows(); ++i) ph(i) = std::exp(cxd(0.0, solver.eigenvalues()(i)));
  return solver.eigenvectors() * ph.asDiagonal() * solver.eigenvectors().adjoint();
}

// Haar-distributed unitary: QR of a complex Ginibre matrix with the
// R-diagonal phase correction.
inline cmat haar_unitary(Eigen::Index dim, RngStream& rng) {
  if (dim < 1) throw std::invalid_argument("haar_unitary: dim must be >= 1");
  cmat g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = rng.complex_gaussian();
  Eigen::HouseholderQR<cmat> qr(g);
  cmat q = qr.householderQ();
  const cmat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < dim; ++i) {
    const cxd rii = r(i, i);
    q.col(i) *= std::abs(rii) > 0.0 ? rii / std::abs(rii) : cxd(1.0, 0.0);
  }
  return q;
}

// random GUE-type Hermitian matrix, normalized entries O(1)
inline cmat random_hermitian(Eigen::Index dim, RngStream& rng) {
  cmat g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = rng.complex_gaussian();
  return 0.5 * (g + g.adjoint());
}

// closest unitary in Frobenius norm (polar factor)
inline cmat polar_unitary(const cmat& m) {
  Eigen::JacobiSVD<cmat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

// Hermitian operator with cached spectral decomposition.
struct HamiltonianModel {
  cmat h;
  SpectralDecomp spec;
};

inline HamiltonianModel make_hamiltonian(const cmat& h) {
  require_hermitian(h, "make_hamiltonian");
  return HamiltonianModel{h, eig_hermitian(h)};
}

}  // namespace gtps

#endif
