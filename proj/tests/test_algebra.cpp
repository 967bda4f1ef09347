#include <doctest.h>

#include <vector>

#include "gtps/algebra.hpp"
#include "gtps/models.hpp"
#include "gtps/rng.hpp"

using namespace gtps;

namespace {

// literal block-structure basis of A (or A'), built independently of the
// library's Kraus machinery: embedded matrix units rotated by the frame
std::vector<cmat> oracle_basis(const AlgebraSpec& a, bool commutant) {
  std::vector<cmat> out;
  for (std::size_t j = 0; j < a.blocks().size(); ++j) {
    const Eigen::Index o = a.block_offset(j), n = a.blocks()[j].mult, d = a.blocks()[j].dim;
    if (!commutant) {
      for (Eigen::Index l = 0; l < d; ++l)
        for (Eigen::Index m = 0; m < d; ++m) {
          cmat b = cmat::Zero(a.dim(), a.dim());
          for (Eigen::Index e = 0; e < n; ++e) b(o + e * d + l, o + e * d + m) = 1.0;
          out.push_back(a.frame() * b * a.frame().adjoint());
        }
    } else {
      for (Eigen::Index l = 0; l < n; ++l)
        for (Eigen::Index m = 0; m < n; ++m) {
          cmat b = cmat::Zero(a.dim(), a.dim());
          for (Eigen::Index s = 0; s < d; ++s) b(o + l * d + s, o + m * d + s) = 1.0;
          out.push_back(a.frame() * b * a.frame().adjoint());
        }
    }
  }
  return out;
}

// Gram-Schmidt orthogonal projector onto the span of the given matrices
cmat project_span(const std::vector<cmat>& span, const cmat& x) {
  std::vector<cmat> ortho;
  for (const auto& raw : span) {
    cmat v = raw;
    for (const auto& u : ortho) v -= hs_inner(u, v) * u;
    const double n = v.norm();
    if (n > 1e-10) ortho.push_back(v / n);
  }
  cmat out = cmat::Zero(x.rows(), x.cols());
  for (const auto& u : ortho) out += hs_inner(u, x) * u;
  return out;
}

cmat random_op(Eigen::Index d, RngStream& rng) {
  cmat m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = rng.complex_gaussian();
  return m;
}

double trace_norm(const cmat& herm) {
  Eigen::SelfAdjointEigenSolver<cmat> es(herm);
  return es.eigenvalues().cwiseAbs().sum();
}

bool in_span(const std::vector<cmat>& span, const cmat& x, double tol = 1e-8) {
  return (project_span(span, x) - x).norm() < tol;
}

}  // namespace

TEST_SUITE("algebra") {

TEST_CASE("AlgebraSpec invariants and counting") {
  const cmat id4 = cmat::Identity(4, 4);
  CHECK_THROWS_AS(AlgebraSpec(4, {Block{1, 3}}, id4), std::invalid_argument);
  CHECK_THROWS_AS(AlgebraSpec(4, {Block{2, 2}}, cmat::Ones(4, 4)), std::invalid_argument);

  const AlgebraSpec ab = maximal_abelian(2, id4);
  CHECK(ab.dim_algebra() == 4);
  CHECK(ab.dim_commutant() == 4);
  CHECK(ab.collinear());
  CHECK(oracle_basis(ab, false).size() == static_cast<std::size_t>(ab.dim_algebra()));

  const AlgebraSpec fac = factor_bipartition(2, {0}, id4);
  CHECK(fac.dim_algebra() == 4);
  CHECK(fac.dim_commutant() == 4);
  CHECK(fac.dim_algebra() * fac.dim_commutant() == 16);  // collinear factor, trivial center
  CHECK(fac.collinear());

  // mixed block structure (1,2) ⊕ (2,1) is not collinear
  const AlgebraSpec mixed(4, {Block{1, 2}, Block{2, 1}}, id4);
  CHECK(!mixed.collinear());
  CHECK(mixed.dim_algebra() == 5);
  CHECK(mixed.dim_commutant() == 5);

  CHECK_THROWS_AS(factor_bipartition(2, {}, id4), std::invalid_argument);
  CHECK_THROWS_AS(factor_bipartition(2, {0, 1}, id4), std::invalid_argument);
}

TEST_CASE("maximal abelian projection: diagonal part in the frame basis") {
  const cmat id2 = cmat::Identity(2, 2);
  const AlgebraSpec a0 = maximal_abelian(1, id2);
  const auto p = projector_onto(a0);

  CHECK(max_abs(p.apply(pauli(Axis::x))) < 1e-14);
  CHECK(max_abs(p.apply(pauli(Axis::z)) - pauli(Axis::z)) < 1e-14);

  RngStream rng(3, "abelian");
  for (int rep = 0; rep < 5; ++rep) {
    const cmat u = haar_unitary(8, rng);
    const AlgebraSpec a = maximal_abelian(3, u);
    const cmat x = random_op(8, rng);
    // basis-expansion oracle
    const cmat expect = project_span(oracle_basis(a, false), x);
    CHECK((projector_onto(a).apply(x) - expect).norm() < 1e-10);
  }
}

TEST_CASE("factor projection is the conditional expectation onto the factor") {
  const cmat id4 = cmat::Identity(4, 4);
  const AlgebraSpec fac = factor_bipartition(2, {0}, id4);
  const auto p = projector_onto(fac);

  for (Axis ax : {Axis::x, Axis::y, Axis::z}) {
    // P_A(X ⊗ Y) = X Tr(Y)/2 ⊗ 1: traceless Y annihilated, identity passed through
    CHECK(max_abs(p.apply(kron(pauli(Axis::x), pauli(ax)))) < 1e-14);
  }
  CHECK(max_abs(p.apply(kron(pauli(Axis::y), cmat::Identity(2, 2))) -
                kron(pauli(Axis::y), cmat::Identity(2, 2))) < 1e-14);

  // P_{A+A'}(σ^x ⊗ σ^x) = 0, via the Gram-Schmidt span oracle
  auto span = oracle_basis(fac, false);
  for (auto& b : oracle_basis(fac, true)) span.push_back(b);
  const cmat xx = kron(pauli(Axis::x), pauli(Axis::x));
  CHECK(max_abs(project_span(span, xx)) < 1e-12);
  CHECK(max_abs(projector_onto_sum(fac).apply(xx)) < 1e-12);
}

TEST_CASE("projection oracle for the sum subspace on random inputs") {
  RngStream rng(5, "sum-oracle");
  const cmat u = haar_unitary(8, rng);
  for (const AlgebraSpec& a :
       {factor_bipartition(3, {0}, u), factor_bipartition(3, {0, 2}, u), maximal_abelian(3, u)}) {
    auto span = oracle_basis(a, false);
    for (auto& b : oracle_basis(a, true)) span.push_back(b);
    for (int rep = 0; rep < 3; ++rep) {
      const cmat x = random_op(8, rng);
      CHECK((projector_onto_sum(a).apply(x) - project_span(span, x)).norm() < 1e-10);
    }
  }
}

TEST_CASE("SuperProjection: Kraus completeness, idempotence, unitality, self-adjointness") {
  RngStream rng(7, "proj");
  const cmat u8 = haar_unitary(8, rng);
  const cmat u16 = haar_unitary(16, rng);
  const std::vector<AlgebraSpec> algs = {
      maximal_abelian(3, u8), factor_bipartition(3, {1}, u8), factor_bipartition(4, {0, 1}, u16),
      AlgebraSpec(8, {Block{2, 2}, Block{4, 1}}, u8)};
  for (const auto& a : algs) {
    const Eigen::Index d = a.dim();
    for (ProjKind kind : {ProjKind::onto_algebra, ProjKind::onto_commutant}) {
      const SuperProjection p(a, kind);
      const auto kraus = p.kraus();
      CHECK(static_cast<Eigen::Index>(kraus.size()) ==
            (kind == ProjKind::onto_algebra ? a.dim_commutant() : a.dim_algebra()));
      cmat comp = cmat::Zero(d, d);
      cmat sum_action = cmat::Zero(d, d);
      const cmat x = random_op(d, rng);
      for (const auto& f : kraus) {
        comp += f.adjoint() * f;
        sum_action += f * x * f.adjoint();
      }
      CHECK(max_abs(comp - cmat::Identity(d, d)) < 1e-12);
      CHECK((sum_action - p.apply(x)).norm() < 1e-10);  // block formula == Kraus sum
    }
    for (ProjKind kind : {ProjKind::onto_algebra, ProjKind::onto_commutant, ProjKind::onto_sum,
                          ProjKind::complement}) {
      const SuperProjection p(a, kind);
      const cmat x = random_op(d, rng);
      const cmat y = random_op(d, rng);
      const cmat px = p.apply(x);
      CHECK((p.apply(px) - px).norm() < 1e-10);                                    // idempotent
      CHECK(std::abs(hs_inner(p.apply(x), y) - hs_inner(x, p.apply(y))) < 1e-10);  // self-adjoint
      if (kind != ProjKind::complement)
        CHECK(max_abs(p.apply(cmat::Identity(d, d)) - cmat::Identity(d, d)) < 1e-12);  // unital
      CHECK(std::abs(hs_inner(x - px, px)) < 1e-9);  // orthogonal residual
    }
    // P_{A+A'} = P_A + P_A' - P_A ∘ P_A'
    const cmat x = random_op(d, rng);
    const cmat lhs = projector_onto_sum(a).apply(x);
    const cmat rhs = projector_onto(a).apply(x) + projector_onto_commutant(a).apply(x) -
                     projector_onto(a).apply(projector_onto_commutant(a).apply(x));
    CHECK((lhs - rhs).norm() < 1e-10);
    // orthogonal decomposition of the HS norm
    const double nx = x.norm(), np = lhs.norm(), nq = complement_projector(a).apply(x).norm();
    CHECK(nx * nx == doctest::Approx(np * np + nq * nq).epsilon(1e-10));
  }
}

TEST_CASE("projection invariants hold at d = 64") {
  RngStream rng(9, "d64");
  const AlgebraSpec a = factor_bipartition(6, {0, 1, 2}, haar_unitary(64, rng));
  const cmat x = random_op(64, rng);
  const cmat px = projector_onto(a).apply(x);
  CHECK((projector_onto(a).apply(px) - px).norm() < 1e-10 * x.norm());
  const double nx = x.norm(), np = projector_onto_sum(a).apply(x).norm(),
               nq = complement_projector(a).apply(x).norm();
  CHECK(nx * nx == doctest::Approx(np * np + nq * nq).epsilon(1e-10));
}

TEST_CASE("complement annihilates the algebra and its commutant") {
  RngStream rng(11, "Q");
  const cmat u = haar_unitary(4, rng);
  const AlgebraSpec a = factor_bipartition(2, {0}, u);
  const cmat h = u * (kron(pauli(Axis::z), cmat::Identity(2, 2)) +
                      kron(cmat::Identity(2, 2), pauli(Axis::x))) *
                 u.adjoint();
  CHECK(max_abs(complement_projector(a).apply(h)) < 1e-13);
}

TEST_CASE("conjugate: identity, inverse, commutant gauge invariance") {
  RngStream rng(13, "conj");
  const cmat id = cmat::Identity(8, 8);
  const AlgebraSpec a = factor_bipartition(3, {0}, haar_unitary(8, rng));

  CHECK(distance(conjugate(a, id), a) < 1e-10);

  const cmat u = haar_unitary(8, rng);
  const AlgebraSpec twice = conjugate(conjugate(a, u), u.adjoint());
  const cmat x = random_op(8, rng);
  CHECK((projector_onto(twice).apply(x) - projector_onto(a).apply(x)).norm() < 1e-10);

  // unitaries generated inside the commutant fix the algebra
  RngStream crng(17, "comm-u");
  const cmat w = random_commutant_unitary(a, crng);
  const AlgebraSpec moved = conjugate(a, w);
  CHECK(distance(moved, a) < 1e-9);  // long-double cancellation floor, well under the 1e-8 equality contract
  const AlgebraSpec other = conjugate(a, haar_unitary(8, rng));
  CHECK(distance(moved, other) == doctest::Approx(distance(a, other)).epsilon(1e-9));

  CHECK_THROWS_AS((void)conjugate(a, cmat::Identity(4, 4)), std::invalid_argument);
}

TEST_CASE("commutant_bruteforce: abelian self-commutant, factor, double commutant") {
  const cmat id4 = cmat::Identity(4, 4);
  const AlgebraSpec ab = maximal_abelian(2, id4);
  const auto comm_ab = commutant_bruteforce(ab);
  CHECK(comm_ab.size() == 4);
  for (const auto& x : comm_ab) CHECK(in_span(oracle_basis(ab, false), x));

  const AlgebraSpec fac = factor_bipartition(2, {0}, id4);
  const auto comm_fac = commutant_bruteforce(fac);
  CHECK(comm_fac.size() == 4);  // 1 ⊗ B(C^2)
  for (const auto& x : comm_fac) CHECK(in_span(oracle_basis(fac, true), x));

  // every commutant element commutes with the algebra span; the double
  // commutant of a factor is the factor again
  RngStream rng(19, "bicomm");
  const AlgebraSpec rot = factor_bipartition(2, {1}, haar_unitary(4, rng));
  for (const auto& x : commutant_bruteforce(rot))
    for (const auto& c : oracle_basis(rot, false)) CHECK((x * c - c * x).norm() < 1e-8);
  // commutant of the commutant, via a second solve on the materialized basis
  const AlgebraSpec comm_as_spec(4, {Block{2, 2}}, rot.frame());  // placeholder structure
  (void)comm_as_spec;
  const auto comm = commutant_bruteforce(rot);
  // brute force on the commutant directly: elements commuting with all of comm
  std::vector<cmat> bicomm;
  {
    const Eigen::Index d = 4;
    cmat normal = cmat::Zero(d * d, d * d);
    const cmat idd = cmat::Identity(d, d);
    for (const auto& g : comm) {
      const cmat m = kron(g.transpose(), idd) - kron(idd, g);
      normal += m.adjoint() * m;
    }
    Eigen::SelfAdjointEigenSolver<cmat> es(normal);
    for (Eigen::Index i = 0; i < d * d; ++i) {
      if (es.eigenvalues()(i) > 1e-10 * std::max(1.0, es.eigenvalues().maxCoeff())) continue;
      cmat x(d, d);
      for (Eigen::Index c = 0; c < d; ++c) x.col(c) = es.eigenvectors().col(i).segment(c * d, d);
      bicomm.push_back(x);
    }
  }
  CHECK(bicomm.size() == oracle_basis(rot, false).size());
  for (const auto& x : bicomm) CHECK(in_span(oracle_basis(rot, false), x));
}

TEST_CASE("choi: identity map, abelian rank structure, purity") {
  // the full algebra B(H): P = id, Choi state = |Phi+><Phi+|
  const AlgebraSpec full(2, {Block{1, 2}}, cmat::Identity(2, 2));
  const ChoiState rho_full = choi(projector_onto(full));
  CHECK(std::abs(rho_full.rho.trace() - 1.0) < 1e-13);
  CHECK(std::abs((rho_full.rho * rho_full.rho).trace().real() - 1.0) < 1e-12);  // pure
  cvec phi = cvec::Zero(4);
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  CHECK(max_abs(rho_full.rho - phi * phi.adjoint()) < 1e-13);

  const AlgebraSpec ab = maximal_abelian(1, cmat::Identity(2, 2));
  const ChoiState rho_ab = choi(projector_onto(ab));
  Eigen::SelfAdjointEigenSolver<cmat> es(rho_ab.rho);
  CHECK(es.eigenvalues().minCoeff() > -1e-10);
  CHECK(std::abs(rho_ab.rho.trace() - 1.0) < 1e-13);
  int rank = 0;
  for (Eigen::Index i = 0; i < 4; ++i)
    if (es.eigenvalues()(i) > 1e-12) ++rank;
  CHECK(rank == 2);
  CHECK(es.eigenvalues().maxCoeff() == doctest::Approx(0.5));

  // purity Tr(rho^2) = dim A / d^2 for collinear algebras
  RngStream rng(23, "choi");
  for (const AlgebraSpec& a : {maximal_abelian(2, haar_unitary(4, rng)),
                               factor_bipartition(2, {0}, haar_unitary(4, rng)),
                               factor_bipartition(3, {0, 1}, haar_unitary(8, rng))}) {
    const ChoiState c = choi(projector_onto(a));
    const double purity = (c.rho * c.rho).trace().real();
    const double expect =
        static_cast<double>(a.dim_algebra()) / static_cast<double>(a.dim() * a.dim());
    CHECK(purity == doctest::Approx(expect).epsilon(1e-10));
    CHECK(max_abs(c.rho - c.rho.adjoint()) < 1e-12);
  }

  CHECK_THROWS_AS((void)choi(projector_onto_commutant(ab)), std::domain_error);
}

TEST_CASE("distance: coincidence, conjugation invariance, dual route") {
  RngStream rng(29, "dist");
  const cmat id = cmat::Identity(4, 4);
  const AlgebraSpec a = maximal_abelian(2, haar_unitary(4, rng));
  CHECK(distance(a, a) < 1e-12);

  const AlgebraSpec b = maximal_abelian(2, haar_unitary(4, rng));
  const cmat u = haar_unitary(4, rng);
  CHECK(distance(conjugate(a, u), conjugate(b, u)) ==
        doctest::Approx(distance(a, b)).epsilon(1e-10));

  // one-qubit rotation between two maximal abelian algebras: Choi route equals
  // the superoperator (Kraus) route
  const std::vector<double> th{0.37};
  const AlgebraSpec a1 = maximal_abelian(1, cmat::Identity(2, 2));
  const AlgebraSpec a2 = conjugate(a1, abelian_rotation(th));
  CHECK(distance(a1, a2) == doctest::Approx(distance_choi(a1, a2)).epsilon(1e-10));
  CHECK(distance(a1, a2) > 1e-3);

  for (int rep = 0; rep < 4; ++rep) {
    const AlgebraSpec x = factor_bipartition(3, {0}, haar_unitary(8, rng));
    const AlgebraSpec y = factor_bipartition(3, {0}, haar_unitary(8, rng));
    CHECK(distance(x, y) == doctest::Approx(distance_choi(x, y)).epsilon(1e-10));
    CHECK(distance(x, y) == doctest::Approx(distance(y, x)).epsilon(1e-12));
  }

  CHECK_THROWS_AS((void)distance(a, factor_bipartition(2, {0}, id)), std::invalid_argument);
}

TEST_CASE("distance: triangle inequality and trace-norm bound on random triples") {
  RngStream rng(31, "tri");
  for (int rep = 0; rep < 5; ++rep) {
    const AlgebraSpec x = maximal_abelian(2, haar_unitary(4, rng));
    const AlgebraSpec y = maximal_abelian(2, haar_unitary(4, rng));
    const AlgebraSpec z = maximal_abelian(2, haar_unitary(4, rng));
    CHECK(distance(x, z) <= distance(x, y) + distance(y, z) + 1e-12);
    const cmat diff = choi(projector_onto(x)).rho - choi(projector_onto(y)).rho;
    CHECK(distance(x, y) <= trace_norm(diff) + 1e-12);
  }
}

TEST_CASE("approx_equal uses the gauge-free distance criterion") {
  RngStream rng(37, "eq");
  const AlgebraSpec a = factor_bipartition(2, {0}, haar_unitary(4, rng));
  RngStream crng(41, "gauge");
  const cmat w = random_algebra_unitary(a, crng);  // algebra-internal unitary: same algebra
  CHECK(approx_equal(a, conjugate(a, w)));
  CHECK(!approx_equal(a, conjugate(a, haar_unitary(4, rng))));
}

TEST_CASE("metric_element: annihilated directions and closed form") {
  const AlgebraSpec ab2 = maximal_abelian(2, cmat::Identity(4, 4));

  // k inside A + A' gives zero
  const cmat kz = pauli_string(2, {{0, Axis::z}}) + 0.7 * pauli_string(2, {{1, Axis::z}});
  CHECK(metric_element(ab2, kz) < 1e-20);

  // equal rotation angles: Q(k) = k and the metric is kappa^2 ||k||^2
  const std::vector<double> dth{0.01, 0.01};
  const cmat k = abelian_rotation_generator(dth);
  const double kappa = 2.0 / static_cast<double>(ab2.dim_commutant());
  CHECK(metric_element(ab2, k) ==
        doctest::Approx(kappa * kappa * k.norm() * k.norm()).epsilon(1e-12));
  // frozen normalization: metric = 2^-N * sum dtheta_i^2
  CHECK(metric_element(ab2, k) ==
        doctest::Approx(abelian_metric_scale(2) * (dth[0] * dth[0] + dth[1] * dth[1]))
            .epsilon(1e-12));

  const AlgebraSpec bad(4, {Block{1, 2}, Block{2, 1}}, cmat::Identity(4, 4));
  CHECK_THROWS_AS((void)metric_element(bad, kz), std::domain_error);
}

TEST_CASE("metric_element equals the finite-difference squared distance") {
  RngStream rng(47, "metric-fd");
  auto fd_metric = [](const AlgebraSpec& a, const cmat& k, double eps) {
    auto g = [&](double e) {
      const cmat u = unitary_exp(cxd(0, e) * k);
      const double dd = distance(a, conjugate(a, u));
      return dd * dd / (e * e);
    };
    return (4.0 * g(eps / 2) - g(eps)) / 3.0;  // Richardson: D^2/e^2 is even in e
  };
  for (int rep = 0; rep < 6; ++rep) {
    const bool abelian = rep % 2 == 0;
    const AlgebraSpec a = abelian ? maximal_abelian(2, haar_unitary(4, rng))
                                  : factor_bipartition(3, {0}, haar_unitary(8, rng));
    cmat k = random_hermitian(a.dim(), rng);
    k /= k.norm();
    const double m = metric_element(a, k);
    const double fd = fd_metric(a, k, 2e-2);
    CHECK(std::abs(fd - m) < 1e-5 * std::max(m, 1e-12));
  }
}

}  // TEST_SUITE
