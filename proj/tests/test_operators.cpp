#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "qmbs/operators.hpp"
#include "qmbs/scars.hpp"
#include "qmbs/spectra.hpp"

using namespace qmbs;
using oracle::Dense;

namespace {

double max_abs(const Dense& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

CouplingSet two_site() { return sample_couplings(build_chain(2, Boundary::open), {1.0, 1.0}, {0.0, 0.0}, 1); }

CouplingSet random_bipartite(const LatticeSpec& lat, std::uint64_t seed, bool with_b = false) {
  SamplingOptions o;
  if (with_b) o.b_range = Interval{0.5, 1.5};
  return sample_couplings(lat, {0.5, 1.5}, {-0.5, 0.5}, seed, o);
}

CouplingSet random_triangular(std::uint64_t seed, int q_power) {
  SamplingOptions o;
  o.mode = CouplingMode::nonbipartite;
  o.q_power = q_power;
  return sample_couplings(build_triangular(2, 3), {0.5, 1.5}, {-0.5, 0.5}, seed, o);
}

StateVector random_state(BasisPtr b, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> d;
  StateVector s(std::move(b));
  for (Eigen::Index i = 0; i < s.amplitudes.size(); ++i) s.amplitudes[i] = Complex(d(g), d(g));
  return s.normalized();
}

/// Dense full-Fock rendering of a ModelTerms description.
Dense model_oracle(const oracle::DenseFock& f, const ModelTerms& m) {
  Dense h = f.hopping(m.hopping) + f.correlated(m.pair_matrix, m.correlated_coeff, m.form == CorrelatedForm::hole);
  for (int x = 0; x < f.sites(); ++x) h += m.onsite[x] * f.n(x);
  return h + m.offset * f.id();
}

Dense particle_hole_unitary(const oracle::DenseFock& f) {
  Dense u = f.id();
  for (int x = 0; x < f.sites(); ++x) u = u * (f.c(x) - f.cdag(x));
  return u;
}

void expect_matches_oracle(const oracle::DenseFock& f, const Dense& full, const std::function<SectorOperator(BasisPtr)>& build,
                           int n_sites, int from_n = 0, int to_n = -1) {
  for (int m = from_n; m <= n_sites; ++m) {
    const SectorOperator op = build(make_basis(n_sites, m));
    const Dense ref = f.restrict(full, *op.codomain, *op.domain);
    EXPECT_LT(max_abs(oracle::to_dense(op) - ref), 1e-12) << "sector " << m;
    if (to_n >= 0 && m >= to_n) break;
  }
}

}  // namespace

TEST(Hop, TwoSiteSingleParticle) {
  const auto h = oracle::to_dense(build_hop(two_site(), make_basis(2, 1)));
  Dense ref(2, 2);
  ref << 0, 1, 1, 0;
  EXPECT_EQ(h, ref);
}

TEST(Hop, SingleParticleSectorIsT) {
  const auto cs = random_bipartite(build_rectangular(3, 2, Boundary::open), 9);
  EXPECT_LT(max_abs(oracle::to_dense(build_hop(cs, make_basis(6, 1))) - cs.T), 1e-15);
  const auto tri = random_triangular(3, 1);
  EXPECT_LT(max_abs(oracle::to_dense(build_hop(tri, make_basis(6, 1))) - tri.T), 1e-15);
}

TEST(Hop, AnnihilatesFilledState) {
  const auto cs = random_bipartite(build_rectangular(4, 3, Boundary::open), 2);
  EXPECT_EQ(build_hop(cs, make_basis(12, 12)).apply(filled_state(12)).norm(), 0.0);
  EXPECT_LT(build_cor(cs, make_basis(12, 12)).apply(filled_state(12)).norm(), 1e-14);
}

TEST(Assembly, MatchesJordanWignerBipartite) {
  const auto lat = build_rectangular(4, 2, Boundary::open);
  const oracle::DenseFock f(8);
  const auto cs = random_bipartite(lat, 21, true);
  const Dense hop = f.hopping(cs.T), cor = f.correlated(cs.Q, cs.A), par = f.correlated(cs.Q, *cs.B);
  expect_matches_oracle(f, hop, [&](BasisPtr b) { return build_hop(cs, b); }, 8);
  expect_matches_oracle(f, cor, [&](BasisPtr b) { return build_cor(cs, b); }, 8);
  expect_matches_oracle(f, hop + cor, [&](BasisPtr b) { return build_hamiltonian(cs, b); }, 8);
  expect_matches_oracle(f, par, [&](BasisPtr b) { return build_parent(cs, b); }, 8);
  expect_matches_oracle(f, f.pair(cs.Q), [&](BasisPtr b) { return build_q_operator(cs, b); }, 8, 2);
  expect_matches_oracle(f, f.pair(cs.Q, true), [&](BasisPtr b) { return build_pair_creation(cs.Q, b); }, 8, 0, 6);
}

TEST(Assembly, MatchesJordanWignerNonbipartite) {
  const oracle::DenseFock f(6);
  for (int p : {1, 3}) {
    const auto cs = random_triangular(8 + static_cast<std::uint64_t>(p), p);
    expect_matches_oracle(f, f.hopping(cs.T) + f.correlated(cs.Q, cs.A), [&](BasisPtr b) { return build_hamiltonian(cs, b); }, 6);
    expect_matches_oracle(f, f.pair(cs.Q), [&](BasisPtr b) { return build_q_operator(cs, b); }, 6, 2);
  }
}

TEST(Assembly, HermitianAndComplexFlag) {
  const auto cs = random_triangular(4, 1);
  const auto h = build_hamiltonian(cs, make_basis(6, 3));
  EXPECT_LT(hermiticity_error(h), 1e-15);
  EXPECT_FALSE(h.is_real());
  EXPECT_TRUE(build_hamiltonian(random_bipartite(build_chain(6, Boundary::open), 1), make_basis(6, 3)).is_real());
}

TEST(Assembly, NonzeroCapRefuses) {
  const auto cs = random_bipartite(build_rectangular(4, 3, Boundary::open), 2);
  AssemblyOptions o;
  o.max_nonzeros = 10;
  EXPECT_THROW(build_hamiltonian(cs, make_basis(12, 6), o), CapacityExceeded);
}

TEST(Cor, UniformPeriodicChainMatchesExpandedForm) {
  const int L = 6;
  const double t = 0.8;
  const auto lat = build_chain(L, Boundary::periodic);
  const auto cs = sample_couplings(lat, {t, t}, {-0.5, 0.5}, 13);
  const oracle::DenseFock f(L);
  Dense ref = f.zero();
  for (int j = 0; j < L; ++j) {
    const int l = (j + L - 1) % L, r = (j + 1) % L;
    ref += t * t * cs.A[j] *
           (f.n(l) + f.n(r) - f.n(l) * f.n(j) - f.n(j) * f.n(r) + f.cdag(l) * f.c(r) + f.cdag(r) * f.c(l) -
            f.cdag(l) * f.n(j) * f.c(r) - f.cdag(r) * f.n(j) * f.c(l));
  }
  expect_matches_oracle(f, ref, [&](BasisPtr b) { return build_cor(cs, b); }, L);
}

TEST(Cor, ZeroCoefficientsGiveZeroMatrix) {
  const auto cs = sample_couplings(build_chain(6, Boundary::open), {0.5, 1.5}, {0.0, 0.0}, 3);
  EXPECT_EQ(frobenius_norm(build_cor(cs, make_basis(6, 3))), 0.0);
}

TEST(Parent, SameAsCorWithBWeights) {
  auto cs = random_bipartite(build_rectangular(4, 2, Boundary::open), 5, true);
  auto swapped = cs;
  swapped.A = *cs.B;
  for (int m = 0; m <= 8; ++m) {
    const auto b = make_basis(8, m);
    EXPECT_EQ(oracle::to_dense(build_parent(cs, b)), oracle::to_dense(build_cor(swapped, b)));
  }
}

TEST(Parent, PositiveSemidefiniteAndKillsTower) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto cs = random_bipartite(build_rectangular(4, 2, Boundary::open), seed, true);
    const auto tower = build_scar_tower(cs);
    for (int m = 0; m <= 8; ++m) {
      const auto op = build_parent(cs, make_basis(8, m));
      const auto e = diagonalize(op, false).eigenvalues;
      const double nrm = e.cwiseAbs().maxCoeff();
      EXPECT_GE(e.minCoeff(), -1e-10 * std::max(nrm, 1.0));
      if (const StateVector* psi = tower.in_sector(m)) EXPECT_LT(op.apply(*psi).norm(), 1e-12);
    }
  }
  auto cs = random_bipartite(build_chain(4, Boundary::open), 1, true);
  (*cs.B)[2] = 0.0;
  EXPECT_THROW(build_parent(cs, make_basis(4, 2)), InvalidParameter);
  cs.B.reset();
  EXPECT_THROW(build_parent(cs, make_basis(4, 2)), InvalidParameter);
}

TEST(QOperator, TwoSiteSigns) {
  const auto out = build_q_operator(two_site(), make_basis(2, 2)).apply(filled_state(2));
  ASSERT_EQ(out.n_particles(), 0);
  EXPECT_EQ(out.amplitudes[0], Complex(-2.0));
  // Same number from the symbolic engine: (c1 c2 - c2 c1) c1† c2† |vac>.
  const auto s = oracle::Symbolic::vacuum().create(1).create(0);
  const double amp = s.annihilate(1).annihilate(0).coefficient({}) - s.annihilate(0).annihilate(1).coefficient({});
  EXPECT_EQ(amp, -2.0);
}

TEST(QOperator, SectorBookkeeping) {
  const auto cs = random_bipartite(build_chain(4, Boundary::open), 2);
  EXPECT_THROW(build_q_operator(cs, make_basis(4, 1)), InvalidParameter);
  const auto q = build_q_operator(cs, make_basis(4, 2));
  EXPECT_EQ(q.codomain->n_particles(), 0);
  EXPECT_EQ(q.apply(random_state(make_basis(4, 2), 3)).n_particles(), 0);
  EXPECT_THROW(build_pair_creation(cs.Q, make_basis(4, 3)), InvalidParameter);
}

TEST(BondDensity, Examples) {
  const auto lat = build_rectangular(3, 2, Boundary::open);
  EXPECT_DOUBLE_EQ(bond_density_expectation(filled_state(6), lat.bonds), 1.0);
  EXPECT_DOUBLE_EQ(bond_density_expectation(vacuum_state(6), lat.bonds), 0.0);
  EXPECT_DOUBLE_EQ(bond_density_expectation(filled_state(2), {{0, 1}}), 1.0);
  EXPECT_THROW(bond_density_expectation(filled_state(2), {}), InvalidParameter);
}

TEST(BondDensity, MatchesJordanWigner) {
  const auto lat = build_rectangular(3, 2, Boundary::open);
  const oracle::DenseFock f(6);
  const auto psi = random_state(make_basis(6, 3), 8);
  Dense obs = f.zero();
  for (auto [x, y] : lat.bonds) obs += f.n(x) * f.n(y);
  const Eigen::VectorXcd v = f.embed(psi);
  const double ref = (v.adjoint() * obs * v)(0, 0).real() / static_cast<double>(lat.bonds.size());
  EXPECT_NEAR(bond_density_expectation(psi, lat.bonds), ref, 1e-14);
}

TEST(ParticleHole, UnitaryConjugationMatchesTransformedTerms) {
  const oracle::DenseFock f(6);
  const Dense u = particle_hole_unitary(f);
  EXPECT_LT(max_abs(u.adjoint() * u - f.id()), 1e-14);
  std::vector<ModelTerms> models = {model_terms(random_bipartite(build_chain(6, Boundary::open), 4)),
                                    model_terms(random_triangular(6, 1)), model_terms(random_triangular(7, 3))};
  for (const auto& m : models) {
    const Dense h = model_oracle(f, m);
    const ModelTerms dual = particle_hole_transform(m);
    EXPECT_LT(max_abs(u.adjoint() * h * u - model_oracle(f, dual)), 1e-12);
    // The library's sector blocks of H~ agree with the oracle too.
    expect_matches_oracle(f, model_oracle(f, dual), [&](BasisPtr b) { return build_model_hamiltonian(dual, b); }, 6);
    // Pair operator transforms into the creation form: U† Q U = sum q c† c†.
    EXPECT_LT(max_abs(u.adjoint() * f.pair(m.pair_matrix) * u - f.pair(dual.pair_matrix, true)), 1e-12);
  }
}

TEST(ParticleHole, StateMapsMatchUnitary) {
  const oracle::DenseFock f(5);
  const Dense u = particle_hole_unitary(f);
  for (int m = 0; m <= 5; ++m) {
    const auto psi = random_state(make_basis(5, m), 30 + static_cast<std::uint64_t>(m));
    EXPECT_LT((f.embed(apply_particle_hole(psi)) - u * f.embed(psi)).norm(), 1e-14);
    EXPECT_LT((f.embed(apply_particle_hole_adjoint(psi)) - u.adjoint() * f.embed(psi)).norm(), 1e-14);
  }
}

TEST(ParticleHole, SpectraAgreeUnderSectorMap) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto m = model_terms(random_bipartite(build_chain(6, Boundary::periodic), seed));
    const auto dual = particle_hole_transform(m);
    for (int n = 0; n <= 6; ++n) {
      const auto e1 = diagonalize(build_model_hamiltonian(m, make_basis(6, n)), false).eigenvalues;
      const auto e2 = diagonalize(build_model_hamiltonian(dual, make_basis(6, 6 - n)), false).eigenvalues;
      EXPECT_LT((e1 - e2).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(ParticleHole, DualTowerFromCreationOperator) {
  const auto cs = random_bipartite(build_chain(6, Boundary::open), 3);
  const auto dual = particle_hole_transform(cs);
  const auto tower = build_scar_tower(cs);
  StateVector psi = vacuum_state(6);
  for (int k = 0; k <= 3; ++k) {
    const auto h = build_model_hamiltonian(dual, psi.basis);
    EXPECT_LT(h.apply(psi).norm(), 1e-12 * psi.norm());
    // Q~^k |vac> is U† |Psi_k> up to a global sign.
    const StateVector ref = apply_particle_hole_adjoint(tower.at(k));
    EXPECT_NEAR(std::abs(inner(ref, psi.normalized())), 1.0, 1e-12);
    if (k < 3) psi = build_model_pair_operator(dual, psi.basis).apply(psi);
  }
}

TEST(ParticleHole, Involution) {
  for (const auto& m : {model_terms(random_bipartite(build_chain(6, Boundary::open), 2)), model_terms(random_triangular(2, 3))}) {
    const ModelTerms back = particle_hole_transform(particle_hole_transform(m));
    EXPECT_LT(max_abs(back.hopping - m.hopping), 1e-14);
    EXPECT_LT((back.correlated_coeff - m.correlated_coeff).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT(back.onsite.cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT(std::abs(back.offset), 1e-13);
    EXPECT_EQ(back.form, m.form);
    EXPECT_EQ(back.pair, m.pair);
  }
}

TEST(Commutator, HopCommutesWithQ) {
  for (const auto& cs : {random_bipartite(build_rectangular(3, 2, Boundary::open), 3), random_triangular(5, 1), random_triangular(5, 3)}) {
    const int n = cs.n_sites();
    const auto hop = build_family(n, all_sectors(n), [&](BasisPtr b) { return build_hop(cs, b); });
    const auto ham = build_family(n, all_sectors(n), [&](BasisPtr b) { return build_hamiltonian(cs, b); });
    const auto q = build_q_family(cs);
    for (int m = 2; m <= n; m += 2) {
      const auto psi = random_state(make_basis(n, m), 77 + static_cast<std::uint64_t>(m));
      EXPECT_LT(commutator_apply(hop, q, psi).norm(), 1e-12);
    }
    EXPECT_LT(commutator_apply(ham, q, filled_state(n)).norm(), 1e-12);
    const auto psi = random_state(make_basis(n, 3), 5);
    EXPECT_EQ(commutator_apply(ham, ham, psi).norm(), 0.0);
  }
}

TEST(Commutator, OnSectorMatchesApply) {
  const auto cs = random_bipartite(build_chain(6, Boundary::open), 6);
  const auto ham = build_family(6, all_sectors(6), [&](BasisPtr b) { return build_hamiltonian(cs, b); });
  const auto q = build_q_family(cs);
  const auto psi = random_state(make_basis(6, 4), 1);
  const auto c = commutator_on_sector(ham, q, 4);
  EXPECT_LT((c.apply(psi).amplitudes - commutator_apply(ham, q, psi).amplitudes).norm(), 1e-13);
}

TEST(Operators, SpectralNormEstimate) {
  const auto cs = random_bipartite(build_chain(8, Boundary::open), 3);
  const auto h = build_hamiltonian(cs, make_basis(8, 4));
  const auto e = diagonalize(h, false).eigenvalues;
  EXPECT_NEAR(spectral_norm_estimate(h, 500), e.cwiseAbs().maxCoeff(), 1e-4 * e.cwiseAbs().maxCoeff());
}

TEST(Operators, CooFormat) {
  std::ostringstream os;
  write_coo(os, build_hop(two_site(), make_basis(2, 1)));
  EXPECT_EQ(os.str(), "# rows 2 cols 2 nnz 2\n1 0 1 0\n0 1 1 0\n");
}
