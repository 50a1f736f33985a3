#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "hdl/chars.hpp"
#include "support.hpp"

using namespace hdl;
using hdl::testing::coxeter;
using hdl::testing::split;
using hdl::testing::typed;

namespace {

unsigned totient(unsigned M) {
  unsigned c = 0;
  for (unsigned k = 1; k <= M; ++k) c += std::gcd(k, M) == 1;
  return c;
}

std::int32_t position(const Subgroup& H, std::int32_t g) { return H.pos[static_cast<std::size_t>(g)]; }

}  // namespace

TEST(Cyclo, KnownCyclotomicPolynomials) {
  EXPECT_EQ(cyclotomic_polynomial(1), (std::vector<std::int64_t>{-1, 1}));
  EXPECT_EQ(cyclotomic_polynomial(4), (std::vector<std::int64_t>{1, 0, 1}));
  EXPECT_EQ(cyclotomic_polynomial(6), (std::vector<std::int64_t>{1, -1, 1}));
  EXPECT_EQ(cyclotomic_polynomial(12), (std::vector<std::int64_t>{1, 0, -1, 0, 1}));
  EXPECT_EQ(cyclotomic_polynomial(7), std::vector<std::int64_t>(7, 1));
  for (unsigned M = 1; M <= 60; ++M) {
    const auto& phi = cyclotomic_polynomial(M);
    EXPECT_EQ(phi.size() - 1, totient(M));
    std::complex<double> z = 0, x = hdl::testing::root(M, 1), xp = 1;
    for (auto c : phi) {
      z += static_cast<double>(c) * xp;
      xp *= x;
    }
    EXPECT_LT(std::abs(z), 1e-8) << M;
  }
}

TEST(Cyclo, ExactArithmeticAgreesWithComplexNumbers) {
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> coef(-3, 3);
  for (std::uint32_t M : {1u, 2u, 3u, 4u, 6u, 8u, 12u, 15u, 24u, 56u}) {
    CycloValue all(M);
    for (std::uint32_t e = 0; e < M; ++e) all.add_root(e);
    EXPECT_EQ(all.is_zero(), M > 1);
    for (int t = 0; t < 30; ++t) {
      CycloValue a(M), b(M);
      for (std::uint32_t e = 0; e < M; ++e) {
        a.add_root(e, coef(rng));
        b.add_root(e, coef(rng));
      }
      EXPECT_LT(std::abs((a * b).numeric() - a.numeric() * b.numeric()), 1e-9);
      EXPECT_LT(std::abs((a + b).numeric() - (a.numeric() + b.numeric())), 1e-9);
      EXPECT_LT(std::abs(a.conj().numeric() - std::conj(a.numeric())), 1e-9);
      EXPECT_LT(std::abs(a.lift(2 * M).numeric() - a.numeric()), 1e-9);
      const auto norm = (a * a.conj()).numeric();
      EXPECT_LT(std::abs(norm.imag()), 1e-9);
      // the reduced representative is the same complex number
      const auto r = a.reduce();
      std::complex<double> z = 0;
      for (std::size_t e = 0; e < r.size(); ++e) z += static_cast<double>(r[e]) * hdl::testing::root(M, e);
      EXPECT_LT(std::abs(z - a.numeric()), 1e-9);
      EXPECT_EQ(a.is_zero(), std::abs(a.numeric()) < 1e-9);
    }
  }
  EXPECT_EQ(CycloValue::integer(6, -4).as_integer(), -4);
  EXPECT_FALSE(CycloValue::root(3, 1).as_integer().has_value());
  EXPECT_EQ((CycloValue::root(3, 1) + CycloValue::root(3, 2)).as_integer(), -1);
  EXPECT_THROW(CycloValue(3) + CycloValue(4), domain_error);
}

TEST(AbelianDual, SmallGroups) {
  const AbelianDual z2(2, 0, [](std::size_t a, std::size_t b) { return a ^ b; });
  EXPECT_EQ(z2.rank(), 1u);
  EXPECT_EQ(z2.orders(), (std::vector<std::uint64_t>{2}));
  EXPECT_EQ(z2.character_count(), 2u);

  // Z/2 × Z/4 as a*4 + b
  const AbelianDual g(8, 0, [](std::size_t x, std::size_t y) { return ((x / 4 + y / 4) % 2) * 4 + (x % 4 + y % 4) % 4; });
  std::multiset<std::uint64_t> orders(g.orders().begin(), g.orders().end());
  EXPECT_EQ(orders, (std::multiset<std::uint64_t>{2, 4}));
  EXPECT_EQ(g.exponent(), 4u);

  // S_3 by permutation composition
  std::vector<Perm> s3{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  auto mul = [&](std::size_t a, std::size_t b) {
    const Perm c = perm_compose(s3[a], s3[b]);
    return static_cast<std::size_t>(std::find(s3.begin(), s3.end(), c) - s3.begin());
  };
  EXPECT_THROW(AbelianDual(6, 0, mul), domain_error);
}

TEST(AbelianDual, TorusCharactersAreOrthogonalHomomorphisms) {
  for (const auto& s : {coxeter(2, 1, 2, 2), split(2, 1, 2, 2), typed(2, 1, 3, 2, {2, 1}), coxeter(2, 1, 3, 2), split(3, 1, 2, 2)}) {
    const Torus T(s);
    ASSERT_LE(T.size(), 64u);
    EXPECT_EQ(T.character_count(), T.size());
    const std::uint32_t M = T.value_order();
    std::set<std::vector<std::uint32_t>> tables;
    for (std::size_t i = 0; i < T.character_count(); ++i) {
      const auto th = T.character(i);
      EXPECT_EQ(T.character_index(th), i);
      std::vector<std::uint32_t> vals;
      for (std::size_t t = 0; t < T.size(); ++t) vals.push_back(T.value(th, t));
      tables.insert(vals);
      for (auto g : T.dual().basis())
        for (std::size_t t = 0; t < T.size(); ++t) ASSERT_EQ(T.value(th, T.mul(g, t)), (vals[g] + vals[t]) % M);
      for (std::size_t j = 0; j < T.character_count(); ++j) {
        const auto ph = T.character(j);
        CycloValue sum(M);
        for (std::size_t t = 0; t < T.size(); ++t) sum.add_root(vals[t] + M - T.value(ph, t));
        ASSERT_EQ(sum.as_integer(), i == j ? static_cast<std::int64_t>(T.size()) : 0);
      }
    }
    EXPECT_EQ(tables.size(), T.size());
  }
}

TEST(PsiBeta, DistinctAdditiveCharacters) {
  for (const auto& sl : {split(2, 1, 2, 1), coxeter(2, 1, 2, 1), split(3, 1, 2, 1)}) {
    const PsiSpec psi;
    std::vector<Mat> X;
    for (std::uint64_t k = 0; k < sl.key_space(); ++k) X.push_back(sl.from_key(k));
    std::set<std::vector<std::uint32_t>> tables;
    for (const auto& beta : X) {
      std::vector<std::uint32_t> vals;
      for (const auto& x : X) vals.push_back(psi_beta(sl, psi, beta, x));
      tables.insert(vals);
      for (std::size_t a = 0; a < X.size(); ++a)
        for (std::size_t b = 0; b < X.size(); b += 3)
          ASSERT_EQ(psi_beta(sl, psi, beta, sl.add(X[a], X[b])), (vals[a] + vals[b]) % sl.p());
    }
    EXPECT_EQ(tables.size(), X.size());
    for (const auto& x : X) EXPECT_EQ(psi_beta(sl, psi, sl.zero(), x), 0u);
  }
}

TEST(PsiBeta, NontrivialOnTheTopLayerForEveryScale) {
  for (std::uint32_t p : {2u, 3u, 5u})
    for (std::uint32_t scale = 1; scale < p; ++scale) {
      const auto f = Field::build(p, 1, 2);
      const TruncRing R(f, 2);
      bool nontrivial = false;
      for (Field::Elem x = 0; x < p; ++x) nontrivial = nontrivial || PsiSpec{scale}.exponent(*f, R.pi_power(1, x), 2) != 0;
      EXPECT_TRUE(nontrivial);
    }
}

TEST(ExtractBeta, FibersForCoxeterGL2OverF2) {
  const Torus T(coxeter(2, 1, 2, 2));
  const TorusCharacters C(T);
  EXPECT_EQ(C.extract_beta(T.trivial_character()), C.level_spec().zero());
  std::map<std::uint64_t, int> fibers;
  for (std::size_t i = 0; i < T.character_count(); ++i) ++fibers[C.level_spec().key(C.extract_beta(T.character(i)))];
  EXPECT_EQ(fibers.size(), 4u);
  for (auto [k, c] : fibers) EXPECT_EQ(c, 3);
}

TEST(ExtractBeta, UniqueSolutionBySearch) {
  for (const auto& s : {coxeter(2, 1, 2, 2), coxeter(3, 1, 2, 2), typed(2, 1, 3, 2, {2, 1}), coxeter(2, 1, 2, 4), split(3, 1, 2, 2)}) {
    const Torus T(s);
    const TorusCharacters C(T);
    const GroupSpec& sl = C.level_spec();
    const int l = s.half_level();
    const auto betas = twisted_diagonal_elements(sl);
    const std::uint32_t M = T.value_order(), p = s.p();
    std::vector<std::size_t> points;
    for (const auto& D : betas) points.push_back(static_cast<std::size_t>(T.index_of(s.from_kernel_coordinates(D, l))));
    for (std::size_t i = 0; i < T.character_count(); ++i) {
      const auto th = T.character(i);
      std::vector<Mat> matches;
      for (const auto& b : betas) {
        bool ok = true;
        for (std::size_t d = 0; d < betas.size() && ok; ++d) ok = T.value(th, points[d]) == (M / p) * psi_beta(sl, C.psi(), b, betas[d]);
        if (ok) matches.push_back(b);
      }
      ASSERT_EQ(matches.size(), 1u) << s.cache_key() << " θ=" << th.to_string();
      ASSERT_EQ(matches.front(), C.extract_beta(th));
    }
  }
}

TEST(TrivialLift, RestrictionsAndHomomorphism) {
  for (const auto& s : {coxeter(2, 1, 2, 2), coxeter(3, 1, 2, 2)}) {
    const TorusSetting& S = hdl::testing::setting(s);
    const GroupTable& G = S.group();
    const Torus& T = S.torus();
    const Subgroup& H = S.tu();
    const std::uint32_t M = T.value_order(), p = s.p();
    const auto kernel = G.subgroup(SubgroupTag::kernel(s.half_level()));
    const auto radical = G.subgroup({SubgroupTag::Kind::arithmetic_radical, 0});
    for (std::size_t i = 0; i < T.character_count(); ++i) {
      const auto th = T.character(i);
      const LinearCharacter chi = S.trivial_lift(th);
      ASSERT_EQ(chi.M, M);
      for (std::size_t t = 0; t < T.size(); ++t) ASSERT_EQ(chi.exps[static_cast<std::size_t>(position(H, G.index_of(T.element(t))))], T.value(th, t));
      for (auto u : radical) ASSERT_EQ(chi.exps[static_cast<std::size_t>(position(H, u))], 0u);
      const Mat beta = S.characters().extract_beta(th);
      for (auto k : kernel) {
        const Mat X = s.kernel_coordinates(G.element(static_cast<std::size_t>(k)), s.half_level());
        ASSERT_EQ(chi.exps[static_cast<std::size_t>(position(H, k))], (M / p) * psi_beta(S.characters().level_spec(), S.characters().psi(), beta, X));
      }
      if (s.n() == 2)
        for (std::size_t a = 0; a < H.size(); ++a)
          for (std::size_t b = 0; b < H.size(); ++b) {
            const auto ab = G.mul(static_cast<std::size_t>(H.elems[a]), static_cast<std::size_t>(H.elems[b]));
            ASSERT_EQ(chi.exps[static_cast<std::size_t>(position(H, ab))], (chi.exps[a] + chi.exps[b]) % M);
          }
    }
  }
}

TEST(Genericity, TrivialCharacterFailsEverything) {
  for (const auto& s : {coxeter(2, 1, 2, 2), coxeter(2, 1, 3, 2), split(3, 1, 2, 2)}) {
    const Torus T(s);
    const TorusCharacters C(T);
    const auto g = C.genericity(T.trivial_character());
    EXPECT_FALSE(g.regular);
    EXPECT_FALSE(g.general_position);
    EXPECT_FALSE(g.stabilizer);
    EXPECT_FALSE(g.generic());
  }
}

TEST(Genericity, CoxeterGL2OverF2HasSixGenericCharacters) {
  const TorusSetting& S = hdl::testing::setting(coxeter(2, 1, 2, 2));
  EXPECT_EQ(S.generic_characters().size(), 6u);
}

// Stab_G(ψ_β on G^l) = TU^± checked straight from the definition.
TEST(Genericity, StabilizerConditionAgainstDirectStabilizer) {
  for (const auto& s : {coxeter(2, 1, 2, 2), coxeter(3, 1, 2, 2), split(2, 1, 2, 2)}) {
    const TorusSetting& S = hdl::testing::setting(s);
    const GroupTable& G = S.group();
    const TorusCharacters& C = S.characters();
    const int l = s.half_level();
    std::vector<Mat> X;
    for (auto k : G.subgroup(SubgroupTag::kernel(l))) X.push_back(G.element(static_cast<std::size_t>(k)));
    const std::set<std::int32_t> tu(S.tu().elems.begin(), S.tu().elems.end());
    std::map<std::uint64_t, bool> by_beta;
    for (std::size_t i = 0; i < S.torus().character_count(); ++i) {
      const auto th = S.torus().character(i);
      const Mat beta = C.extract_beta(th);
      const auto key = C.level_spec().key(beta);
      if (!by_beta.count(key)) {
        std::set<std::int32_t> stab;
        for (std::size_t g = 0; g < G.size(); ++g) {
          const Mat x = G.element(g), xi = s.inv(x);
          bool fixes = true;
          for (std::size_t k = 0; k < X.size() && fixes; ++k)
            fixes = psi_beta(C.level_spec(), C.psi(), beta, s.kernel_coordinates(s.conj(X[k], xi, x), l)) ==
                    psi_beta(C.level_spec(), C.psi(), beta, s.kernel_coordinates(X[k], l));
          if (fixes) stab.insert(static_cast<std::int32_t>(g));
        }
        by_beta[key] = stab == tu;
      }
      EXPECT_EQ(C.genericity(th).stabilizer, by_beta[key]) << s.cache_key() << " θ=" << th.to_string();
    }
  }
}

TEST(Genericity, CoxeterSetsAndWeylInvariance) {
  for (const auto& s : {coxeter(2, 1, 2, 2), coxeter(3, 1, 2, 2), coxeter(2, 1, 3, 2), coxeter(2, 2, 2, 2)}) {
    const Torus T(s);
    const TorusCharacters C(T);
    std::set<std::size_t> generic;
    for (std::size_t i = 0; i < T.character_count(); ++i) {
      const auto g = C.genericity(T.character(i));
      EXPECT_EQ(g.stabilizer, g.regular) << s.cache_key();
      if (g.regular) {
        EXPECT_TRUE(g.general_position) << s.cache_key();
      }
      if (g.generic()) generic.insert(i);
    }
    for (const auto& v : T.weyl_group())
      for (auto i : generic) EXPECT_TRUE(generic.count(T.character_index(T.weyl_act(v, T.character(i)))));
  }
}

TEST(Genericity, InvariantUnderRescalingPsi) {
  for (const auto& s : {coxeter(3, 1, 2, 2), typed(3, 1, 3, 2, {2, 1})}) {
    const Torus T(s);
    const TorusCharacters C1(T, PsiSpec{1}), C2(T, PsiSpec{2});
    for (std::size_t i = 0; i < T.character_count(); ++i) {
      const auto th = T.character(i);
      const auto a = C1.genericity(th), b = C2.genericity(th);
      ASSERT_EQ(a.generic(), b.generic());
      ASSERT_EQ(a.stabilizer, b.stabilizer);
      // rescaling ψ by k rescales β by k^{-1}
      ASSERT_EQ(C1.extract_beta(th), C2.level_spec().add(C2.extract_beta(th), C2.extract_beta(th)));
    }
  }
}

TEST(PrincipalCharacter, ExistsForEveryTwistedDiagonalBeta) {
  for (const auto& s : {coxeter(2, 1, 2, 2), split(3, 1, 2, 2), typed(2, 1, 3, 2, {2, 1})}) {
    const Torus T(s);
    const TorusCharacters C(T);
    const auto teich = T.teichmuller_subgroup();
    EXPECT_EQ(teich.size() * T.level_subgroup(1).size(), T.size());
    for (const auto& beta : twisted_diagonal_elements(C.level_spec())) {
      const auto th = C.principal_character(beta);
      ASSERT_TRUE(th.has_value());
      EXPECT_EQ(C.extract_beta(*th), beta);
      for (auto t : teich) EXPECT_EQ(T.value(*th, t), 0u);
    }
  }
}
