#include <gtest/gtest.h>

#include <random>
#include <set>

#include "hdl/liealg.hpp"
#include "support.hpp"

using namespace hdl;

namespace {

const LetellierLab& lab(std::uint32_t p, int n) {
  static std::map<std::pair<std::uint32_t, int>, std::unique_ptr<LetellierLab>> cache;
  auto& slot = cache[{p, n}];
  if (!slot) slot = std::make_unique<LetellierLab>(p, 1, n);
  return *slot;
}

// Similarity classes of M_n(F_q) for n = 2, 3.
std::size_t similarity_formula(std::size_t q, int n) { return n == 2 ? q * q + q : q * q * q + q * q + q; }

}  // namespace

TEST(LieAlgebra, KernelIsTheAdditiveGroupWithAdjointAction) {
  const auto s = hdl::testing::split(2, 1, 2, 2);
  const GroupTable& G = *hdl::testing::table(s);
  const LieAlgebraModel g(2, 1, 2);
  for (std::size_t a = 0; a < g.size(); ++a)
    for (std::size_t b = 0; b < g.size(); ++b) {
      const Mat X = g.element(a), Y = g.element(b);
      const Mat prod = s.mul(s.from_kernel_coordinates(X, 1), s.from_kernel_coordinates(Y, 1));
      ASSERT_EQ(s.kernel_coordinates(prod, 1), g.spec().add(X, Y));
    }
  const GroupSpec& s1 = g.spec();
  for (std::size_t x = 0; x < G.size(); x += 5) {
    const Mat h = G.element(x), hr = s.reduce_level(h, 1);
    for (std::size_t a = 0; a < g.size(); ++a) {
      const Mat X = g.element(a);
      ASSERT_EQ(s.kernel_coordinates(s.conj(s.from_kernel_coordinates(X, 1), h), 1), s1.conj(X, hr));
    }
  }
}

TEST(LieAlgebra, OrbitsPartitionAndAreConjugationStable) {
  for (auto [p, n] : {std::pair{2u, 2}, std::pair{3u, 2}, std::pair{2u, 3}}) {
    const LieAlgebraModel& g = lab(p, n).algebra();
    const GroupTable& G = g.residue_group();
    std::vector<int> orbit_of(g.size(), -1);
    std::size_t total = 0;
    for (std::size_t o = 0; o < g.orbits().size(); ++o) {
      total += g.orbits()[o].size();
      for (auto k : g.orbits()[o]) {
        ASSERT_EQ(orbit_of[k], -1);
        orbit_of[k] = static_cast<int>(o);
      }
    }
    EXPECT_EQ(total, g.size());
    std::mt19937 rng(3);
    std::uniform_int_distribution<std::size_t> pick(0, G.size() - 1), pickx(0, g.size() - 1);
    for (int t = 0; t < 500; ++t) {
      const std::size_t k = pickx(rng);
      ASSERT_EQ(orbit_of[g.key(g.spec().conj(g.element(k), G.element(pick(rng))))], orbit_of[k]);
    }
    EXPECT_EQ(g.orbits().size(), similarity_formula(g.q(), n));
    EXPECT_EQ(similarity_class_count_bruteforce(g), similarity_formula(g.q(), n));
  }
}

TEST(LieAlgebra, ClassifyIsACompleteInvariant) {
  for (auto [p, n] : {std::pair{2u, 2}, std::pair{3u, 2}, std::pair{2u, 3}}) {
    const LieAlgebraModel& g = lab(p, n).algebra();
    std::set<std::pair<std::string, std::vector<Field::Elem>>> seen;
    for (const auto& O : g.orbits()) {
      const BetaClass c = g.classify(g.element(O.front()));
      EXPECT_TRUE(seen.insert({c.tag, c.params}).second);
      EXPECT_TRUE(std::binary_search(O.begin(), O.end(), g.key(c.canonical))) << c.to_string(g.spec().field());
      for (std::size_t i = 0; i < O.size(); i += 3) ASSERT_EQ(g.classify(g.element(O[i])), c);
    }
  }
}

TEST(LieAlgebra, ClassifyExamples) {
  const LieAlgebraModel& g = lab(2, 2).algebra();
  const GroupSpec& s = g.spec();
  const auto zero = g.classify(s.zero());
  EXPECT_EQ(zero.tag, "1");
  EXPECT_EQ(zero.params, (std::vector<Field::Elem>{0, 0, 0}));
  Mat c;
  s.set_entry(c, 0, 1, s.ring().one());
  s.set_entry(c, 1, 0, s.ring().one());
  s.set_entry(c, 1, 1, s.ring().one());
  const auto irr = g.classify(c);
  EXPECT_EQ(irr.tag, "2");
  EXPECT_EQ(irr.params, (std::vector<Field::Elem>{1, 1}));
  EXPECT_EQ(irr.torus, (std::vector<int>{2}));
  Mat nil;
  s.set_entry(nil, 0, 1, s.ring().one());
  const auto j = g.classify(nil);
  EXPECT_EQ(j.tag, "1");
  EXPECT_EQ(j.params, (std::vector<Field::Elem>{0, 0, 1}));
}

TEST(LieAlgebra, ClassifyRejectsLargeRank) {
  const LieAlgebraModel g(2, 1, 4);
  EXPECT_THROW(g.classify(g.spec().zero()), domain_error);
}

TEST(LieAlgebra, InvariantCharacterOfZeroOrbitIsTrivial) {
  const LieAlgebraModel& g = lab(3, 2).algebra();
  std::size_t zero_orbit = g.orbits().size();
  for (std::size_t o = 0; o < g.orbits().size(); ++o)
    if (g.orbits()[o] == std::vector<std::size_t>{g.key(g.spec().zero())}) zero_orbit = o;
  ASSERT_LT(zero_orbit, g.orbits().size());
  for (std::size_t k = 0; k < g.size(); ++k) ASSERT_EQ(g.invariant_character_value(zero_orbit, g.element(k)).as_integer(), 1);
  // Σ_X χ^O(X) = |g|·[O = {0}]
  for (std::size_t o = 0; o < g.orbits().size(); ++o) {
    CycloValue sum(g.spec().p());
    for (std::size_t k = 0; k < g.size(); ++k) sum += g.invariant_character_value(o, g.element(k));
    EXPECT_EQ(sum.as_integer(), o == zero_orbit ? static_cast<std::int64_t>(g.size()) : 0);
  }
}

TEST(Letellier, EveryOrbitHasANonzeroPrescribedWitness) {
  for (auto [p, n] : {std::pair{2u, 2}, std::pair{3u, 2}, std::pair{2u, 3}}) {
    const auto rep = lab(p, n).verify();
    EXPECT_EQ(rep.orbit_count, similarity_formula(rep.q, n));
    EXPECT_EQ(rep.type_count, rep.orbit_count);
    EXPECT_TRUE(rep.all_prescribed_nonzero());
    for (const auto& r : rep.rows) {
      EXPECT_TRUE(r.brackets_consistent()) << r.orbit;
      EXPECT_TRUE(r.pairings.letellier.agree);
      EXPECT_TRUE(r.pairings.bracket.agree);
      if (r.witness_genericity) {
        EXPECT_TRUE(r.witness_genericity->generic()) << r.orbit;
      }
    }
  }
}

TEST(Letellier, FrozenValuesForGL2OverF2) {
  const auto rep = lab(2, 2).verify();
  const std::vector<Rational> pairing{{8, 1}, {16, 1}, {8, 1}, {8, 1}, {16, 3}, {8, 1}};
  const std::vector<std::int64_t> bracket{3, 6, 3, 3, 2, 3};
  ASSERT_EQ(rep.rows.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(rep.rows[i].pairings.letellier.exact, pairing[i]) << i;
    EXPECT_TRUE(rep.rows[i].pairings.bracket.exact.is_integer(bracket[i])) << i;
    EXPECT_EQ(rep.rows[i].subgroup, rep.rows[i].type.tag == "2" ? "TU" : "B");
  }
}

// Recomputes the pairing in floating point with an independently induced R.
TEST(Letellier, PairingAgainstNumericOracle) {
  const LetellierLab& L = lab(2, 2);
  const LieAlgebraModel& g = L.algebra();
  for (const auto& r : L.verify().rows) {
    const TorusSetting& s = L.setting(r.type.torus);
    const auto th = s.torus().character(r.theta_index);
    const ClassFunction R = r.subgroup == "B" ? induce_by_full_sum(s.group(), s.classes(), s.borel(), s.borel_lift(th))
                                              : induce_by_full_sum(s.group(), s.classes(), s.tu(), s.trivial_lift(th));
    const KernelMap km(g, s);
    std::complex<double> acc = 0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Mat X = g.element(k);
      std::complex<double> psi = 0;
      for (auto b : g.orbits()[r.orbit]) psi += hdl::testing::root(g.spec().p(), g.psi_exponent(g.element(b), X));
      acc += psi * R.at(s.classes(), km.index(X, true)).numeric();
    }
    acc /= static_cast<double>(g.residue_group().size());
    EXPECT_NEAR(acc.real(), r.pairings.letellier.exact.value(), 1e-9) << r.orbit;
    EXPECT_NEAR(acc.imag(), 0.0, 1e-9);
  }
}

// Over one torus, the pairing is nonzero exactly for θ whose β lands in the orbit.
TEST(Letellier, ScanSupportIsTheFiberOverTheOrbit) {
  for (auto [p, n] : {std::pair{2u, 2}, std::pair{3u, 2}, std::pair{2u, 3}}) {
    const LetellierLab& L = lab(p, n);
    const LieAlgebraModel& g = L.algebra();
    for (std::size_t o = 0; o < g.orbits().size(); ++o) {
      const BetaClass t = g.classify(g.element(g.orbits()[o].front()));
      if (t.torus == std::vector<int>(static_cast<std::size_t>(n), 1)) continue;
      const TorusSetting& s = L.setting(t.torus);
      const KernelMap km(g, s);
      const auto& O = g.orbits()[o];
      std::size_t support = 0;
      for (const auto& [i, pr] : L.scan_torus(o, t.torus)) {
        const Mat b = km.to_split(s.characters().extract_beta(s.torus().character(i)));
        const bool in = std::binary_search(O.begin(), O.end(), g.key(b));
        ASSERT_EQ(!pr.letellier.exact.is_zero(), in) << p << n << " orbit " << o << " θ " << i;
        support += in;
      }
      EXPECT_GT(support, 0u);
    }
  }
}
