#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <unistd.h>

#include "hdl/cache.hpp"
#include "support.hpp"

using namespace hdl;
using hdl::testing::coxeter;
using hdl::testing::split;
using hdl::testing::table;

namespace {

// |G^{F'}| by scanning every matrix over F_{q^d}[π]/π^r: fixedness is
// A_{w(i)w(j)} = F(A_ij) entrywise, invertibility is a unit determinant.
std::size_t brute_force_order(const GroupSpec& s) {
  const Field& f = s.field();
  const int n = s.n(), r = s.r();
  const std::size_t len = static_cast<std::size_t>(n * n * r);
  std::vector<Field::Elem> digits(len, 0);
  std::size_t count = 0;
  while (true) {
    Mat A;
    for (std::size_t t = 0; t < len; ++t) A.a[t] = digits[t];
    bool fixed = true;
    for (int i = 0; i < n && fixed; ++i)
      for (int j = 0; j < n && fixed; ++j)
        for (int k = 0; k < r && fixed; ++k)
          fixed = s.coef(A, s.w()[static_cast<std::size_t>(i)], s.w()[static_cast<std::size_t>(j)], k) == f.frobenius(s.coef(A, i, j, k), 1);
    if (fixed && hdl::testing::residue_det(s, A) != 0) ++count;
    std::size_t t = 0;
    while (t < len && ++digits[t] == f.size()) digits[t++] = 0;
    if (t == len) break;
  }
  return count;
}

std::vector<Mat> members(const GroupTable& G, SubgroupTag tag) {
  std::vector<Mat> out;
  for (auto i : G.subgroup(tag)) out.push_back(G.element(static_cast<std::size_t>(i)));
  return out;
}

bool is_monomial(const GroupSpec& s, const Mat& A) {
  for (int i = 0; i < s.n(); ++i) {
    int nonzero = 0;
    for (int j = 0; j < s.n(); ++j) nonzero += !s.ring().is_zero(s.entry(A, i, j));
    if (nonzero != 1) return false;
  }
  return s.residue_invertible(A);
}

const SubgroupTag kRadical{SubgroupTag::Kind::arithmetic_radical, 0};
const SubgroupTag kTU{SubgroupTag::Kind::torus_times_radical, 0};
const SubgroupTag kTorus{SubgroupTag::Kind::torus, 0};

}  // namespace

TEST(Permutations, Basics) {
  const Perm w = perm_from_cycle_type({2, 1});
  EXPECT_EQ(w, (Perm{1, 0, 2}));
  EXPECT_EQ(perm_order(perm_from_cycle_type({3, 2})), 6);
  EXPECT_EQ(perm_compose(w, perm_inverse(w)), (Perm{0, 1, 2}));
  EXPECT_FALSE(is_permutation({0, 0}));
  EXPECT_EQ(perm_cycles(perm_from_cycle_type({1, 2})).size(), 2u);
}

TEST(GroupSpec, OrdersAgainstBruteForce) {
  for (const auto& s : {coxeter(2, 1, 2, 2), split(2, 1, 2, 2), coxeter(3, 1, 2, 1), split(2, 1, 2, 3), split(2, 1, 3, 1),
                        GroupSpec(2, 1, 3, 1, {1, 0, 2}), coxeter(2, 1, 1, 3), split(5, 1, 1, 2)}) {
    const GroupTable G(s);
    EXPECT_EQ(G.size(), brute_force_order(s)) << s.cache_key();
    EXPECT_EQ(G.size(), s.closed_form_order()) << s.cache_key();
  }
  EXPECT_EQ(table(coxeter(2, 1, 2, 2))->size(), 96u);
}

TEST(GroupSpec, LargerOrdersMatchClosedForm) {
  EXPECT_EQ(table(coxeter(2, 1, 3, 2))->size(), 86016u);
  EXPECT_EQ(coxeter(2, 1, 3, 2).closed_form_order(), 168u * 512u);
  for (const auto& s : {coxeter(3, 1, 2, 2), coxeter(2, 2, 2, 2), coxeter(2, 1, 2, 4), hdl::testing::typed(2, 1, 3, 2, {2, 1})})
    EXPECT_EQ(table(s)->size(), s.closed_form_order()) << s.cache_key();
  for (std::uint32_t p : {2u, 3u, 5u})
    for (int r = 1; r <= 3; ++r) {
      const GroupSpec s = split(p, 1, 1, r);
      std::uint64_t expect = p - 1;
      for (int i = 1; i < r; ++i) expect *= p;
      EXPECT_EQ(GroupTable(s).size(), expect);
    }
}

TEST(GroupSpec, KeysRoundTrip) {
  const auto G = table(coxeter(2, 1, 2, 2));
  for (std::size_t i = 0; i < G->size(); ++i) {
    const Mat A = G->element(i);
    EXPECT_TRUE(G->spec().is_fixed(A));
    EXPECT_EQ(G->spec().from_key(G->spec().key(A)), A);
    EXPECT_EQ(G->index_of(A), static_cast<std::int32_t>(i));
  }
}

TEST(GroupSpec, MembershipExamples) {
  const GroupSpec s = split(2, 1, 2, 2);
  const TruncRing& R = s.ring();
  const Mat one = s.identity();
  for (auto tag : {SubgroupTag{SubgroupTag::Kind::full, 0}, SubgroupTag::kernel(1), kRadical, kTU, kTorus,
                   SubgroupTag{SubgroupTag::Kind::borel, 0}, SubgroupTag{SubgroupTag::Kind::unipotent_upper, 0},
                   SubgroupTag{SubgroupTag::Kind::unipotent_lower, 0}})
    EXPECT_TRUE(s.member(one, tag));
  const Mat x = s.add(one, s.elementary(0, 1, R.pi_power(1)));
  EXPECT_TRUE(s.member(x, SubgroupTag::kernel(1)));
  EXPECT_TRUE(s.member(x, kRadical));
  EXPECT_TRUE(s.member(x, kTU));
  EXPECT_FALSE(s.member(x, kTorus));
  EXPECT_THROW(s.member(one, SubgroupTag::kernel(2)), domain_error);
  EXPECT_THROW(split(2, 1, 2, 3).member(one, kRadical), domain_error);
}

TEST(GroupSpec, RadicalOrdersForTheCoxeterTorusOfGL3) {
  const auto G = table(coxeter(2, 1, 3, 2));
  EXPECT_EQ(G->subgroup(kTorus).size(), 56u);
  EXPECT_EQ(G->subgroup(kRadical).size(), 64u);
  EXPECT_EQ(G->subgroup(kTU).size(), 3584u);
  EXPECT_EQ(G->size() / 3584, 24u);
}

TEST(GroupSpec, MultiplicationAndInverseOnSamples) {
  for (const auto& s : {coxeter(2, 1, 3, 2), coxeter(3, 1, 2, 2), coxeter(2, 1, 2, 4)}) {
    const auto G = table(s);
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::size_t> pick(0, G->size() - 1);
    for (int t = 0; t < 1000; ++t) {
      const Mat g = G->element(pick(rng)), h = G->element(pick(rng));
      const Mat gi = s.inv(g);
      ASSERT_EQ(s.mul(g, gi), s.identity());
      ASSERT_EQ(s.mul(gi, g), s.identity());
      ASSERT_TRUE(s.is_fixed(gi));
      ASSERT_TRUE(s.is_fixed(s.mul(g, h)));
      ASSERT_EQ(s.inv(s.mul(g, h)), s.mul(s.inv(h), gi));
    }
  }
}

TEST(GroupSpec, KernelsAreNormal) {
  const auto G = table(coxeter(2, 1, 2, 4));
  const GroupSpec& s = G->spec();
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, G->size() - 1);
  for (int i = 1; i < 4; ++i) {
    const auto K = members(*G, SubgroupTag::kernel(i));
    std::uniform_int_distribution<std::size_t> pk(0, K.size() - 1);
    for (int t = 0; t < 300; ++t) ASSERT_TRUE(s.member(s.conj(K[pk(rng)], G->element(pick(rng))), SubgroupTag::kernel(i)));
  }
  // exhaustive at (2,2,2)
  const auto H = table(coxeter(2, 1, 2, 2));
  for (const auto& k : members(*H, SubgroupTag::kernel(1)))
    for (std::size_t x = 0; x < H->size(); ++x) ASSERT_TRUE(H->spec().member(H->spec().conj(k, H->element(x)), SubgroupTag::kernel(1)));
}

TEST(GroupSpec, TorusNormalizerNormalizesTheRadical) {
  for (const auto& s : {coxeter(2, 1, 2, 2), split(2, 1, 2, 2)}) {
    const auto G = table(s);
    const auto U = members(*G, kRadical);
    std::size_t normalizer = 0;
    for (std::size_t i = 0; i < G->size(); ++i) {
      const Mat x = G->element(i);
      if (!is_monomial(s, x)) continue;
      ++normalizer;
      for (const auto& u : U) ASSERT_TRUE(s.member(s.conj(u, x), kRadical));
    }
    EXPECT_GT(normalizer, G->subgroup(kTorus).size());
  }
}

TEST(GroupSpec, TorusRadicalDecomposition) {
  const GroupSpec s = split(3, 1, 2, 2);
  const auto G = table(s);
  const auto T = members(*G, kTorus);
  const auto U = members(*G, kRadical);
  std::set<std::pair<std::uint64_t, std::uint64_t>> pairs;
  for (const auto& g : members(*G, kTU)) {
    const auto parts = s.tu_decompose(g);
    ASSERT_EQ(s.mul(parts.torus, parts.radical), g);
    ASSERT_TRUE(s.member(parts.torus, kTorus));
    ASSERT_TRUE(s.member(parts.radical, kRadical));
    pairs.insert({s.key(parts.torus), s.key(parts.radical)});
  }
  EXPECT_EQ(pairs.size(), T.size() * U.size());
  EXPECT_EQ(G->subgroup(kTU).size(), T.size() * U.size());
  for (const auto& t : T) {
    const auto parts = s.tu_decompose(t);
    EXPECT_EQ(parts.torus, t);
    EXPECT_EQ(parts.radical, s.identity());
  }
  const Mat outside = s.add(s.identity(), s.elementary(0, 1, s.ring().one()));
  EXPECT_THROW(s.tu_decompose(outside), domain_error);
}

TEST(GroupSpec, TorusRadicalEqualsTorusTimesKernel) {
  const GroupSpec s = coxeter(2, 1, 2, 2);
  const auto G = table(s);
  std::set<std::int32_t> product;
  for (const auto& t : members(*G, kTorus))
    for (const auto& k : members(*G, SubgroupTag::kernel(1))) product.insert(G->index_of(s.mul(t, k)));
  const auto tu = G->subgroup(kTU);
  EXPECT_EQ(std::set<std::int32_t>(tu.begin(), tu.end()), product);
}

TEST(GroupSpec, HalfLevelKernelIsAbelian) {
  const GroupSpec s = coxeter(2, 1, 2, 2);
  const auto K = members(*table(s), SubgroupTag::kernel(1));
  for (const auto& a : K)
    for (const auto& b : K) ASSERT_EQ(s.commutator(a, b), s.identity());

  std::mt19937_64 rng(5);
  for (const auto& t : {coxeter(2, 1, 2, 4), coxeter(2, 1, 3, 2), coxeter(3, 1, 2, 2)}) {
    const auto Kt = members(*table(t), SubgroupTag::kernel(t.half_level()));
    std::uniform_int_distribution<std::size_t> pick(0, Kt.size() - 1);
    for (int i = 0; i < 500; ++i) ASSERT_EQ(t.commutator(Kt[pick(rng)], Kt[pick(rng)]), t.identity());
  }
}

TEST(GroupSpec, KernelIsTheAdditiveMatrixGroup) {
  for (const auto& s : {coxeter(2, 1, 2, 2), coxeter(2, 1, 2, 4), coxeter(3, 1, 2, 2), split(2, 1, 2, 4)}) {
    const int l = s.half_level();
    const GroupSpec sl = s.at_level(s.r() - l);
    const auto K = members(*table(s), SubgroupTag::kernel(l));
    std::uint64_t expect = 1;
    for (int i = 0; i < s.n() * s.n() * l; ++i) expect *= s.q();
    EXPECT_EQ(K.size(), expect);
    std::set<std::uint64_t> coords;
    for (const auto& a : K) {
      const Mat X = s.kernel_coordinates(a, l);
      EXPECT_TRUE(sl.is_fixed(X));
      coords.insert(sl.key(X));
      EXPECT_EQ(s.from_kernel_coordinates(X, l), a);
    }
    EXPECT_EQ(coords.size(), K.size());
    for (std::size_t i = 0; i < K.size(); i += 3)
      for (std::size_t j = 0; j < K.size(); j += 5)
        ASSERT_EQ(s.kernel_coordinates(s.mul(K[i], K[j]), l), sl.add(s.kernel_coordinates(K[i], l), s.kernel_coordinates(K[j], l)));
  }
}

TEST(Classes, PartitionAndCentre) {
  for (const auto& s : {coxeter(2, 1, 2, 2), split(2, 1, 2, 2), coxeter(3, 1, 2, 2)}) {
    const auto G = table(s);
    const ClassTable C = conjugacy_classes(*G);
    std::int64_t total = 0;
    std::size_t central = 0;
    for (std::size_t c = 0; c < C.count(); ++c) {
      total += C.sizes[c];
      EXPECT_EQ(static_cast<std::int64_t>(G->size()) % C.sizes[c], 0);
      central += C.sizes[c] == 1;
    }
    EXPECT_EQ(total, static_cast<std::int64_t>(G->size()));
    EXPECT_EQ(C.sizes[static_cast<std::size_t>(C.class_of[static_cast<std::size_t>(G->identity_index())])], 1);
    // centre by brute force: scalars with entries in O_r
    std::size_t centre = 0;
    const auto gens = G->generators();
    for (std::size_t i = 0; i < G->size(); ++i) {
      const Mat z = G->element(i);
      bool commutes = true;
      for (std::size_t x = 0; x < G->size() && commutes; ++x) commutes = s.mul(z, G->element(x)) == s.mul(G->element(x), z);
      if (!commutes) continue;
      ++centre;
      EXPECT_TRUE(s.is_diagonal(z));
      for (int a = 1; a < s.n(); ++a) EXPECT_EQ(s.entry(z, a, a), s.entry(z, 0, 0));
    }
    EXPECT_EQ(centre, s.ring().unit_count(1));
    EXPECT_EQ(central, centre);
  }
}

TEST(Classes, GeneratorOrbitsMatchFullConjugation) {
  for (const auto& s : {coxeter(2, 1, 2, 2), split(2, 1, 2, 2), coxeter(3, 1, 2, 1)}) {
    const auto G = table(s);
    const ClassTable C = conjugacy_classes(*G);
    std::vector<Mat> inv(G->size());
    for (std::size_t x = 0; x < G->size(); ++x) inv[x] = s.inv(G->element(x));
    std::vector<std::int32_t> label(G->size(), -1);
    std::int32_t classes = 0;
    for (std::size_t g = 0; g < G->size(); ++g) {
      if (label[g] >= 0) continue;
      for (std::size_t x = 0; x < G->size(); ++x) label[static_cast<std::size_t>(G->index_of(s.conj(G->element(g), G->element(x), inv[x])))] = classes;
      ++classes;
    }
    EXPECT_EQ(label, C.class_of) << s.cache_key();
  }
  EXPECT_EQ(conjugacy_classes(*table(coxeter(2, 1, 2, 2))).count(), 14u);
}

TEST(LangTransport, CarriesTheTwistedGroupOntoTheSplitGroup) {
  for (const auto& s : {coxeter(2, 1, 2, 2), hdl::testing::typed(2, 1, 3, 1, {2, 1}), coxeter(3, 1, 2, 1)}) {
    const GroupSpec sp = s.split_form();
    const SplitIsomorphism iso(s, sp);
    const auto G = table(s);
    const auto H = table(sp);
    std::set<std::int32_t> image;
    for (std::size_t i = 0; i < G->size(); ++i) {
      const Mat g = G->element(i);
      const Mat h = iso.to_split(g);
      const auto k = H->index_of(h);
      ASSERT_GE(k, 0);
      image.insert(k);
      ASSERT_EQ(iso.to_twisted(h), g);
    }
    EXPECT_EQ(image.size(), H->size());
    for (std::size_t i = 0; i < G->size(); i += 7)
      for (std::size_t j = 0; j < G->size(); j += 11)
        ASSERT_EQ(iso.to_split(s.mul(G->element(i), G->element(j))), sp.mul(iso.to_split(G->element(i)), iso.to_split(G->element(j))));
  }
}

TEST(Cache, RoundTripAndCorruption) {
  const auto dir = std::filesystem::temp_directory_path() / ("hdl_cache_test_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  const GroupSpec s = coxeter(2, 1, 2, 2);
  const auto first = load_or_build(s, dir.string());
  EXPECT_FALSE(first.loaded);
  const auto second = load_or_build(s, dir.string());
  EXPECT_TRUE(second.loaded);
  EXPECT_EQ(first.table->raw(), second.table->raw());
  EXPECT_EQ(first.checksum, second.checksum);

  EXPECT_THROW(load_table(cache_path(dir, s), split(2, 1, 2, 2)), verification_error);

  const auto file = cache_path(dir, s);
  {
    std::fstream fs(file, std::ios::in | std::ios::out | std::ios::binary);
    fs.seekp(-3, std::ios::end);
    fs.put('\x07');
  }
  EXPECT_THROW(load_table(file, s), verification_error);
  std::filesystem::remove_all(dir);
}

TEST(GroupSpec, InvalidConfigurations) {
  EXPECT_THROW(GroupSpec(2, 1, 5, 1, {0, 1, 2, 3, 4}), domain_error);
  EXPECT_THROW(GroupSpec(2, 1, 2, 2, {0, 0}), domain_error);
  EXPECT_THROW(GroupSpec(2, 1, 2, 2, {1, 0}, 3), domain_error);
  EXPECT_THROW(GroupTable(coxeter(2, 1, 2, 2), 50), cap_exceeded);
  EXPECT_THROW(GroupTable(split(2, 1, 4, 2)), cap_exceeded);
}
