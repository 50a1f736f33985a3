#pragma once

// GL_n over O_r = F_q[π]/π^r in the twisted model: fixed points of
// F'(g) = P_w F(g) P_w^{-1} on GL_n(F_{q^d}[π]/π^r), with P_w the permutation
// matrix of w and d a multiple of ord(w). The diagonal torus is F'-stable and
// its rational points form the torus of type w.

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hdl/truncring.hpp"

namespace hdl {

inline constexpr int kMaxRank = 4;
inline constexpr int kMaxCoeffs = 64;  // n²·r

using Perm = std::vector<int>;  // 0-based images

inline int perm_order(const Perm& w) {
  int ord = 1;
  std::vector<bool> seen(w.size(), false);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (seen[i]) continue;
    int len = 0;
    for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(w[j])) {
      seen[j] = true;
      ++len;
    }
    ord = std::lcm(ord, len);
  }
  return ord;
}

inline Perm perm_inverse(const Perm& w) {
  Perm inv(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) inv[static_cast<std::size_t>(w[i])] = static_cast<int>(i);
  return inv;
}

inline Perm perm_compose(const Perm& a, const Perm& b) {  // a∘b
  Perm out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[static_cast<std::size_t>(b[i])];
  return out;
}

inline bool is_permutation(const Perm& w) {
  std::vector<bool> seen(w.size(), false);
  for (int x : w) {
    if (x < 0 || x >= static_cast<int>(w.size()) || seen[static_cast<std::size_t>(x)]) return false;
    seen[static_cast<std::size_t>(x)] = true;
  }
  return true;
}

// Cycles listed from their smallest point, each traversed along w.
inline std::vector<std::vector<int>> perm_cycles(const Perm& w) {
  std::vector<std::vector<int>> out;
  std::vector<bool> seen(w.size(), false);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (seen[i]) continue;
    std::vector<int> cyc;
    for (int j = static_cast<int>(i); !seen[static_cast<std::size_t>(j)]; j = w[static_cast<std::size_t>(j)]) {
      seen[static_cast<std::size_t>(j)] = true;
      cyc.push_back(j);
    }
    out.push_back(std::move(cyc));
  }
  return out;
}

// Canonical Weyl element of a cycle type: consecutive blocks, i ↦ i+1.
inline Perm perm_from_cycle_type(const std::vector<int>& cycle_type) {
  Perm w;
  int start = 0;
  for (int len : cycle_type) {
    if (len < 1) throw domain_error("cycle lengths must be positive");
    for (int i = 0; i < len; ++i) w.push_back(start + (i + 1) % len);
    start += len;
  }
  return w;
}

struct Mat {
  std::array<Field::Elem, kMaxCoeffs> a{};
  friend bool operator==(const Mat&, const Mat&) = default;
};

struct SubgroupTag {
  enum class Kind {
    full,
    kernel,
    borel,
    unipotent_upper,
    unipotent_lower,
    arithmetic_radical,
    torus,
    torus_times_radical
  };
  Kind kind = Kind::full;
  int level = 0;  // kernel(i) only

  static SubgroupTag kernel(int i) { return {Kind::kernel, i}; }
};

class GroupSpec {
 public:
  struct EntryOrbit {
    int i, j;    // smallest position
    int length;  // positions (w^t(i), w^t(j)) for t < length
  };

  // field_degree = 0 selects d = ord(w).
  GroupSpec(std::uint32_t p, unsigned m, int n, int r, Perm w, unsigned field_degree = 0)
      : n_(n), r_(r), w_(std::move(w)) {
    if (n < 1 || n > kMaxRank) throw domain_error("rank n must lie in [1, 4]");
    if (static_cast<int>(w_.size()) != n || !is_permutation(w_)) throw domain_error("w is not a permutation of {1..n}");
    if (n * n * r > kMaxCoeffs) throw cap_exceeded("n²·r exceeds the matrix capacity");
    const int ord = perm_order(w_);
    if (field_degree == 0) field_degree = static_cast<unsigned>(ord);
    if (field_degree % static_cast<unsigned>(ord) != 0)
      throw domain_error("field degree must be a multiple of ord(w)");
    ring_.emplace(Field::build(p, m, field_degree), r);
    w_inv_ = perm_inverse(w_);

    std::vector<bool> seen(static_cast<std::size_t>(n * n), false);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (seen[static_cast<std::size_t>(i * n + j)]) continue;
        int len = 0, a = i, b = j;
        while (!seen[static_cast<std::size_t>(a * n + b)]) {
          seen[static_cast<std::size_t>(a * n + b)] = true;
          ++len;
          a = w_[static_cast<std::size_t>(a)];
          b = w_[static_cast<std::size_t>(b)];
        }
        orbits_.push_back({i, j, len});
      }

    const Field& f = field();
    sub_index_.assign(field_degree + 1, {});
    sub_elems_.assign(field_degree + 1, {});
    for (const auto& o : orbits_) {
      const auto L = static_cast<std::size_t>(o.length);
      if (!sub_elems_[L].empty()) continue;
      sub_elems_[L] = f.subfield_elements(static_cast<unsigned>(o.length) * f.m());
      sub_index_[L].assign(f.size(), -1);
      for (std::size_t t = 0; t < sub_elems_[L].size(); ++t)
        sub_index_[L][sub_elems_[L][t]] = static_cast<std::int32_t>(t);
    }
    // key space = q^{n² r}
    long double ks = 1;
    for (int t = 0; t < n * n * r; ++t) ks *= f.q();
    if (ks > 1e18L) throw cap_exceeded("key space too large");
    key_space_ = static_cast<std::uint64_t>(ks);
  }

  int n() const { return n_; }
  int r() const { return r_; }
  const Perm& w() const { return w_; }
  const Perm& w_inverse() const { return w_inv_; }
  const TruncRing& ring() const { return *ring_; }
  const Field& field() const { return ring_->field(); }
  const FieldPtr& field_ptr() const { return ring_->field_ptr(); }
  std::uint32_t p() const { return field().p(); }
  unsigned m() const { return field().m(); }
  std::uint32_t q() const { return field().q(); }
  const std::vector<EntryOrbit>& orbits() const { return orbits_; }
  std::uint64_t key_space() const { return key_space_; }
  bool even_level() const { return r_ % 2 == 0; }
  int half_level() const {
    if (!even_level()) throw domain_error("the arithmetic radical needs an even level r = 2l");
    return r_ / 2;
  }

  GroupSpec at_level(int i) const {
    if (i < 1 || i > r_) throw domain_error("at_level: level out of range");
    return GroupSpec(p(), m(), n_, i, w_, field().d());
  }
  GroupSpec split_form() const {
    Perm id(static_cast<std::size_t>(n_));
    std::iota(id.begin(), id.end(), 0);
    return GroupSpec(p(), m(), n_, r_, id);
  }

  // ∏ (q^n − q^i) · q^{(r−1)n²}
  std::uint64_t closed_form_order() const {
    const std::uint64_t qq = q();
    std::uint64_t out = 1;
    const std::uint64_t qn = detail::ipow(qq, static_cast<unsigned>(n_));
    for (int i = 0; i < n_; ++i) out *= qn - detail::ipow(qq, static_cast<unsigned>(i));
    return out * detail::ipow(qq, static_cast<unsigned>((r_ - 1) * n_ * n_));
  }

  // --- entry access -------------------------------------------------------

  std::size_t offset(int i, int j) const { return static_cast<std::size_t>((i * n_ + j) * r_); }
  RingElem entry(const Mat& A, int i, int j) const {
    RingElem x;
    const std::size_t o = offset(i, j);
    for (int k = 0; k < r_; ++k) x.c[k] = A.a[o + k];
    return x;
  }
  void set_entry(Mat& A, int i, int j, const RingElem& x) const {
    const std::size_t o = offset(i, j);
    for (int k = 0; k < r_; ++k) A.a[o + k] = x.c[k];
  }
  Field::Elem coef(const Mat& A, int i, int j, int k) const { return A.a[offset(i, j) + k]; }

  Mat zero() const { return {}; }
  Mat identity() const {
    Mat I;
    for (int i = 0; i < n_; ++i) I.a[offset(i, i)] = 1;
    return I;
  }
  Mat scalar(const RingElem& z) const {
    Mat A;
    for (int i = 0; i < n_; ++i) set_entry(A, i, i, z);
    return A;
  }
  Mat diagonal(const std::vector<RingElem>& d) const {
    Mat A;
    for (int i = 0; i < n_; ++i) set_entry(A, i, i, d[static_cast<std::size_t>(i)]);
    return A;
  }
  Mat permutation_matrix(const Perm& v) const {  // e_j ↦ e_{v(j)}
    Mat P;
    for (int j = 0; j < n_; ++j) P.a[offset(v[static_cast<std::size_t>(j)], j)] = 1;
    return P;
  }
  // E_{ij}·x
  Mat elementary(int i, int j, const RingElem& x) const {
    Mat A;
    set_entry(A, i, j, x);
    return A;
  }

  // --- arithmetic ---------------------------------------------------------

  Mat add(const Mat& A, const Mat& B) const {
    Mat C;
    const Field& f = field();
    for (int t = 0; t < n_ * n_ * r_; ++t) C.a[t] = f.add(A.a[t], B.a[t]);
    return C;
  }
  Mat sub(const Mat& A, const Mat& B) const {
    Mat C;
    const Field& f = field();
    for (int t = 0; t < n_ * n_ * r_; ++t) C.a[t] = f.sub(A.a[t], B.a[t]);
    return C;
  }
  Mat neg(const Mat& A) const {
    Mat C;
    const Field& f = field();
    for (int t = 0; t < n_ * n_ * r_; ++t) C.a[t] = f.neg(A.a[t]);
    return C;
  }
  Mat mul(const Mat& A, const Mat& B) const {
    Mat C;
    const Field& f = field();
    for (int i = 0; i < n_; ++i)
      for (int l = 0; l < n_; ++l) {
        const std::size_t oa = offset(i, l);
        for (int ka = 0; ka < r_; ++ka) {
          const Field::Elem x = A.a[oa + ka];
          if (!x) continue;
          for (int j = 0; j < n_; ++j) {
            const std::size_t ob = offset(l, j), oc = offset(i, j);
            for (int kb = 0; ka + kb < r_; ++kb) {
              const Field::Elem y = B.a[ob + kb];
              if (y) C.a[oc + ka + kb] = f.add(C.a[oc + ka + kb], f.mul(x, y));
            }
          }
        }
      }
    return C;
  }
  Mat scale(const RingElem& z, const Mat& A) const {
    Mat C;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) set_entry(C, i, j, ring().mul(z, entry(A, i, j)));
    return C;
  }

  bool residue_invertible(const Mat& A) const {
    const Field& f = field();
    std::array<Field::Elem, kMaxRank * kMaxRank> m{};
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m[static_cast<std::size_t>(i * n_ + j)] = coef(A, i, j, 0);
    for (int c = 0; c < n_; ++c) {
      int piv = -1;
      for (int i = c; i < n_; ++i)
        if (m[static_cast<std::size_t>(i * n_ + c)]) {
          piv = i;
          break;
        }
      if (piv < 0) return false;
      if (piv != c)
        for (int j = 0; j < n_; ++j) std::swap(m[static_cast<std::size_t>(c * n_ + j)], m[static_cast<std::size_t>(piv * n_ + j)]);
      const Field::Elem inv = f.inv(m[static_cast<std::size_t>(c * n_ + c)]);
      for (int i = c + 1; i < n_; ++i) {
        const Field::Elem factor = f.mul(m[static_cast<std::size_t>(i * n_ + c)], inv);
        if (!factor) continue;
        for (int j = c; j < n_; ++j)
          m[static_cast<std::size_t>(i * n_ + j)] =
              f.sub(m[static_cast<std::size_t>(i * n_ + j)], f.mul(factor, m[static_cast<std::size_t>(c * n_ + j)]));
      }
    }
    return true;
  }

  // Gauss–Jordan with unit pivots; a unit exists in every column of an
  // invertible matrix over the local ring.
  Mat inv(const Mat& A) const {
    const TruncRing& R = ring();
    std::array<RingElem, kMaxRank * kMaxRank> a{}, b{};
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        a[static_cast<std::size_t>(i * n_ + j)] = entry(A, i, j);
        b[static_cast<std::size_t>(i * n_ + j)] = i == j ? R.one() : R.zero();
      }
    auto at = [&](auto& m, int i, int j) -> RingElem& { return m[static_cast<std::size_t>(i * n_ + j)]; };
    for (int c = 0; c < n_; ++c) {
      int piv = -1;
      for (int i = c; i < n_; ++i)
        if (R.is_unit(at(a, i, c))) {
          piv = i;
          break;
        }
      if (piv < 0) throw domain_error("matrix is not invertible over the local ring");
      for (int j = 0; j < n_; ++j) {
        std::swap(at(a, c, j), at(a, piv, j));
        std::swap(at(b, c, j), at(b, piv, j));
      }
      const RingElem u = R.inv(at(a, c, c));
      for (int j = 0; j < n_; ++j) {
        at(a, c, j) = R.mul(u, at(a, c, j));
        at(b, c, j) = R.mul(u, at(b, c, j));
      }
      for (int i = 0; i < n_; ++i) {
        if (i == c) continue;
        const RingElem factor = at(a, i, c);
        if (R.is_zero(factor)) continue;
        for (int j = 0; j < n_; ++j) {
          at(a, i, j) = R.sub(at(a, i, j), R.mul(factor, at(a, c, j)));
          at(b, i, j) = R.sub(at(b, i, j), R.mul(factor, at(b, c, j)));
        }
      }
    }
    Mat out;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) set_entry(out, i, j, at(b, i, j));
    return out;
  }

  // x g x^{-1}
  Mat conj(const Mat& g, const Mat& x) const { return mul(mul(x, g), inv(x)); }
  Mat conj(const Mat& g, const Mat& x, const Mat& x_inv) const { return mul(mul(x, g), x_inv); }
  Mat commutator(const Mat& a, const Mat& b) const { return mul(mul(a, b), inv(mul(b, a))); }

  // coefficientwise F^k
  Mat frobenius(const Mat& A, std::int64_t k = 1) const {
    Mat C;
    const Field& f = field();
    for (int t = 0; t < n_ * n_ * r_; ++t) C.a[t] = f.frobenius(A.a[t], k);
    return C;
  }
  // F'(A) = P_w F(A) P_w^{-1}: entry (w(i), w(j)) receives F(A_ij).
  Mat twisted_frobenius(const Mat& A) const {
    Mat C;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        set_entry(C, w_[static_cast<std::size_t>(i)], w_[static_cast<std::size_t>(j)], ring().frobenius(entry(A, i, j)));
    return C;
  }
  bool is_fixed(const Mat& A) const { return twisted_frobenius(A) == A; }

  // --- dense keys of F'-fixed matrices -------------------------------------
  //
  // Digits: for each orbit (in orbit order) and each π-power, the index of
  // the representative's coefficient within the subfield F_{q^length}. The
  // first digit is least significant, so key order = enumeration order.

  std::uint64_t key(const Mat& A) const {
    std::uint64_t k = 0, place = 1;
    for (const auto& o : orbits_) {
      const auto L = static_cast<std::size_t>(o.length);
      const std::uint64_t base = sub_elems_[L].size();
      const std::size_t off = offset(o.i, o.j);
      for (int t = 0; t < r_; ++t) {
        const std::int32_t idx = sub_index_[L][A.a[off + t]];
        if (idx < 0) throw domain_error("key: matrix is not F'-fixed");
        k += place * static_cast<std::uint64_t>(idx);
        place *= base;
      }
    }
    return k;
  }

  Mat from_key(std::uint64_t k) const {
    Mat A;
    for (const auto& o : orbits_) {
      const auto L = static_cast<std::size_t>(o.length);
      const std::uint64_t base = sub_elems_[L].size();
      RingElem x;
      for (int t = 0; t < r_; ++t) {
        x.c[t] = sub_elems_[L][k % base];
        k /= base;
      }
      int a = o.i, b = o.j;
      for (int s = 0; s < o.length; ++s) {
        set_entry(A, a, b, x);
        x = ring().frobenius(x);
        a = w_[static_cast<std::size_t>(a)];
        b = w_[static_cast<std::size_t>(b)];
      }
    }
    return A;
  }

  // --- filtration and subgroups --------------------------------------------

  Mat reduce_level(const Mat& A, int i) const {
    if (i < 1 || i > r_) throw domain_error("reduce_level: level out of range");
    Mat out;
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b)
        for (int k = 0; k < i; ++k) out.a[static_cast<std::size_t>((a * n_ + b) * i + k)] = coef(A, a, b, k);
    return out;
  }

  // A = 1 + π^l X ↦ X mod π^{r−l}, laid out at level r−l.
  Mat kernel_coordinates(const Mat& A, int l) const {
    if (l < 1 || l >= r_) throw domain_error("kernel_coordinates: level out of range");
    const int out_r = r_ - l;
    const Mat D = sub(A, identity());
    Mat X;
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b) {
        for (int k = 0; k < l; ++k)
          if (coef(D, a, b, k)) throw domain_error("kernel_coordinates: element outside the kernel");
        for (int k = 0; k < out_r; ++k) X.a[static_cast<std::size_t>((a * n_ + b) * out_r + k)] = coef(D, a, b, l + k);
      }
    return X;
  }
  // Inverse of kernel_coordinates: X laid out at level r−l.
  Mat from_kernel_coordinates(const Mat& X, int l) const {
    const int in_r = r_ - l;
    Mat A = identity();
    const Field& f = field();
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b)
        for (int k = 0; k < in_r; ++k) {
          const std::size_t o = offset(a, b) + static_cast<std::size_t>(l + k);
          A.a[o] = f.add(A.a[o], X.a[static_cast<std::size_t>((a * n_ + b) * in_r + k)]);
        }
    return A;
  }

  bool is_diagonal(const Mat& A) const {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        if (i != j && !ring().is_zero(entry(A, i, j))) return false;
    return true;
  }

  bool member(const Mat& A, SubgroupTag tag) const {
    using K = SubgroupTag::Kind;
    const TruncRing& R = ring();
    switch (tag.kind) {
      case K::full:
        return residue_invertible(A);
      case K::kernel: {
        if (tag.level < 0 || tag.level > r_ - 1) throw domain_error("kernel level must lie in [0, r−1]");
        if (tag.level == 0) return residue_invertible(A);
        const Mat D = sub(A, identity());
        for (int i = 0; i < n_; ++i)
          for (int j = 0; j < n_; ++j)
            if (R.valuation(entry(D, i, j)) < tag.level) return false;
        return true;
      }
      case K::borel:
      case K::unipotent_upper:
      case K::unipotent_lower:
        for (int i = 0; i < n_; ++i)
          for (int j = 0; j < n_; ++j) {
            const RingElem x = entry(A, i, j);
            if (i == j) {
              if (tag.kind == K::borel ? !R.is_unit(x) : x != R.one()) return false;
            } else {
              const bool must_vanish = tag.kind == K::unipotent_lower ? (j > i) : (j < i);
              if (must_vanish && !R.is_zero(x)) return false;
            }
          }
        return true;
      case K::torus:
        return is_diagonal(A) && residue_invertible(A);
      case K::arithmetic_radical:
      case K::torus_times_radical: {
        const int l = half_level();
        for (int i = 0; i < n_; ++i)
          for (int j = 0; j < n_; ++j) {
            const RingElem x = entry(A, i, j);
            if (i == j) {
              if (tag.kind == K::arithmetic_radical ? x != R.one() : !R.is_unit(x)) return false;
            } else if (R.valuation(x) < l) {
              return false;
            }
          }
        return true;
      }
    }
    return false;
  }

  struct TorusRadicalParts {
    Mat torus;    // diag(g)
    Mat radical;  // diag(g)^{-1} g ∈ U^±
  };
  TorusRadicalParts tu_decompose(const Mat& g) const {
    if (!member(g, {SubgroupTag::Kind::torus_times_radical, 0}))
      throw domain_error("tu_decompose: element outside T·U^±");
    Mat t, t_inv;
    for (int i = 0; i < n_; ++i) {
      set_entry(t, i, i, entry(g, i, i));
      set_entry(t_inv, i, i, ring().inv(entry(g, i, i)));
    }
    return {t, mul(t_inv, g)};
  }

  std::string to_string(const Mat& A) const {
    std::string out = "[";
    for (int i = 0; i < n_; ++i) {
      if (i) out += "; ";
      for (int j = 0; j < n_; ++j) {
        if (j) out += ", ";
        out += ring().to_string(entry(A, i, j));
      }
    }
    return out + "]";
  }

  // Cache-file identity of this group model: (p, m, n, r, w, modulus).
  std::string cache_key() const {
    std::string s = "p" + std::to_string(p()) + "_m" + std::to_string(m()) + "_n" + std::to_string(n_) + "_r" +
                    std::to_string(r_) + "_d" + std::to_string(field().d()) + "_w";
    for (int x : w_) s += std::to_string(x + 1);
    s += "_f";
    for (auto c : field().modulus()) s += std::to_string(c);
    return s;
  }

 private:
  int n_, r_;
  Perm w_, w_inv_;
  std::optional<TruncRing> ring_;
  std::vector<EntryOrbit> orbits_;
  std::vector<std::vector<std::int32_t>> sub_index_;
  std::vector<std::vector<Field::Elem>> sub_elems_;
  std::uint64_t key_space_ = 0;
};

// Complete element table of G^{F'} with a dense key → index map.
class GroupTable {
 public:
  static constexpr std::uint64_t kDefaultCap = std::uint64_t{1} << 20;
  static constexpr std::uint64_t kKeySpaceCap = std::uint64_t{1} << 24;

  explicit GroupTable(GroupSpec spec, std::uint64_t cap = kDefaultCap) : spec_(std::move(spec)) {
    check_caps(cap);
    const std::size_t stride = this->stride();
    index_.assign(spec_.key_space(), -1);
    for (std::uint64_t k = 0; k < spec_.key_space(); ++k) {
      const Mat A = spec_.from_key(k);
      if (!spec_.residue_invertible(A)) continue;
      index_[k] = static_cast<std::int32_t>(size_);
      data_.insert(data_.end(), A.a.begin(), A.a.begin() + static_cast<std::ptrdiff_t>(stride));
      ++size_;
    }
    identity_ = index_of(spec_.identity());
  }

  // Builds from an externally supplied coefficient array (cache loads).
  GroupTable(GroupSpec spec, std::vector<Field::Elem> data, std::uint64_t cap) : spec_(std::move(spec)) {
    check_caps(cap);
    const std::size_t stride = this->stride();
    if (data.size() % stride != 0) throw domain_error("element data has the wrong length");
    data_ = std::move(data);
    size_ = data_.size() / stride;
    index_.assign(spec_.key_space(), -1);
    for (std::size_t i = 0; i < size_; ++i) {
      const Mat A = element(i);
      if (!spec_.is_fixed(A) || !spec_.residue_invertible(A)) throw verification_error("cached element is invalid");
      const auto k = spec_.key(A);
      if (index_[k] >= 0) throw verification_error("cached table has duplicates");
      index_[k] = static_cast<std::int32_t>(i);
    }
    identity_ = index_of(spec_.identity());
  }

  const GroupSpec& spec() const { return spec_; }
  std::size_t size() const { return size_; }
  std::size_t stride() const { return static_cast<std::size_t>(spec_.n() * spec_.n() * spec_.r()); }
  const std::vector<Field::Elem>& raw() const { return data_; }

  Mat element(std::size_t i) const {
    Mat A;
    const std::size_t s = stride();
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(i * s), s, A.a.begin());
    return A;
  }
  // −1 when A is not an element.
  std::int32_t index_of(const Mat& A) const {
    for (std::size_t t = stride(); t < static_cast<std::size_t>(kMaxCoeffs); ++t)
      if (A.a[t]) return -1;
    if (!spec_.is_fixed(A)) return -1;
    return index_[spec_.key(A)];
  }
  // Faster path for products of elements (known F'-fixed).
  std::int32_t index_of_fixed(const Mat& A) const { return index_[spec_.key(A)]; }
  std::int32_t identity_index() const { return identity_; }

  std::int32_t mul(std::size_t i, std::size_t j) const { return index_of_fixed(spec_.mul(element(i), element(j))); }
  std::int32_t inv(std::size_t i) const { return index_of_fixed(spec_.inv(element(i))); }

  template <class Pred>
  std::vector<std::int32_t> select(Pred pred) const {
    std::vector<std::int32_t> out;
    for (std::size_t i = 0; i < size_; ++i)
      if (pred(element(i))) out.push_back(static_cast<std::int32_t>(i));
    return out;
  }
  std::vector<std::int32_t> subgroup(SubgroupTag tag) const {
    return select([&](const Mat& A) { return spec_.member(A, tag); });
  }

  // Deterministic generating set: seeded random elements added until the
  // generated subgroup is everything.
  const std::vector<std::int32_t>& generators() const {
    if (!generators_.empty() || size_ == 1) return generators_;
    std::mt19937_64 rng(0x5eed0f00dULL);
    std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
    std::vector<std::int32_t> gens;
    while (true) {
      gens.push_back(static_cast<std::int32_t>(pick(rng)));
      if (gens.size() < 2) continue;
      if (closure_size(gens) == size_) break;
    }
    generators_ = gens;
    return generators_;
  }

  std::size_t closure_size(const std::vector<std::int32_t>& gens) const {
    std::vector<char> seen(size_, 0);
    std::vector<std::int32_t> queue{identity_};
    seen[static_cast<std::size_t>(identity_)] = 1;
    std::vector<Mat> g;
    for (auto x : gens) g.push_back(element(static_cast<std::size_t>(x)));
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const Mat cur = element(static_cast<std::size_t>(queue[head]));
      for (const auto& s : g) {
        const auto k = index_of_fixed(spec_.mul(cur, s));
        if (!seen[static_cast<std::size_t>(k)]) {
          seen[static_cast<std::size_t>(k)] = 1;
          queue.push_back(k);
        }
      }
    }
    return queue.size();
  }

 private:
  void check_caps(std::uint64_t cap) const {
    if (spec_.closed_form_order() > cap)
      throw cap_exceeded("|G| = " + std::to_string(spec_.closed_form_order()) + " exceeds the cap " + std::to_string(cap));
    if (spec_.key_space() > kKeySpaceCap) throw cap_exceeded("matrix key space exceeds 2^24");
  }

  GroupSpec spec_;
  std::vector<Field::Elem> data_;
  std::vector<std::int32_t> index_;
  std::size_t size_ = 0;
  std::int32_t identity_ = -1;
  mutable std::vector<std::int32_t> generators_;
};

struct ClassTable {
  std::vector<std::int32_t> class_of;  // per element
  std::vector<std::int32_t> reps;      // smallest element index of each class
  std::vector<std::int64_t> sizes;
  std::size_t count() const { return reps.size(); }
};

// Orbits of conjugation by a generating set; classes numbered by their
// smallest element.
inline ClassTable conjugacy_classes(const GroupTable& G) {
  const GroupSpec& S = G.spec();
  ClassTable ct;
  ct.class_of.assign(G.size(), -1);
  std::vector<Mat> gens, gens_inv;
  for (auto x : G.generators()) {
    gens.push_back(G.element(static_cast<std::size_t>(x)));
    gens_inv.push_back(S.inv(gens.back()));
  }
  std::vector<std::int32_t> queue;
  for (std::size_t start = 0; start < G.size(); ++start) {
    if (ct.class_of[start] >= 0) continue;
    const auto cls = static_cast<std::int32_t>(ct.reps.size());
    ct.reps.push_back(static_cast<std::int32_t>(start));
    queue.assign(1, static_cast<std::int32_t>(start));
    ct.class_of[start] = cls;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const Mat g = G.element(static_cast<std::size_t>(queue[head]));
      for (std::size_t s = 0; s < gens.size(); ++s) {
        const auto k = G.index_of_fixed(S.conj(g, gens[s], gens_inv[s]));
        if (ct.class_of[static_cast<std::size_t>(k)] < 0) {
          ct.class_of[static_cast<std::size_t>(k)] = cls;
          queue.push_back(k);
        }
      }
    }
    ct.sizes.push_back(static_cast<std::int64_t>(queue.size()));
  }
  return ct;
}

// λ ∈ GL_n(F_{q^d}) with F(λ) = λ·P_w. Conjugation g ↦ λ g λ^{-1} carries
// G^{F'} isomorphically onto the split group G^F.
struct LangTransport {
  Mat lambda, lambda_inv;  // constant matrices, twisted-spec layout
};

inline LangTransport lang_transport(const GroupSpec& twisted) {
  const Field& f = twisted.field();
  const TruncRing& R = twisted.ring();
  Mat lambda;
  for (const auto& cyc : perm_cycles(twisted.w())) {
    const auto k = static_cast<std::uint64_t>(cyc.size());
    // primitive element of F_{q^k}: 1, α, …, α^{k−1} are F_q-independent
    const std::uint64_t qk = detail::ipow(f.q(), static_cast<unsigned>(k));
    const Field::Elem alpha = f.power_of_generator((f.size() - 1) / (qk - 1));
    // column cyc[0] = v with v_{cyc[i]} = α^i; column cyc[t] = F^t(v)
    for (std::size_t t = 0; t < cyc.size(); ++t)
      for (std::size_t i = 0; i < cyc.size(); ++i)
        twisted.set_entry(lambda, cyc[i], cyc[t], R.constant(f.frobenius(f.pow(alpha, i), static_cast<std::int64_t>(t))));
  }
  check(twisted.residue_invertible(lambda), "Lang element is singular");
  check(twisted.frobenius(lambda) == twisted.mul(lambda, twisted.permutation_matrix(twisted.w())),
        "Lang element does not satisfy F(λ) = λ P_w");
  return {lambda, twisted.inv(lambda)};
}

// Moves matrices between the twisted model and the split model over F_q.
class SplitIsomorphism {
 public:
  SplitIsomorphism(const GroupSpec& twisted, const GroupSpec& split)
      : tw_(&twisted), sp_(&split), lt_(lang_transport(twisted)) {
    if (split.field().d() != 1 || split.n() != twisted.n() || split.r() != twisted.r() || split.p() != twisted.p() ||
        split.m() != twisted.m())
      throw domain_error("SplitIsomorphism: incompatible specs");
    const auto& emb = embedding(split.field(), twisted.field());
    forward_.assign(emb.begin(), emb.end());
    backward_.assign(twisted.field().size(), -1);
    for (std::size_t a = 0; a < emb.size(); ++a) backward_[emb[a]] = static_cast<std::int64_t>(a);
  }

  const LangTransport& lang() const { return lt_; }

  // λ g λ^{-1}, re-expressed over the split field.
  Mat to_split(const Mat& g) const {
    const Mat h = tw_->mul(tw_->mul(lt_.lambda, g), lt_.lambda_inv);
    Mat out;
    const std::size_t len = static_cast<std::size_t>(tw_->n() * tw_->n() * tw_->r());
    for (std::size_t t = 0; t < len; ++t) {
      const auto b = backward_[h.a[t]];
      check(b >= 0, "to_split: entry outside F_q");
      out.a[t] = static_cast<Field::Elem>(b);
    }
    return out;
  }
  Mat to_twisted(const Mat& h) const {
    Mat x;
    const std::size_t len = static_cast<std::size_t>(tw_->n() * tw_->n() * tw_->r());
    for (std::size_t t = 0; t < len; ++t) x.a[t] = forward_[h.a[t]];
    return tw_->mul(tw_->mul(lt_.lambda_inv, x), lt_.lambda);
  }

 private:
  const GroupSpec* tw_;
  const GroupSpec* sp_;
  LangTransport lt_;
  std::vector<Field::Elem> forward_;
  std::vector<std::int64_t> backward_;
};

}  // namespace hdl
