#pragma once

// Finite field tower F_p ⊆ F_q ⊆ F_{q^d}, q = p^m.
//
// A Field realizes the top layer F_{q^d} as F_p[x]/(f) with f the
// lexicographically smallest monic irreducible of degree m·d. Elements are
// integer codes: code = Σ a_i p^i where a_i is the coefficient of x^i.
// Multiplication goes through exp/log tables of a cached primitive root, so
// fields are limited to 2^20 elements.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "hdl/errors.hpp"

namespace hdl {

namespace detail {

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t k = 2; k * k <= n; ++k)
    if (n % k == 0) return false;
  return true;
}

inline std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t k = 2; k * k <= n; ++k) {
    if (n % k == 0) {
      out.push_back(k);
      while (n % k == 0) n /= k;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

inline std::uint64_t ipow(std::uint64_t b, unsigned e) {
  std::uint64_t r = 1;
  while (e--) r *= b;
  return r;
}

// Dense polynomials over F_p, index = degree. Used only while building tables.
using Poly = std::vector<std::uint32_t>;

inline void trim(Poly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

inline Poly poly_mod(Poly a, const Poly& m, std::uint32_t p) {
  trim(a);
  const std::size_t dm = m.size() - 1;
  // inverse of the leading coefficient
  std::uint32_t lead_inv = 1;
  for (std::uint32_t t = 1; t < p; ++t)
    if ((std::uint64_t{t} * m.back()) % p == 1) lead_inv = t;
  while (a.size() > dm) {
    const std::uint64_t c = (std::uint64_t{a.back()} * lead_inv) % p;
    const std::size_t shift = a.size() - 1 - dm;
    for (std::size_t i = 0; i <= dm; ++i)
      a[shift + i] = static_cast<std::uint32_t>((a[shift + i] + p - (c * m[i]) % p) % p);
    trim(a);
  }
  return a;
}

inline Poly poly_mulmod(const Poly& a, const Poly& b, const Poly& m, std::uint32_t p) {
  if (a.empty() || b.empty()) return {};
  Poly c(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      c[i + j] = static_cast<std::uint32_t>((c[i + j] + std::uint64_t{a[i]} * b[j]) % p);
  return poly_mod(std::move(c), m, p);
}

inline Poly code_to_poly(std::uint64_t code, std::uint32_t p, unsigned len) {
  Poly a(len, 0);
  for (unsigned i = 0; i < len; ++i) {
    a[i] = static_cast<std::uint32_t>(code % p);
    code /= p;
  }
  trim(a);
  return a;
}

inline std::uint64_t poly_to_code(const Poly& a, std::uint32_t p) {
  std::uint64_t code = 0;
  for (std::size_t i = a.size(); i-- > 0;) code = code * p + a[i];
  return code;
}

// Trial factorization: no monic factor of degree 1..deg/2.
inline bool is_irreducible(const Poly& f, std::uint32_t p) {
  const unsigned deg = static_cast<unsigned>(f.size() - 1);
  for (unsigned e = 1; 2 * e <= deg; ++e) {
    const std::uint64_t count = ipow(p, e);
    for (std::uint64_t low = 0; low < count; ++low) {
      Poly g = code_to_poly(low, p, e);
      g.resize(e + 1, 0);
      g[e] = 1;
      if (poly_mod(f, g, p).empty()) return false;
    }
  }
  return true;
}

}  // namespace detail

class Field {
 public:
  using Elem = std::uint32_t;
  enum class Level { prime, base };  // F_p, F_q

  static constexpr std::uint64_t kMaxSize = std::uint64_t{1} << 20;

  static std::shared_ptr<const Field> build(std::uint32_t p, unsigned m, unsigned d) {
    static std::mutex mu;
    static std::map<std::tuple<std::uint32_t, unsigned, unsigned>, std::shared_ptr<const Field>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{p, m, d}];
    if (!slot) slot = std::shared_ptr<const Field>(new Field(p, m, d));
    return slot;
  }

  std::uint32_t p() const { return p_; }
  unsigned m() const { return m_; }
  unsigned d() const { return d_; }
  unsigned degree() const { return m_ * d_; }  // over F_p
  std::uint32_t q() const { return q_; }
  std::uint32_t size() const { return size_; }
  const std::vector<std::uint32_t>& modulus() const { return modulus_; }
  Elem primitive_root() const { return generator_; }

  Elem add(Elem a, Elem b) const {
    if (p_ == 2) return a ^ b;
    if (!add_table_.empty()) return add_table_[std::size_t{a} * size_ + b];
    Elem out = 0, place = 1;
    while (a || b) {
      out += place * ((a % p_ + b % p_) % p_);
      a /= p_;
      b /= p_;
      place *= p_;
    }
    return out;
  }
  Elem neg(Elem a) const { return neg_[a]; }
  Elem sub(Elem a, Elem b) const { return add(a, neg_[b]); }
  Elem mul(Elem a, Elem b) const {
    if (a == 0 || b == 0) return 0;
    return exp_[log_[a] + log_[b]];
  }
  Elem inv(Elem a) const {
    if (a == 0) throw domain_error("Field::inv: zero has no inverse");
    return exp_[(size_ - 1 - log_[a]) % (size_ - 1)];
  }
  Elem pow(Elem a, std::uint64_t e) const {
    if (e == 0) return 1;
    if (a == 0) return 0;
    return exp_[(std::uint64_t{log_[a]} * (e % (size_ - 1))) % (size_ - 1)];
  }
  Elem power_of_generator(std::uint64_t e) const { return exp_[e % (size_ - 1)]; }

  // x ↦ x^{q^k}
  Elem frobenius(Elem x, std::int64_t k = 1) const {
    k %= static_cast<std::int64_t>(d_);
    if (k < 0) k += d_;
    for (std::int64_t i = 0; i < k; ++i) x = frob_[x];
    return x;
  }

  // x ↦ x^{p^k}
  Elem absolute_frobenius(Elem x, unsigned k) const {
    if (x == 0) return 0;
    const std::uint64_t e = detail::ipow(p_, k % degree()) % (size_ - 1);
    return exp_[(std::uint64_t{log_[x]} * e) % (size_ - 1)];
  }

  // Degrees over F_p. x ∈ F_{p^e} iff x^{p^e} = x.
  bool in_subfield(Elem x, unsigned e) const {
    if (degree() % e != 0) return false;
    return absolute_frobenius(x, e) == x;
  }

  std::vector<Elem> subfield_elements(unsigned e) const {
    if (degree() % e != 0) throw domain_error("subfield degree must divide the field degree");
    std::vector<Elem> out;
    for (Elem x = 0; x < size_; ++x)
      if (in_subfield(x, e)) out.push_back(x);
    return out;
  }

  // Tr_{F_{p^from}/F_{p^to}}(x); x must lie in F_{p^from}.
  Elem subfield_trace(Elem x, unsigned from, unsigned to) const {
    if (from % to != 0 || degree() % from != 0)
      throw domain_error("subfield_trace: incompatible levels");
    if (!in_subfield(x, from)) throw domain_error("subfield_trace: element outside source subfield");
    Elem acc = 0, y = x;
    for (unsigned i = 0; i < from / to; ++i) {
      acc = add(acc, y);
      y = absolute_frobenius(y, to);
    }
    return acc;
  }

  // Trace from the top layer F_{q^d} down to F_p or F_q.
  Elem trace_to(Elem x, Level target) const {
    return subfield_trace(x, degree(), target == Level::prime ? 1 : m_);
  }

  std::uint64_t dlog(Elem x) const {
    if (x == 0) throw domain_error("dlog of zero");
    return log_[x];
  }

  std::vector<std::uint32_t> coeffs(Elem x) const {
    std::vector<std::uint32_t> c(degree(), 0);
    for (unsigned i = 0; i < degree(); ++i) {
      c[i] = x % p_;
      x /= p_;
    }
    return c;
  }
  Elem from_coeffs(std::span<const std::uint32_t> c) const {
    if (c.size() != degree()) throw domain_error("from_coeffs: wrong length");
    Elem code = 0;
    for (std::size_t i = c.size(); i-- > 0;) code = code * p_ + (c[i] % p_);
    return code;
  }

  // Residue of an integer in the prime field.
  Elem from_int(std::int64_t v) const {
    std::int64_t r = v % static_cast<std::int64_t>(p_);
    if (r < 0) r += p_;
    return static_cast<Elem>(r);
  }

  // Polynomial notation in the generator "x", e.g. "x^2+2x+1".
  std::string to_string(Elem a) const {
    if (a == 0) return "0";
    const auto c = coeffs(a);
    std::string out;
    for (std::size_t i = c.size(); i-- > 0;) {
      if (c[i] == 0) continue;
      if (!out.empty()) out += "+";
      if (c[i] != 1 || i == 0) out += std::to_string(c[i]);
      if (i >= 1) out += "x";
      if (i >= 2) out += "^" + std::to_string(i);
    }
    return out;
  }

 private:
  Field(std::uint32_t p, unsigned m, unsigned d) : p_(p), m_(m), d_(d) {
    if (!detail::is_prime(p)) throw domain_error("characteristic " + std::to_string(p) + " is not prime");
    if (m == 0 || d == 0) throw domain_error("extension degrees must be positive");
    const unsigned k = m * d;
    if (k > 20 || detail::ipow(p, k) > kMaxSize)
      throw cap_exceeded("field of size " + std::to_string(p) + "^" + std::to_string(k) + " exceeds 2^20");
    size_ = static_cast<std::uint32_t>(detail::ipow(p, k));
    q_ = static_cast<std::uint32_t>(detail::ipow(p, m));

    // lexicographically smallest monic irreducible: lower coefficients read
    // from the top degree down, i.e. smallest integer code.
    for (std::uint64_t low = 0;; ++low) {
      detail::Poly f = detail::code_to_poly(low, p, k);
      f.resize(k + 1, 0);
      f[k] = 1;
      if (detail::is_irreducible(f, p)) {
        modulus_ = f;
        break;
      }
    }

    // smallest primitive root
    const std::uint64_t order = size_ - 1;
    const auto ell = detail::prime_factors(order);
    auto slow_pow = [&](const detail::Poly& base, std::uint64_t e) {
      detail::Poly r{1}, b = base;
      while (e) {
        if (e & 1) r = detail::poly_mulmod(r, b, modulus_, p);
        b = detail::poly_mulmod(b, b, modulus_, p);
        e >>= 1;
      }
      return r;
    };
    generator_ = 0;
    for (std::uint64_t c = 1; c < size_ && generator_ == 0; ++c) {
      const auto g = detail::code_to_poly(c, p, k);
      bool primitive = true;
      for (auto l : ell) {
        const auto t = slow_pow(g, order / l);
        if (t.size() == 1 && t[0] == 1) {
          primitive = false;
          break;
        }
      }
      if (primitive) generator_ = static_cast<Elem>(c);
    }

    exp_.assign(2 * order + 1, 0);
    log_.assign(size_, 0);
    detail::Poly cur{1};
    const auto g = detail::code_to_poly(generator_, p, k);
    for (std::uint64_t i = 0; i < order; ++i) {
      const auto code = static_cast<Elem>(detail::poly_to_code(cur, p));
      exp_[i] = code;
      exp_[i + order] = code;
      log_[code] = static_cast<std::uint32_t>(i);
      cur = detail::poly_mulmod(cur, g, modulus_, p);
    }
    exp_[2 * order] = exp_[0];

    neg_.resize(size_);
    for (Elem a = 0; a < size_; ++a) {
      Elem out = 0, place = 1, x = a;
      for (unsigned i = 0; i < k; ++i) {
        out += place * ((p - x % p) % p);
        x /= p;
        place *= p;
      }
      neg_[a] = out;
    }
    if (p != 2 && size_ <= 1024) {
      add_table_.resize(std::size_t{size_} * size_);
      for (Elem a = 0; a < size_; ++a)
        for (Elem b = 0; b < size_; ++b) {
          Elem out = 0, place = 1, x = a, y = b;
          for (unsigned i = 0; i < k; ++i) {
            out += place * ((x % p + y % p) % p);
            x /= p;
            y /= p;
            place *= p;
          }
          add_table_[std::size_t{a} * size_ + b] = out;
        }
    }
    frob_.resize(size_);
    for (Elem a = 0; a < size_; ++a)
      frob_[a] = a == 0 ? 0 : exp_[(std::uint64_t{log_[a]} * q_) % order];
  }

  std::uint32_t p_;
  unsigned m_, d_;
  std::uint32_t q_ = 0, size_ = 0;
  std::vector<std::uint32_t> modulus_;
  Elem generator_ = 1;
  std::vector<Elem> exp_;
  std::vector<std::uint32_t> log_;
  std::vector<Elem> neg_;
  std::vector<Elem> add_table_;
  std::vector<Elem> frob_;
};

using FieldPtr = std::shared_ptr<const Field>;

// Embedding F_{p^e} → F_{p^k} (e | k) sending the generator of the small
// field to the smallest root of its modulus in the big one. Table indexed by
// small-field code.
inline const std::vector<Field::Elem>& embedding(const Field& small, const Field& big) {
  static std::mutex mu;
  static std::map<std::pair<const Field*, const Field*>, std::vector<Field::Elem>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find({&small, &big});
  if (it != cache.end()) return it->second;
  if (small.p() != big.p() || big.degree() % small.degree() != 0)
    throw domain_error("embedding: degrees do not divide");
  const auto& f = small.modulus();
  Field::Elem root = 0;
  bool found = false;
  for (Field::Elem x = 0; x < big.size() && !found; ++x) {
    Field::Elem acc = 0;
    for (std::size_t i = f.size(); i-- > 0;) acc = big.add(big.mul(acc, x), big.from_int(f[i]));
    if (acc == 0) {
      root = x;
      found = true;
    }
  }
  check(found, "embedding: no root of the small modulus");
  std::vector<Field::Elem> table(small.size());
  for (Field::Elem a = 0; a < small.size(); ++a) {
    const auto c = small.coeffs(a);
    Field::Elem acc = 0;
    for (std::size_t i = c.size(); i-- > 0;) acc = big.add(big.mul(acc, root), big.from_int(c[i]));
    table[a] = acc;
  }
  return cache.emplace(std::make_pair(&small, &big), std::move(table)).first->second;
}

}  // namespace hdl
