#pragma once

// Exact values in Z[ζ_M]: elements of the group ring Z[Z/M] (one integer per
// M-th root of unity), reduced modulo the cyclotomic polynomial Φ_M when an
// exact comparison is needed.

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "hdl/errors.hpp"

namespace hdl {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational reduced() const {
    const std::int64_t g = std::gcd(num, den);
    Rational r{g ? num / g : 0, g ? den / g : 1};
    if (r.den < 0) {
      r.num = -r.num;
      r.den = -r.den;
    }
    return r;
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool is_zero() const { return num == 0; }
  bool is_integer(std::int64_t k) const { return num == k * den; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den == static_cast<__int128>(b.num) * a.den;
  }
  friend Rational operator+(const Rational& a, const Rational& b) {
    const std::int64_t l = std::lcm(a.den, b.den);
    return Rational{a.num * (l / a.den) + b.num * (l / b.den), l}.reduced();
  }
  std::string to_string() const {
    const Rational r = reduced();
    return r.den == 1 ? std::to_string(r.num) : std::to_string(r.num) + "/" + std::to_string(r.den);
  }
};

struct RootOfUnity {
  std::uint32_t order = 1;
  std::uint32_t exponent = 0;
};

// Φ_M by dividing x^M − 1 by Φ_d for every proper divisor d.
inline const std::vector<std::int64_t>& cyclotomic_polynomial(std::uint32_t M) {
  static std::mutex mu;
  static std::map<std::uint32_t, std::vector<std::int64_t>> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(M);
    if (it != cache.end()) return it->second;
  }
  std::vector<std::int64_t> poly(M + 1, 0);
  poly[0] = -1;
  poly[M] = 1;
  for (std::uint32_t d = 1; d < M; ++d) {
    if (M % d) continue;
    const auto& phi = cyclotomic_polynomial(d);
    // exact division by the monic phi
    const std::size_t dp = phi.size() - 1;
    std::vector<std::int64_t> quot(poly.size() - dp, 0);
    for (std::size_t i = poly.size(); i-- > dp;) {
      const std::int64_t c = poly[i];
      quot[i - dp] = c;
      if (c)
        for (std::size_t j = 0; j <= dp; ++j) poly[i - dp + j] -= c * phi[j];
    }
    poly = quot;
  }
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(M, std::move(poly)).first->second;
}

class CycloValue {
 public:
  CycloValue() : CycloValue(1) {}
  explicit CycloValue(std::uint32_t M) : M_(M), coef_(M, 0) {
    if (M == 0) throw domain_error("root-of-unity order must be positive");
  }
  static CycloValue root(std::uint32_t M, std::uint32_t e) {
    CycloValue v(M);
    v.coef_[e % M] = 1;
    return v;
  }
  static CycloValue integer(std::uint32_t M, std::int64_t k) {
    CycloValue v(M);
    v.coef_[0] = k;
    return v;
  }

  std::uint32_t order() const { return M_; }
  const std::vector<std::int64_t>& coefficients() const { return coef_; }

  void add_root(std::uint32_t e, std::int64_t mult = 1) { coef_[e % M_] += mult; }

  CycloValue& operator+=(const CycloValue& o) {
    same_order(o);
    for (std::uint32_t e = 0; e < M_; ++e) coef_[e] += o.coef_[e];
    return *this;
  }
  friend CycloValue operator+(CycloValue a, const CycloValue& b) { return a += b; }
  friend CycloValue operator*(const CycloValue& a, const CycloValue& b) {
    a.same_order(b);
    CycloValue out(a.M_);
    for (std::uint32_t i = 0; i < a.M_; ++i) {
      if (!a.coef_[i]) continue;
      for (std::uint32_t j = 0; j < a.M_; ++j)
        if (b.coef_[j]) out.coef_[(i + j) % a.M_] += a.coef_[i] * b.coef_[j];
    }
    return out;
  }
  CycloValue scaled(std::int64_t k) const {
    CycloValue out = *this;
    for (auto& c : out.coef_) c *= k;
    return out;
  }

  // complex conjugate: ζ^e ↦ ζ^{−e}
  CycloValue conj() const {
    CycloValue out(M_);
    for (std::uint32_t e = 0; e < M_; ++e) out.coef_[(M_ - e) % M_] = coef_[e];
    return out;
  }

  // Same value viewed in Z[ζ_{M'}], M | M'.
  CycloValue lift(std::uint32_t M2) const {
    if (M2 % M_) throw domain_error("lift: target order must be a multiple");
    CycloValue out(M2);
    const std::uint32_t s = M2 / M_;
    for (std::uint32_t e = 0; e < M_; ++e) out.coef_[e * s] = coef_[e];
    return out;
  }

  std::complex<double> numeric() const {
    // pairwise summation over exponents
    std::vector<std::complex<double>> terms(M_);
    for (std::uint32_t e = 0; e < M_; ++e) {
      const double ang = 2.0 * std::numbers::pi * static_cast<double>(e) / static_cast<double>(M_);
      terms[e] = static_cast<double>(coef_[e]) * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    for (std::size_t w = 1; w < terms.size(); w *= 2)
      for (std::size_t i = 0; i + w < terms.size(); i += 2 * w) terms[i] += terms[i + w];
    return terms.empty() ? std::complex<double>{} : terms[0];
  }

  // Remainder modulo Φ_M, length φ(M).
  std::vector<std::int64_t> reduce() const {
    const auto& phi = cyclotomic_polynomial(M_);
    const std::size_t dp = phi.size() - 1;
    std::vector<std::int64_t> a = coef_;
    for (std::size_t i = a.size(); i-- > dp;) {
      const std::int64_t c = a[i];
      if (!c) continue;
      for (std::size_t j = 0; j <= dp; ++j) a[i - dp + j] -= c * phi[j];
    }
    a.resize(dp);
    return a;
  }

  // The value as an integer, if it is one.
  std::optional<std::int64_t> as_integer() const {
    const auto r = reduce();
    for (std::size_t i = 1; i < r.size(); ++i)
      if (r[i]) return std::nullopt;
    return r.empty() ? 0 : r[0];
  }
  bool is_zero() const {
    for (auto c : reduce())
      if (c) return false;
    return true;
  }

 private:
  void same_order(const CycloValue& o) const {
    if (o.M_ != M_) throw domain_error("cyclotomic orders differ");
  }

  std::uint32_t M_;
  std::vector<std::int64_t> coef_;
};

// Lifts a and b to a common order.
inline std::uint32_t common_order(std::uint32_t a, std::uint32_t b) { return std::lcm(a, b); }

}  // namespace hdl
