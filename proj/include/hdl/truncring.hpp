#pragma once

// O_{d,r} = F_{q^d}[π]/π^r, the equal-characteristic truncated valuation ring.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hdl/field.hpp"

namespace hdl {

inline constexpr int kMaxLevel = 8;

// Coefficient of π^i at index i; entries beyond the ring level stay zero.
struct RingElem {
  std::array<Field::Elem, kMaxLevel> c{};
  friend bool operator==(const RingElem&, const RingElem&) = default;
  friend auto operator<=>(const RingElem&, const RingElem&) = default;
};

class TruncRing {
 public:
  TruncRing(FieldPtr field, int level) : field_(std::move(field)), r_(level) {
    if (r_ < 1 || r_ > kMaxLevel)
      throw domain_error("ring level must lie in [1, " + std::to_string(kMaxLevel) + "]");
  }

  const Field& field() const { return *field_; }
  const FieldPtr& field_ptr() const { return field_; }
  int level() const { return r_; }

  RingElem zero() const { return {}; }
  RingElem one() const { return constant(1); }
  RingElem constant(Field::Elem a) const {
    RingElem x;
    x.c[0] = a;
    return x;
  }
  RingElem pi_power(int i, Field::Elem a = 1) const {
    RingElem x;
    if (i < r_) x.c[i] = a;
    return x;
  }

  bool is_unit(const RingElem& a) const { return a.c[0] != 0; }
  bool is_zero(const RingElem& a) const {
    for (int i = 0; i < r_; ++i)
      if (a.c[i]) return false;
    return true;
  }
  // π-adic valuation; r for zero.
  int valuation(const RingElem& a) const {
    for (int i = 0; i < r_; ++i)
      if (a.c[i]) return i;
    return r_;
  }

  RingElem add(const RingElem& a, const RingElem& b) const {
    RingElem out;
    for (int i = 0; i < r_; ++i) out.c[i] = field_->add(a.c[i], b.c[i]);
    return out;
  }
  RingElem sub(const RingElem& a, const RingElem& b) const {
    RingElem out;
    for (int i = 0; i < r_; ++i) out.c[i] = field_->sub(a.c[i], b.c[i]);
    return out;
  }
  RingElem neg(const RingElem& a) const {
    RingElem out;
    for (int i = 0; i < r_; ++i) out.c[i] = field_->neg(a.c[i]);
    return out;
  }
  RingElem mul(const RingElem& a, const RingElem& b) const {
    RingElem out;
    const Field& f = *field_;
    for (int i = 0; i < r_; ++i) {
      if (!a.c[i]) continue;
      for (int j = 0; i + j < r_; ++j)
        if (b.c[j]) out.c[i + j] = f.add(out.c[i + j], f.mul(a.c[i], b.c[j]));
    }
    return out;
  }
  // Newton lifting x ← x(2 − a x) from the residue inverse.
  RingElem inv(const RingElem& a) const {
    if (!is_unit(a)) throw domain_error("TruncRing::inv: element is not a unit");
    RingElem x = constant(field_->inv(a.c[0]));
    const RingElem two = constant(field_->from_int(2));
    for (int prec = 1; prec < r_; prec *= 2) x = mul(x, sub(two, mul(a, x)));
    return x;
  }
  RingElem pow(RingElem a, std::uint64_t e) const {
    RingElem out = one();
    while (e) {
      if (e & 1) out = mul(out, a);
      a = mul(a, a);
      e >>= 1;
    }
    return out;
  }

  // Coefficientwise x ↦ x^{q^k}.
  RingElem frobenius(const RingElem& a, std::int64_t k = 1) const {
    RingElem out;
    for (int i = 0; i < r_; ++i) out.c[i] = field_->frobenius(a.c[i], k);
    return out;
  }

  // Truncation mod π^i; the result lives in the level-i ring.
  RingElem reduce_level(const RingElem& a, int i) const {
    if (i < 1 || i > r_) throw domain_error("reduce_level: level out of range");
    RingElem out;
    for (int k = 0; k < i; ++k) out.c[k] = a.c[k];
    return out;
  }

  // ∏_j F^{powers[j]}(t).
  RingElem norm_map(const RingElem& t, std::span<const int> frobenius_powers) const {
    if (!is_unit(t)) throw domain_error("norm_map: argument is not a unit");
    RingElem out = one();
    for (int k : frobenius_powers) out = mul(out, frobenius(t, k));
    return out;
  }
  // t·F(t)⋯F^{a−1}(t)
  RingElem norm_map(const RingElem& t, int iterations) const {
    std::vector<int> powers(iterations);
    for (int j = 0; j < iterations; ++j) powers[j] = j;
    return norm_map(t, powers);
  }

  // Elements with all coefficients in the subfield F_{q^e}, listed in
  // coefficient-lex order (π^0 coefficient varies fastest).
  std::vector<RingElem> elements_over(unsigned e) const {
    const auto sub = field_->subfield_elements(e * field_->m());
    std::vector<RingElem> out;
    std::size_t total = 1;
    for (int i = 0; i < r_; ++i) total *= sub.size();
    out.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
      RingElem x;
      std::size_t rest = idx;
      for (int i = 0; i < r_; ++i) {
        x.c[i] = sub[rest % sub.size()];
        rest /= sub.size();
      }
      out.push_back(x);
    }
    return out;
  }
  std::vector<RingElem> units_over(unsigned e) const {
    std::vector<RingElem> out;
    for (const auto& x : elements_over(e))
      if (is_unit(x)) out.push_back(x);
    return out;
  }

  // (q^e − 1)·q^{e(r−1)}
  std::uint64_t unit_count(unsigned e) const {
    const std::uint64_t qe = detail::ipow(field_->q(), e);
    return (qe - 1) * detail::ipow(qe, static_cast<unsigned>(r_ - 1));
  }

  std::string to_string(const RingElem& a) const {
    std::string out;
    for (int i = 0; i < r_; ++i) {
      if (!a.c[i]) continue;
      if (!out.empty()) out += " + ";
      std::string coef = field_->to_string(a.c[i]);
      if (i > 0 && coef.find('+') != std::string::npos) coef = "(" + coef + ")";
      if (i == 0)
        out += coef;
      else
        out += (coef == "1" ? "" : coef) + (i == 1 ? "π" : "π^" + std::to_string(i));
    }
    return out.empty() ? "0" : out;
  }

 private:
  FieldPtr field_;
  int r_;
};

}  // namespace hdl
