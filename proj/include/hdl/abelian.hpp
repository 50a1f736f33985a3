#pragma once

// Basis and dual of a finite abelian group given by an element table and a
// multiplication on indices. The basis is built Sylow by Sylow: at each step
// take an element of maximal order modulo the part already spanned, then
// adjust it inside its coset until its order equals that quotient order, so
// the new cyclic factor meets the span trivially. Orders are prime powers.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "hdl/errors.hpp"
#include "hdl/field.hpp"

namespace hdl {

class AbelianDual {
 public:
  using Mul = std::function<std::size_t(std::size_t, std::size_t)>;

  AbelianDual(std::size_t size, std::size_t identity, const Mul& mul) : size_(size) {
    require_abelian(size, mul);
    std::vector<std::uint64_t> order(size, 0);
    for (std::size_t g = 0; g < size; ++g) {
      std::uint64_t k = 1;
      for (std::size_t x = g; x != identity; x = mul(x, g)) ++k;
      order[g] = k;
    }
    auto power = [&](std::size_t g, std::uint64_t e) {
      std::size_t x = identity;
      for (std::uint64_t i = 0; i < e; ++i) x = mul(x, g);
      return x;
    };

    for (auto prime : detail::prime_factors(size)) {
      std::uint64_t pe = 1;
      while (size % (pe * prime) == 0) pe *= prime;
      std::vector<std::size_t> sylow;
      for (std::size_t g = 0; g < size; ++g)
        if (pe % order[g] == 0) sylow.push_back(g);

      std::vector<char> in_span(size, 0);
      std::vector<std::size_t> span{identity};
      in_span[identity] = 1;
      while (span.size() < sylow.size()) {
        std::size_t best = size;
        std::uint64_t best_ord = 0;
        for (auto x : sylow) {
          if (in_span[x]) continue;
          std::uint64_t k = 1;
          for (std::size_t y = x; !in_span[y]; y = power(y, prime)) k *= prime;
          if (k > best_ord) {
            best_ord = k;
            best = x;
          }
        }
        std::size_t lifted = size;
        for (auto h : span) {
          const std::size_t y = mul(best, h);
          if (order[y] == best_ord) {
            lifted = y;
            break;
          }
        }
        check(lifted != size, "abelian basis: no lift of quotient order");
        basis_.push_back(lifted);
        orders_.push_back(best_ord);
        const std::size_t old = span.size();
        std::size_t gk = lifted;
        for (std::uint64_t j = 1; j < best_ord; ++j, gk = mul(gk, lifted))
          for (std::size_t t = 0; t < old; ++t) {
            const std::size_t y = mul(span[t], gk);
            in_span[y] = 1;
            span.push_back(y);
          }
      }
    }

    // coordinates of every element; also proves the factorization unique
    const std::size_t s = basis_.size();
    coords_.assign(size * s, -1);
    std::vector<int> c(s, 0);
    for (std::size_t count = 0; count < size; ++count) {
      std::size_t x = identity;
      for (std::size_t i = 0; i < s; ++i) x = mul(x, power(basis_[i], static_cast<std::uint64_t>(c[i])));
      check(coords_[x * s] < 0 || s == 0, "abelian basis: factorization not unique");
      for (std::size_t i = 0; i < s; ++i) coords_[x * s + i] = c[i];
      for (std::size_t i = s; i-- > 0;) {
        if (++c[i] < static_cast<int>(orders_[i])) break;
        c[i] = 0;
      }
    }
    exponent_ = 1;
    for (auto o : orders_) exponent_ = std::lcm(exponent_, o);
  }

  std::size_t size() const { return size_; }
  const std::vector<std::size_t>& basis() const { return basis_; }
  const std::vector<std::uint64_t>& orders() const { return orders_; }
  std::uint64_t exponent() const { return exponent_; }
  std::size_t rank() const { return basis_.size(); }

  std::vector<int> coords(std::size_t g) const {
    const std::size_t s = rank();
    return {coords_.begin() + static_cast<std::ptrdiff_t>(g * s), coords_.begin() + static_cast<std::ptrdiff_t>((g + 1) * s)};
  }
  int coord(std::size_t g, std::size_t i) const { return coords_[g * rank() + i]; }

  // Characters are exponent tuples e with e_i ∈ Z/o_i, enumerated with the
  // first coordinate most significant.
  std::size_t character_count() const { return size_; }
  std::vector<int> character_coords(std::size_t idx) const {
    std::vector<int> e(rank());
    for (std::size_t i = rank(); i-- > 0;) {
      e[i] = static_cast<int>(idx % orders_[i]);
      idx /= orders_[i];
    }
    return e;
  }
  std::size_t character_index(const std::vector<int>& e) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < rank(); ++i) idx = idx * orders_[i] + static_cast<std::size_t>(e[i]);
    return idx;
  }

  // θ_e(g) = ζ_M^{Σ e_i c_i(g) M/o_i}; M must be a multiple of the exponent.
  std::uint32_t value(const std::vector<int>& e, std::size_t g, std::uint32_t M) const {
    if (M % exponent_) throw domain_error("character order must be a multiple of the group exponent");
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < rank(); ++i)
      acc += static_cast<std::uint64_t>(e[i]) * static_cast<std::uint64_t>(coord(g, i)) * (M / orders_[i]);
    return static_cast<std::uint32_t>(acc % M);
  }

 private:
  static void require_abelian(std::size_t size, const Mul& mul) {
    auto commute = [&](std::size_t a, std::size_t b) { return mul(a, b) == mul(b, a); };
    if (size <= 1024) {
      for (std::size_t a = 0; a < size; ++a)
        for (std::size_t b = a + 1; b < size; ++b)
          if (!commute(a, b)) throw domain_error("dual_group: group is not abelian");
    } else {
      std::mt19937_64 rng(7);
      std::uniform_int_distribution<std::size_t> pick(0, size - 1);
      for (int t = 0; t < 20000; ++t)
        if (!commute(pick(rng), pick(rng))) throw domain_error("dual_group: group is not abelian");
    }
  }

  std::size_t size_;
  std::vector<std::size_t> basis_;
  std::vector<std::uint64_t> orders_;
  std::vector<int> coords_;
  std::uint64_t exponent_ = 1;
};

}  // namespace hdl
