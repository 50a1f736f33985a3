#pragma once

// Characters of the abelian kernel (G^l)^{F'} ≅ M_n(O_l)^{F'} and of the torus:
// ψ_β(X) = ψ(Tr(βX)), extraction of β from θ on (T^l)^{F'}, the trivial lift
// of θ to (TU^±)^{F'}, and the three genericity conditions.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hdl/torus.hpp"

namespace hdl {

// ψ(x) = ζ_p^{scale · Tr_{F_q/F_p}(coefficient of π^{l−1} in x)}.
// Non-trivial on (π^{l−1}) for every scale in [1, p−1].
struct PsiSpec {
  std::uint32_t scale = 1;

  // Exponent mod p. x must have its coefficients in F_q.
  std::uint32_t exponent(const Field& f, const RingElem& x, int l) const {
    const Field::Elem top = x.c[static_cast<std::size_t>(l - 1)];
    const Field::Elem tr = f.subfield_trace(top, f.m(), 1);
    return static_cast<std::uint32_t>((std::uint64_t{tr} * scale) % f.p());
  }
};

// Tr(A·B) for level-l matrices laid out by spec_l.
inline RingElem trace_of_product(const GroupSpec& spec_l, const Mat& A, const Mat& B) {
  const TruncRing& R = spec_l.ring();
  RingElem acc = R.zero();
  for (int i = 0; i < spec_l.n(); ++i)
    for (int k = 0; k < spec_l.n(); ++k) acc = R.add(acc, R.mul(spec_l.entry(A, i, k), spec_l.entry(B, k, i)));
  return acc;
}

// ψ_β(X) as an exponent mod p; β and X are F'-fixed level-l matrices.
inline std::uint32_t psi_beta(const GroupSpec& spec_l, const PsiSpec& psi, const Mat& beta, const Mat& X) {
  return psi.exponent(spec_l.field(), trace_of_product(spec_l, beta, X), spec_l.r());
}

namespace detail {

// F_p-basis of the subfield F_{p^e} ⊆ F, greedy in code order.
inline std::vector<Field::Elem> fp_basis(const Field& f, unsigned e) {
  std::vector<Field::Elem> basis;
  std::vector<std::vector<std::uint32_t>> rows;  // echelon rows with pivots
  std::vector<int> pivots;
  const std::uint32_t p = f.p();
  for (auto x : f.subfield_elements(e)) {
    if (basis.size() == e) break;
    auto v = f.coeffs(x);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto piv = static_cast<std::size_t>(pivots[r]);
      if (!v[piv]) continue;
      const std::uint64_t c = v[piv];
      for (std::size_t k = 0; k < v.size(); ++k)
        v[k] = static_cast<std::uint32_t>((v[k] + p * p - (c * rows[r][k]) % p) % p);
    }
    int piv = -1;
    for (std::size_t k = 0; k < v.size(); ++k)
      if (v[k]) {
        piv = static_cast<int>(k);
        break;
      }
    if (piv < 0) continue;
    // normalize pivot to 1
    std::uint32_t inv = 1;
    for (std::uint32_t t = 1; t < p; ++t)
      if ((std::uint64_t{t} * v[static_cast<std::size_t>(piv)]) % p == 1) inv = t;
    for (auto& c : v) c = static_cast<std::uint32_t>((std::uint64_t{c} * inv) % p);
    rows.push_back(v);
    pivots.push_back(piv);
    basis.push_back(x);
  }
  return basis;
}

// Solves A x = b over F_p (A square); nullopt if singular.
inline std::optional<std::vector<std::uint32_t>> solve_mod_p(std::vector<std::vector<std::uint32_t>> A,
                                                             std::vector<std::uint32_t> b, std::uint32_t p) {
  const std::size_t n = A.size();
  auto inv_mod = [p](std::uint32_t a) {
    for (std::uint32_t t = 1; t < p; ++t)
      if ((std::uint64_t{t} * a) % p == 1) return t;
    return std::uint32_t{0};
  };
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = n;
    for (std::size_t r = c; r < n; ++r)
      if (A[r][c]) {
        piv = r;
        break;
      }
    if (piv == n) return std::nullopt;
    std::swap(A[c], A[piv]);
    std::swap(b[c], b[piv]);
    const std::uint64_t inv = inv_mod(A[c][c]);
    for (auto& x : A[c]) x = static_cast<std::uint32_t>((x * inv) % p);
    b[c] = static_cast<std::uint32_t>((b[c] * inv) % p);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || !A[r][c]) continue;
      const std::uint64_t f = A[r][c];
      for (std::size_t k = 0; k < n; ++k) A[r][k] = static_cast<std::uint32_t>((A[r][k] + p * p - (f * A[c][k]) % p) % p);
      b[r] = static_cast<std::uint32_t>((b[r] + p * p - (f * b[c]) % p) % p);
    }
  }
  return b;
}

}  // namespace detail

// F_p-basis of the twisted diagonal Lie algebra t_l^{F'} (level-l layout):
// for each cycle, each π-power and each F_p-basis element of F_{q^{len}}.
inline std::vector<Mat> twisted_diagonal_basis(const GroupSpec& spec_l) {
  const Field& f = spec_l.field();
  const TruncRing& R = spec_l.ring();
  std::vector<Mat> out;
  for (const auto& cyc : perm_cycles(spec_l.w())) {
    const auto fb = detail::fp_basis(f, static_cast<unsigned>(cyc.size()) * f.m());
    for (int k = 0; k < spec_l.r(); ++k)
      for (auto b : fb) {
        Mat D;
        RingElem x = R.pi_power(k, b);
        for (int pos : cyc) {
          spec_l.set_entry(D, pos, pos, x);
          x = R.frobenius(x);
        }
        out.push_back(D);
      }
  }
  return out;
}

// All F'-fixed diagonal level-l matrices (brute-force list, for oracles and
// stabilizer scans).
inline std::vector<Mat> twisted_diagonal_elements(const GroupSpec& spec_l) {
  const TruncRing& R = spec_l.ring();
  const auto cycles = perm_cycles(spec_l.w());
  std::vector<std::vector<RingElem>> choices;
  std::size_t total = 1;
  for (const auto& c : cycles) {
    choices.push_back(R.elements_over(static_cast<unsigned>(c.size())));
    total *= choices.back().size();
  }
  std::vector<Mat> out;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    Mat D;
    for (std::size_t c = cycles.size(); c-- > 0;) {
      RingElem x = choices[c][rest % choices[c].size()];
      rest /= choices[c].size();
      for (int pos : cycles[c]) {
        spec_l.set_entry(D, pos, pos, x);
        x = R.frobenius(x);
      }
    }
    out.push_back(D);
  }
  return out;
}

struct GenericityReport {
  bool regular = false;
  bool general_position = false;
  bool stabilizer = false;  // C_{G_l^{F'}}(β) = T_l^{F'}
  bool generic() const { return regular && general_position && stabilizer; }
};

// Everything about characters of one torus at even level r = 2l.
class TorusCharacters {
 public:
  TorusCharacters(const Torus& torus, PsiSpec psi = {})
      : torus_(&torus), psi_(psi), spec_l_(torus.spec().at_level(torus.spec().half_level())) {
    const GroupSpec& S = torus.spec();
    const int l = S.half_level();
    // (T^l)^{F'} = {1 + π^l D}; record the basis of D and θ-independent data
    basis_ = twisted_diagonal_basis(spec_l_);
    const std::uint32_t p = S.p();
    pairing_.assign(basis_.size(), std::vector<std::uint32_t>(basis_.size(), 0));
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      const Mat elem = S.from_kernel_coordinates(basis_[i], l);
      const auto t = torus.index_of(elem);
      check(t >= 0, "(T^l) basis element not in the torus");
      basis_points_.push_back(static_cast<std::size_t>(t));
      for (std::size_t j = 0; j < basis_.size(); ++j) pairing_[i][j] = psi_beta(spec_l_, psi_, basis_[j], basis_[i]);
    }
    // perfect pairing
    std::vector<std::uint32_t> zero(basis_.size(), 0);
    check(detail::solve_mod_p(pairing_, zero, p).has_value(), "trace pairing on t_l is degenerate");
  }

  const Torus& torus() const { return *torus_; }
  const PsiSpec& psi() const { return psi_; }
  const GroupSpec& level_spec() const { return spec_l_; }

  // The unique β ∈ t_l^{F'} with θ(1 + π^l D) = ψ(Tr(βD)).
  Mat extract_beta(const TorusCharacter& th) const {
    const std::uint32_t p = torus_->spec().p();
    const std::uint32_t M = torus_->value_order();
    std::vector<std::uint32_t> rhs(basis_.size());
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      const std::uint32_t v = torus_->value(th, basis_points_[i]);
      check(v % (M / p) == 0, "θ on (T^l) is not p-torsion");
      rhs[i] = v / (M / p);
    }
    const auto sol = detail::solve_mod_p(pairing_, rhs, p);
    check(sol.has_value(), "trace pairing on t_l is degenerate");
    Mat beta;
    const Field& f = spec_l_.field();
    for (std::size_t j = 0; j < basis_.size(); ++j) {
      const Mat scaled = scale_prime(basis_[j], (*sol)[j]);
      beta = spec_l_.add(beta, scaled);
    }
    (void)f;
    return beta;
  }

  // Stabilizer condition C_{G_l^{F'}}(β) = T_l^{F'}, by a centralizer scan.
  bool centralizer_is_torus(const Mat& beta) const {
    const auto key = spec_l_.key(beta);
    auto it = centralizer_cache_.find(key);
    if (it != centralizer_cache_.end()) return it->second;
    const GroupTable& Gl = level_table();
    std::size_t count = 0, diagonal = 0;
    for (std::size_t i = 0; i < Gl.size(); ++i) {
      const Mat g = Gl.element(i);
      if (spec_l_.mul(g, beta) == spec_l_.mul(beta, g)) {
        ++count;
        if (spec_l_.is_diagonal(g)) ++diagonal;
      }
    }
    // T_l ⊆ C(β) always, since β is diagonal
    const bool result = count == diagonal && diagonal == level_torus_order();
    centralizer_cache_.emplace(key, result);
    return result;
  }

  GenericityReport genericity(const TorusCharacter& th) const {
    GenericityReport rep;
    rep.regular = torus_->is_regular(th);
    rep.general_position = torus_->is_general_position(th);
    rep.stabilizer = centralizer_is_torus(extract_beta(th));
    return rep;
  }

  const GroupTable& level_table() const {
    if (!level_table_) level_table_ = std::make_unique<GroupTable>(spec_l_);
    return *level_table_;
  }
  std::size_t level_torus_order() const {
    std::size_t c = 0;
    const GroupTable& Gl = level_table();
    for (std::size_t i = 0; i < Gl.size(); ++i)
      if (spec_l_.is_diagonal(Gl.element(i))) ++c;
    return c;
  }

  // Characters of T with trivial restriction to the Teichmüller lift of
  // T_1^{F'} and the given β.
  std::optional<TorusCharacter> principal_character(const Mat& beta) const {
    const auto teich = torus_->teichmuller_subgroup();
    for (std::size_t idx = 0; idx < torus_->character_count(); ++idx) {
      const TorusCharacter th = torus_->character(idx);
      bool trivial = true;
      for (auto t : teich)
        if (torus_->value(th, t) != 0) {
          trivial = false;
          break;
        }
      if (trivial && extract_beta(th) == beta) return th;
    }
    return std::nullopt;
  }

 private:
  Mat scale_prime(const Mat& A, std::uint32_t k) const {
    Mat out;
    const Field& f = spec_l_.field();
    const Field::Elem c = f.from_int(k);
    const std::size_t len = static_cast<std::size_t>(spec_l_.n() * spec_l_.n() * spec_l_.r());
    for (std::size_t t = 0; t < len; ++t) out.a[t] = f.mul(c, A.a[t]);
    return out;
  }

  const Torus* torus_;
  PsiSpec psi_;
  GroupSpec spec_l_;
  std::vector<Mat> basis_;
  std::vector<std::size_t> basis_points_;
  std::vector<std::vector<std::uint32_t>> pairing_;  // [D_i][β_j]
  mutable std::unique_ptr<GroupTable> level_table_;
  mutable std::map<std::uint64_t, bool> centralizer_cache_;
};

}  // namespace hdl
