#pragma once

#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "hdl/clfun.hpp"

namespace hdl::testing {

inline Perm coxeter_perm(int n) { return perm_from_cycle_type({n}); }
inline Perm identity_perm(int n) {
  Perm id(static_cast<std::size_t>(n));
  std::iota(id.begin(), id.end(), 0);
  return id;
}

inline GroupSpec coxeter(std::uint32_t p, unsigned m, int n, int r) { return GroupSpec(p, m, n, r, coxeter_perm(n)); }
inline GroupSpec split(std::uint32_t p, unsigned m, int n, int r) { return GroupSpec(p, m, n, r, identity_perm(n)); }
inline GroupSpec typed(std::uint32_t p, unsigned m, int n, int r, const std::vector<int>& cycles) {
  return GroupSpec(p, m, n, r, perm_from_cycle_type(cycles));
}

// Group tables shared across tests of one binary.
inline GroupTablePtr table(const GroupSpec& spec) {
  static std::map<std::string, GroupTablePtr> cache;
  auto& slot = cache[spec.cache_key()];
  if (!slot) slot = std::make_shared<const GroupTable>(spec);
  return slot;
}

// Settings shared across tests of one binary, keyed by spec and ψ scale.
inline const TorusSetting& setting(const GroupSpec& spec, std::uint32_t psi_scale = 1) {
  static std::map<std::pair<std::string, std::uint32_t>, std::unique_ptr<TorusSetting>> cache;
  auto& slot = cache[{spec.cache_key(), psi_scale}];
  if (!slot) slot = std::make_unique<TorusSetting>(table(spec), PsiSpec{psi_scale});
  return *slot;
}

// Residue determinant by the Leibniz formula (n ≤ 3).
inline Field::Elem residue_det(const GroupSpec& s, const Mat& A) {
  const Field& f = s.field();
  auto e = [&](int i, int j) { return s.coef(A, i, j, 0); };
  switch (s.n()) {
    case 1:
      return e(0, 0);
    case 2:
      return f.sub(f.mul(e(0, 0), e(1, 1)), f.mul(e(0, 1), e(1, 0)));
    default: {
      Field::Elem acc = 0;
      const int perms[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {0, 2, 1}, {2, 1, 0}, {1, 0, 2}};
      for (int t = 0; t < 6; ++t) {
        Field::Elem term = 1;
        for (int i = 0; i < 3; ++i) term = f.mul(term, e(i, perms[t][i]));
        acc = t < 3 ? f.add(acc, term) : f.sub(acc, term);
      }
      return acc;
    }
  }
}

// Exponent of a linear character value as a complex number.
inline std::complex<double> root(std::uint32_t M, std::uint64_t e) { return detail::root_value(M, e); }

}  // namespace hdl::testing
