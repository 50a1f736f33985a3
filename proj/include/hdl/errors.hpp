#pragma once

#include <stdexcept>
#include <string>

namespace hdl {

// Bad parameters or an operation applied outside its domain (odd level for
// radical queries, non-unit inversion, non-prime characteristic, ...).
class domain_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A desk-scale size cap was hit (field size, group order, key space).
class cap_exceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internal cross-check failed. This signals a bug, never bad input.
class verification_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void check(bool ok, const std::string& what) {
  if (!ok) throw verification_error(what);
}

}  // namespace hdl
