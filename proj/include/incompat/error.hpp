// Copyright 2026 The incompat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <stdexcept>
#include <string>

namespace incompat {

/// Input dimensions do not line up (tensor factors, channel vs observable, ...).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A value violates a documented precondition (non-Hermitian, t out of range, ...).
class ValueError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Outcome labels of two objects that must agree do not.
class LabelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The requested object would exceed a configured size cap.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline std::atomic<double>& hermitian_tol_storage() {
  static std::atomic<double> tol{1e-10};
  return tol;
}
inline std::atomic<long>& dim_cap_storage() {
  static std::atomic<long> cap{4096};
  return cap;
}
}  // namespace detail

/// Global Hermiticity / PSD tolerance used by every validity check.
inline double hermitian_tolerance() { return detail::hermitian_tol_storage().load(); }
inline void set_hermitian_tolerance(double tol) {
  if (!(tol > 0)) throw ValueError("hermitian tolerance must be positive");
  detail::hermitian_tol_storage().store(tol);
}

/// Largest matrix dimension the library will materialize (tensor powers,
/// symmetric projectors, Clifford representations).
inline long dimension_cap() { return detail::dim_cap_storage().load(); }
inline void set_dimension_cap(long cap) {
  if (cap < 1) throw ValueError("dimension cap must be positive");
  detail::dim_cap_storage().store(cap);
}

}  // namespace incompat
