// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

namespace glint::num {

/// C (m×n) = op(A) · op(B), or C += ... when `accumulate`.
/// A is stored row-major as m×p (or p×m when trans_a); likewise B as p×n
/// (or n×p when trans_b). All buffers are row-major and must not alias C.
void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t p,
          std::size_t n, bool trans_a, bool trans_b, bool accumulate);

}  // namespace glint::num
