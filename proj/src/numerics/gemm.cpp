// SPDX-License-Identifier: Apache-2.0
#include "glint/numerics/gemm.hpp"

#include <Eigen/Core>

namespace glint::num {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

template <typename L, typename R>
void store(MutMap& out, const L& lhs, const R& rhs, bool accumulate) {
  if (accumulate) {
    out.noalias() += lhs * rhs;
  } else {
    out.noalias() = lhs * rhs;
  }
}

}  // namespace

void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t p,
          std::size_t n, bool trans_a, bool trans_b, bool accumulate) {
  const auto em = static_cast<Eigen::Index>(m);
  const auto ep = static_cast<Eigen::Index>(p);
  const auto en = static_cast<Eigen::Index>(n);
  MutMap out(c, em, en);
  if (m == 0 || n == 0) return;
  if (p == 0) {
    if (!accumulate) out.setZero();
    return;
  }
  ConstMap ma(a, trans_a ? ep : em, trans_a ? em : ep);
  ConstMap mb(b, trans_b ? en : ep, trans_b ? ep : en);
  if (trans_a && trans_b) {
    store(out, ma.transpose(), mb.transpose(), accumulate);
  } else if (trans_a) {
    store(out, ma.transpose(), mb, accumulate);
  } else if (trans_b) {
    store(out, ma, mb.transpose(), accumulate);
  } else {
    store(out, ma, mb, accumulate);
  }
}

}  // namespace glint::num
