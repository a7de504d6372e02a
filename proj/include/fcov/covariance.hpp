#pragma once

#include "fcov/basis.hpp"
#include "fcov/kernel.hpp"

namespace fcov {

// Removes the per-(series, coefficient) time mean. Requires n >= 2.
FunctionalPanel center(const FunctionalPanel& panel);

// Sample covariance matrix function of a centered panel:
// block (i, j) = n^-1 sum_t a_ti a_tj^T. Divisor n, not n-1.
KernelMatrix sample_cov(const FunctionalPanel& panel);

}  // namespace fcov
