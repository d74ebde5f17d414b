#ifndef LCP_NN_GRAD_CHECK_H_
#define LCP_NN_GRAD_CHECK_H_

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "lcp/nn/optimizer.h"

namespace lcp::nn {

// Denominator floor of the relative error, so entries where both gradients
// are essentially zero do not dominate the report.
inline constexpr double kGradCheckFloor = 1e-6;

struct GradCheckReport {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::string worst_block;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  double tolerance = 0.0;
  bool passed = true;
};

// |a - n| / max(|a|, |n|, kGradCheckFloor).
double relative_error(double analytic, double numeric);

// Compares the analytic gradients already stored in params[*].grad against
// central differences (loss(p + eps) - loss(p - eps)) / (2 eps) for every
// parameter entry. Parameter values are restored afterwards.
GradCheckReport grad_check(std::span<ParamBlock> params,
                           const std::function<double()>& loss, double eps,
                           double tol);

}  // namespace lcp::nn

#endif  // LCP_NN_GRAD_CHECK_H_
