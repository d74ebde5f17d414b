#include "lcp/nn/grad_check.h"

#include <algorithm>
#include <cmath>

namespace lcp::nn {

double relative_error(double analytic, double numeric) {
  const double scale =
      std::max({std::abs(analytic), std::abs(numeric), kGradCheckFloor});
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport grad_check(std::span<ParamBlock> params,
                           const std::function<double()>& loss, double eps,
                           double tol) {
  GradCheckReport report;
  report.tolerance = tol;
  for (ParamBlock& block : params) {
    require_same_shape(block.value, block.grad, block.name.c_str());
    double* value = block.value.data();
    const double* grad = block.grad.data();
    for (std::size_t k = 0; k < block.value.size(); ++k) {
      const double saved = value[k];
      value[k] = saved + eps;
      const double plus = loss();
      value[k] = saved - eps;
      const double minus = loss();
      value[k] = saved;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double rel = relative_error(grad[k], numeric);
      report.max_abs_error =
          std::max(report.max_abs_error, std::abs(grad[k] - numeric));
      ++report.checked;
      const double score = std::isnan(rel) ? INFINITY : rel;
      if (report.checked == 1 || score > report.max_rel_error) {
        report.max_rel_error = score;
        report.worst_block = block.name;
        report.worst_index = k;
        report.worst_analytic = grad[k];
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = report.max_rel_error < tol;
  return report;
}

}  // namespace lcp::nn
