#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rankrl/linalg.hpp"

namespace rankrl {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst_tensor;
    int worst_row = 0;
    int worst_col = 0;
    double analytic_at_worst = 0.0;
    double numeric_at_worst = 0.0;
};

// Checks an analytic gradient against central finite differences. Every
// entry of every parameter is perturbed by ±h and the loss recomputed, so
// `loss` must be a deterministic function of the referenced tensors (which
// are restored exactly before returning). Relative error per entry is
// |a - n| / max(floor, |a| + |n|).
GradCheckResult finite_difference_check(const std::vector<TensorRef>& params,
                                        const std::vector<ConstTensorRef>& analytic,
                                        const std::function<double()>& loss, double h = 1e-5,
                                        double floor = 1e-8);

}  // namespace rankrl
