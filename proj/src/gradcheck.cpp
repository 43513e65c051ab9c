#include "rankrl/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rankrl {

GradCheckResult finite_difference_check(const std::vector<TensorRef>& params,
                                        const std::vector<ConstTensorRef>& analytic,
                                        const std::function<double()>& loss, double h,
                                        double floor) {
    if (params.size() != analytic.size())
        throw std::invalid_argument("gradient check: params/analytic size mismatch");

    GradCheckResult result;
    for (std::size_t i = 0; i < params.size(); ++i) {
        Matrix& theta = *params[i].value;
        const Matrix& grad = *analytic[i].value;
        if (grad.rows() != theta.rows() || grad.cols() != theta.cols())
            throw std::invalid_argument("gradient check: shape mismatch for " + params[i].name);

        for (Eigen::Index r = 0; r < theta.rows(); ++r) {
            for (Eigen::Index c = 0; c < theta.cols(); ++c) {
                const double saved = theta(r, c);
                theta(r, c) = saved + h;
                const double up = loss();
                theta(r, c) = saved - h;
                const double down = loss();
                theta(r, c) = saved;

                const double numeric = (up - down) / (2.0 * h);
                const double a = grad(r, c);
                const double rel =
                    std::abs(a - numeric) / std::max(floor, std::abs(a) + std::abs(numeric));
                if (rel > result.max_rel_error) {
                    result.max_rel_error = rel;
                    result.worst_tensor = params[i].name;
                    result.worst_row = static_cast<int>(r);
                    result.worst_col = static_cast<int>(c);
                    result.analytic_at_worst = a;
                    result.numeric_at_worst = numeric;
                }
            }
        }
    }
    return result;
}

}  // namespace rankrl
