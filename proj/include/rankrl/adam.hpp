#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rankrl/linalg.hpp"

namespace rankrl {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Adam with bias correction. Moment buffers are allocated on the first step
// and keyed by tensor name, so the same parameter list (same names, same
// shapes, same order) must be passed on every call.
class AdamOptimizer {
  public:
    explicit AdamOptimizer(AdamConfig config) : config_(config) {}

    // Applies one update in place. `grads` must parallel `params`; throws if
    // a gradient is non-finite (naming the offending tensor) or if the
    // parameter list changed between calls.
    void step(const std::vector<TensorRef>& params, const std::vector<ConstTensorRef>& grads);

    std::int64_t step_count() const { return step_count_; }
    const AdamConfig& config() const { return config_; }

  private:
    AdamConfig config_;
    std::int64_t step_count_ = 0;
    std::vector<std::string> names_;
    std::vector<Matrix> first_moment_;
    std::vector<Matrix> second_moment_;
};

}  // namespace rankrl
