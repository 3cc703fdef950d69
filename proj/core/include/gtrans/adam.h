#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gtrans {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment state for one flat parameter block.
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(std::size_t size, AdamOptions options = {});

  // Folds `grad` into the moments and writes m_hat / (sqrt(v_hat) + eps).
  void Direction(std::span<const double> grad, std::span<double> direction);

  // param -= lr * Direction(grad)
  void Step(std::span<double> param, std::span<const double> grad, double lr);

  std::size_t size() const { return m_.size(); }
  long steps() const { return steps_; }

 private:
  AdamOptions options_;
  std::vector<double> m_;
  std::vector<double> v_;
  long steps_ = 0;
};

}  // namespace gtrans
