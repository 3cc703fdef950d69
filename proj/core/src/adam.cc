#include "gtrans/adam.h"

#include <cmath>

#include "gtrans/errors.h"

namespace gtrans {

AdamState::AdamState(std::size_t size, AdamOptions options)
    : options_(options), m_(size, 0.0), v_(size, 0.0) {}

void AdamState::Direction(std::span<const double> grad, std::span<double> direction) {
  if (grad.size() != m_.size() || direction.size() != m_.size()) {
    throw DimensionError("adam: gradient size does not match state");
  }
  ++steps_;
  const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < m_.size(); ++i) {
    m_[i] = options_.beta1 * m_[i] + (1.0 - options_.beta1) * grad[i];
    v_[i] = options_.beta2 * v_[i] + (1.0 - options_.beta2) * grad[i] * grad[i];
    direction[i] = (m_[i] / c1) / (std::sqrt(v_[i] / c2) + options_.eps);
  }
}

void AdamState::Step(std::span<double> param, std::span<const double> grad, double lr) {
  std::vector<double> dir(m_.size());
  Direction(grad, dir);
  if (param.size() != dir.size()) throw DimensionError("adam: parameter size mismatch");
  for (std::size_t i = 0; i < dir.size(); ++i) param[i] -= lr * dir[i];
}

}  // namespace gtrans
