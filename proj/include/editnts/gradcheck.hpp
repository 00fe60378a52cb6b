#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "editnts/model.hpp"
#include "editnts/oracle.hpp"

namespace editnts {

struct TensorCheck {
  std::string name;
  std::size_t size = 0;
  // ||analytic - numeric|| / (||analytic|| + ||numeric||), 0 when both vanish.
  double relative_error = 0.0;
  double max_abs_error = 0.0;
};

/// Compares backprop gradients of the weighted loss (dropout off) against
/// central finite differences, tensor by tensor, summed over `examples`.
std::vector<TensorCheck> gradient_check(Model<double>& model, std::span<const Example> examples,
                                        const LabelStats& weights, double step = 1e-5);

double max_relative_error(std::span<const TensorCheck> checks);

}  // namespace editnts
