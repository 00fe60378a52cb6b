#include "editnts/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace editnts {

namespace {

double total_loss(const Model<double>& model, std::span<const Example> examples,
                  const LabelStats& weights) {
  double sum = 0.0;
  for (const auto& ex : examples) {
    ad::Tape<double> tape(model.params());
    sum += tape.scalar(model.loss(tape, ex, weights));
  }
  return sum;
}

}  // namespace

std::vector<TensorCheck> gradient_check(Model<double>& model, std::span<const Example> examples,
                                        const LabelStats& weights, double step) {
  ad::Gradients<double> grads(model.params());
  for (const auto& ex : examples) {
    ad::Tape<double> tape(model.params());
    tape.backward(model.loss(tape, ex, weights), grads);
  }

  std::vector<TensorCheck> out;
  auto& params = model.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& value = params.at(i).value;
    const auto& analytic = grads.at(i);
    ad::Mat<double> numeric(value.rows(), value.cols());
    for (ad::Index r = 0; r < value.rows(); ++r) {
      for (ad::Index c = 0; c < value.cols(); ++c) {
        const double saved = value(r, c);
        value(r, c) = saved + step;
        const double up = total_loss(model, examples, weights);
        value(r, c) = saved - step;
        const double down = total_loss(model, examples, weights);
        value(r, c) = saved;
        numeric(r, c) = (up - down) / (2 * step);
      }
    }
    TensorCheck check;
    check.name = params.at(i).name;
    check.size = static_cast<std::size_t>(value.size());
    const double denom = analytic.norm() + numeric.norm();
    check.relative_error = denom > 0 ? (analytic - numeric).norm() / denom : 0.0;
    check.max_abs_error = (analytic - numeric).cwiseAbs().maxCoeff();
    out.push_back(check);
  }
  return out;
}

double max_relative_error(std::span<const TensorCheck> checks) {
  double worst = 0.0;
  for (const auto& c : checks) worst = std::max(worst, c.relative_error);
  return worst;
}

}  // namespace editnts
