#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "editnts/autodiff.hpp"
#include "editnts/model.hpp"
#include "editnts/oracle.hpp"

namespace editnts {

struct TrainConfig {
  double learning_rate = 1e-3;
  double weight_decay = 1e-6;  // decoupled, applied as p *= 1 - lr * wd
  double clip_norm = 1.0;      // global L2 norm; <= 0 disables clipping
  std::size_t batch_size = 64;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t threads = 1;

  void check() const;
};

template <typename Real>
class AdamW {
 public:
  AdamW(const ad::ParameterSet<Real>& params, const TrainConfig& config);

  void step(ad::ParameterSet<Real>& params, const ad::Gradients<Real>& grads);

  std::size_t steps() const noexcept { return steps_; }
  ad::Gradients<Real>& first_moment() { return m_; }
  ad::Gradients<Real>& second_moment() { return v_; }
  void set_steps(std::size_t n) { steps_ = n; }

 private:
  TrainConfig config_;
  ad::Gradients<Real> m_, v_;
  std::size_t steps_ = 0;
};

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;          // mean weighted loss per sentence, with dropout
  double train_accuracy = 0;  // teacher-forced, no dropout
  double dev_accuracy = 0;    // teacher-forced, no dropout; NaN without a dev set
  std::string timestamp;
};

/// Fraction of gold labels predicted by teacher-forced argmax.
template <typename Real>
double edit_accuracy(const Model<Real>& model, std::span<const Example> examples);

/// Sum of gradients of the weighted loss over `batch` (no scaling, no clipping).
/// Returns the summed loss.
template <typename Real>
double accumulate_gradients(const Model<Real>& model, std::span<const Example* const> batch,
                            const LabelStats& weights, ad::Gradients<Real>& grads,
                            std::span<const std::uint64_t> dropout_seeds, std::size_t threads = 1);

template <typename Real>
class Trainer {
 public:
  Trainer(Model<Real>& model, TrainConfig config, LabelStats weights);

  /// One pass over `train` in a seed-determined order, then accuracy on both
  /// sets. Throws NumericError on a non-finite loss or gradient.
  EpochLog run_epoch(std::span<const Example> train, std::span<const Example> dev = {});

  std::size_t epoch() const noexcept { return epoch_; }
  void set_epoch(std::size_t e) { epoch_ = e; }
  AdamW<Real>& optimizer() { return optimizer_; }
  const TrainConfig& config() const { return config_; }

 private:
  Model<Real>& model_;
  TrainConfig config_;
  LabelStats weights_;
  AdamW<Real> optimizer_;
  std::size_t epoch_ = 0;
};

extern template class AdamW<float>;
extern template class AdamW<double>;
extern template class Trainer<float>;
extern template class Trainer<double>;

std::string utc_timestamp();

/// Thread count from EDITNTS_THREADS, default 1.
std::size_t threads_from_env();

}  // namespace editnts
