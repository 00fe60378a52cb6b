#include "editnts/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "editnts/errors.hpp"
#include "editnts/random.hpp"

namespace editnts {

void TrainConfig::check() const {
  if (!(learning_rate >= 0)) throw std::invalid_argument("learning rate must be >= 0");
  if (!(weight_decay >= 0)) throw std::invalid_argument("weight decay must be >= 0");
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1 && epsilon > 0)) {
    throw std::invalid_argument("bad Adam coefficients");
  }
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::size_t threads_from_env() {
  if (const char* s = std::getenv("EDITNTS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end != s && v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

// AdamW

template <typename Real>
AdamW<Real>::AdamW(const ad::ParameterSet<Real>& params, const TrainConfig& config)
    : config_(config), m_(params), v_(params) {}

template <typename Real>
void AdamW<Real>::step(ad::ParameterSet<Real>& params, const ad::Gradients<Real>& grads) {
  ++steps_;
  const Real b1 = static_cast<Real>(config_.beta1);
  const Real b2 = static_cast<Real>(config_.beta2);
  const Real lr = static_cast<Real>(config_.learning_rate);
  const Real eps = static_cast<Real>(config_.epsilon);
  const Real c1 = Real(1) - static_cast<Real>(std::pow(config_.beta1, static_cast<double>(steps_)));
  const Real c2 = Real(1) - static_cast<Real>(std::pow(config_.beta2, static_cast<double>(steps_)));
  const Real decay = Real(1) - lr * static_cast<Real>(config_.weight_decay);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params.at(i).value;
    const auto& g = grads.at(i);
    auto& m = m_.at(i);
    auto& v = v_.at(i);
    m = b1 * m + (Real(1) - b1) * g;
    v = b2 * v + (Real(1) - b2) * g.cwiseAbs2();
    if (lr == Real(0)) continue;
    p *= decay;
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
}

// Gradients

template <typename Real>
double accumulate_gradients(const Model<Real>& model, std::span<const Example* const> batch,
                            const LabelStats& weights, ad::Gradients<Real>& grads,
                            std::span<const std::uint64_t> dropout_seeds, std::size_t threads) {
  auto work = [&](std::size_t begin, std::size_t end, ad::Gradients<Real>& g) {
    double total = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      ad::Tape<Real> tape(model.params());
      std::mt19937_64 rng(dropout_seeds.empty() ? 0 : dropout_seeds[i]);
      auto loss = model.loss(tape, *batch[i], weights, dropout_seeds.empty() ? nullptr : &rng);
      total += static_cast<double>(tape.scalar(loss));
      tape.backward(loss, g);
    }
    return total;
  };
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(batch.size(), 1));
  if (threads == 1) return work(0, batch.size(), grads);

  // Contiguous chunks, reduced in chunk order so the result only depends on
  // the thread count.
  std::vector<ad::Gradients<Real>> partial(threads, ad::Gradients<Real>(model.params()));
  std::vector<double> losses(threads, 0.0);
  std::vector<std::thread> pool;
  const std::size_t chunk = (batch.size() + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(batch.size(), t * chunk);
    const std::size_t end = std::min(batch.size(), begin + chunk);
    pool.emplace_back([&, t, begin, end] { losses[t] = work(begin, end, partial[t]); });
  }
  for (auto& th : pool) th.join();
  double total = 0.0;
  for (std::size_t t = 0; t < threads; ++t) {
    grads += partial[t];
    total += losses[t];
  }
  return total;
}

template <typename Real>
double edit_accuracy(const Model<Real>& model, std::span<const Example> examples) {
  std::size_t right = 0, total = 0;
  for (const auto& ex : examples) {
    const auto pred = model.teacher_forced_predictions(ex);
    for (std::size_t t = 0; t < pred.size(); ++t) right += pred[t] == ex.labels[t] ? 1 : 0;
    total += pred.size();
  }
  return total ? static_cast<double>(right) / static_cast<double>(total)
               : std::numeric_limits<double>::quiet_NaN();
}

// Trainer

template <typename Real>
Trainer<Real>::Trainer(Model<Real>& model, TrainConfig config, LabelStats weights)
    : model_(model),
      config_(std::move(config)),
      weights_(std::move(weights)),
      optimizer_(model.params(), config_) {
  config_.check();
}

template <typename Real>
EpochLog Trainer<Real>::run_epoch(std::span<const Example> train, std::span<const Example> dev) {
  if (train.empty()) throw std::invalid_argument("empty training set");
  ++epoch_;
  const std::uint64_t epoch_seed = derive_seed(config_.seed, epoch_);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(derive_seed(epoch_seed, 0));
  shuffle(order.begin(), order.end(), shuffle_rng);

  ad::Gradients<Real> grads(model_.params());
  double epoch_loss = 0.0;
  for (std::size_t start = 0; start < order.size(); start += config_.batch_size) {
    const std::size_t end = std::min(order.size(), start + config_.batch_size);
    std::vector<const Example*> batch;
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = start; i < end; ++i) {
      batch.push_back(&train[order[i]]);
      seeds.push_back(derive_seed(epoch_seed, 1 + order[i]));
    }
    grads.zero();
    const double batch_loss =
        accumulate_gradients(model_, batch, weights_, grads, seeds, config_.threads);
    if (!std::isfinite(batch_loss) || !grads.all_finite()) {
      throw NumericError("non-finite loss or gradient in epoch " + std::to_string(epoch_) +
                         " at batch starting " + std::to_string(start));
    }
    epoch_loss += batch_loss;
    grads *= Real(1) / static_cast<Real>(batch.size());
    if (config_.clip_norm > 0) {
      const double norm = std::sqrt(static_cast<double>(grads.squared_norm()));
      if (norm > config_.clip_norm) grads *= static_cast<Real>(config_.clip_norm / norm);
    }
    optimizer_.step(model_.params(), grads);
  }

  EpochLog log;
  log.epoch = epoch_;
  log.loss = epoch_loss / static_cast<double>(train.size());
  log.train_accuracy = edit_accuracy(model_, train);
  log.dev_accuracy = dev.empty() ? std::numeric_limits<double>::quiet_NaN()
                                 : edit_accuracy(model_, dev);
  log.timestamp = utc_timestamp();
  return log;
}

template class AdamW<float>;
template class AdamW<double>;
template class Trainer<float>;
template class Trainer<double>;
template double edit_accuracy(const Model<float>&, std::span<const Example>);
template double edit_accuracy(const Model<double>&, std::span<const Example>);
template double accumulate_gradients(const Model<float>&, std::span<const Example* const>,
                                     const LabelStats&, ad::Gradients<float>&,
                                     std::span<const std::uint64_t>, std::size_t);
template double accumulate_gradients(const Model<double>&, std::span<const Example* const>,
                                     const LabelStats&, ad::Gradients<double>&,
                                     std::span<const std::uint64_t>, std::size_t);

}  // namespace editnts
