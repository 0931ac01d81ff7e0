#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cdaug/rng.hpp"
#include "cdaug/types.hpp"

namespace cdaug {

// Self-contained reference classifiers with a from-scratch minibatch-Adam
// trainer. No external ML runtime; gradients are verified against finite
// differences (gradient_check below, and in the test suite).

ReferenceModel make_softmax_linear(std::size_t channels, std::size_t timesteps,
                                   std::size_t classes);

/// One ReLU hidden layer, He-scaled gaussian init for both weight matrices.
ReferenceModel make_mlp(std::size_t channels, std::size_t timesteps, std::size_t classes,
                        std::size_t hidden, SeededRng& rng);

/// Softmax class probabilities for one window; deterministic, entries sum to
/// 1 within 1e-9. Throws ShapeMismatch when the window does not match the
/// model's input shape.
std::vector<double> predict_proba(const ReferenceModel& m, const Window& w);

/// Row-major [windows.size() x classes] probabilities into `out`.
void predict_proba_batch(const ReferenceModel& m, std::span<const Window* const> windows,
                         std::span<double> out);

/// argmax with ties resolved to the lowest class index.
int argmax_class(std::span<const double> probs);

int predict_class(const ReferenceModel& m, const Window& w);

/// -log(probs[label]), with the probability clamped to >= 1e-12 so the loss
/// stays finite.
double cross_entropy(std::span<const double> probs, int label);

/// Cosine-annealing learning rate with warm restarts, evaluated at an epoch
/// index. Periods start at cfg.cawr_period and grow by cfg.cawr_mult on each
/// restart. With use_cawr false this is the constant lr0.
double cawr_lr(std::size_t epoch, const TrainConfig& cfg);

/// The raw cosine schedule: lr_min + (lr0-lr_min)*(1+cos(pi*t/period))/2.
double cosine_lr(double t_cur, double period, double lr0, double lr_min);

struct TrainLogEntry {
    std::size_t epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    bool improved = false;
};

struct TrainLog {
    std::vector<TrainLogEntry> entries;
    std::size_t best_epoch = 0;
    std::size_t stopped_epoch = 0;
    bool early_stopped = false;
};

/// Line-oriented text: one row per epoch (epoch, lr, train loss, val loss,
/// improved flag) plus trailing summary comments.
std::string train_log_to_text(const TrainLog& log);

/// Called once per epoch to produce that epoch's training pool.
using Augmenter = std::function<Dataset(std::size_t epoch)>;

struct FitResult {
    ReferenceModel model;
    TrainLog log;
};

/// Minibatch Adam (beta1 0.9, beta2 0.999, eps 1e-8) over cross-entropy with
/// the cawr_lr schedule and early stopping on validation loss (patience
/// epochs without strict improvement). Returns the weights of the best
/// validation epoch. Deterministic given cfg.seed.
FitResult fit(const Dataset& train, const Dataset& val, const TrainConfig& cfg,
              ModelKind kind, std::size_t mlp_hidden = 128, const Augmenter& augmenter = {});

/// Max relative error between analytic gradients and central finite
/// differences over `coords` randomly sampled weight coordinates:
/// |ga - gfd| / max(|ga| + |gfd|, 1e-8).
double gradient_check(const ReferenceModel& m, const Dataset& batch, double epsilon = 1e-5,
                      std::size_t coords = 120, std::uint64_t seed = 1234);

} // namespace cdaug
