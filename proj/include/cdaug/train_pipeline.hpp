#pragma once

#include "cdaug/data.hpp"
#include "cdaug/model.hpp"
#include "cdaug/rng.hpp"
#include "cdaug/transforms.hpp"
#include "cdaug/types.hpp"

namespace cdaug {

// Competitive-augmentation training: the transform set is generated once,
// frozen into the artifact, and every epoch trains on the originals plus one
// fresh variant per original drawn from that set.

/// Admissibility condition on the variant budget: n1 may not exceed the
/// average number of samples per class, floor(|dataset| / K). Throws
/// TooManyVariants naming the computed limit.
void check_condition_ii(const Dataset& dataset, std::size_t n1);

/// Draws n1 specs without replacement from `set`, pairs every original
/// window with one of them (uniformly), and appends the transformed variant
/// with the original's label. Originals precede variants, both in stable
/// order; the result has exactly 2*|train| windows. n1 = 0 returns the input
/// unchanged. `stats` supplies the per-channel sigma^2 for jitter.
Dataset augment_epoch(const Dataset& train, const std::vector<TransformSpec>& set,
                      std::size_t n1, const NormStats& stats, SeededRng& rng);

struct TrainOutcome {
    ModelArtifact artifact;
    TrainLog log;
};

/// Full training pipeline: norm stats from the train split only, transform
/// set generated and frozen, per-epoch augmentation via augment_epoch (when
/// cfg.augment), z-scored inputs, model fit with early stopping. The
/// returned artifact carries everything prediction needs.
TrainOutcome train_competitive(const Dataset& train, const Dataset& val,
                               const CompetitiveConfig& cfg, SeededRng& rng);

} // namespace cdaug
