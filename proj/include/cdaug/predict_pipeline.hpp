#pragma once

#include <span>
#include <vector>

#include "cdaug/model.hpp"
#include "cdaug/rng.hpp"
#include "cdaug/types.hpp"

namespace cdaug {

// Test-time augmentation voting over the artifact's frozen transform set.

/// Majority vote over the base prediction plus all variant predictions.
/// Tie-break: the base class wins if it is among the leaders, otherwise the
/// lowest class index does.
int aggregate_votes(int base_class, std::span<const int> variant_classes,
                    std::size_t classes);

/// Condition-(i) membership test: a spec is admissible iff it is an exact
/// member of the artifact's frozen set, or an instance of a kind that set
/// contains with magnitude parameters inside the set's observed range
/// (jitter alpha, clip/segment ratios; positions and channel subsets are
/// free). keep_only is admissible when clip was trained, being its
/// keep-the-complement reading.
bool is_admissible_transform(const ModelArtifact& artifact, const TransformSpec& spec);

/// Throws ForeignTransform when is_admissible_transform fails.
void check_condition_i(const ModelArtifact& artifact, const TransformSpec& spec);

/// z-scores the raw window with the artifact's stats, then runs the model.
std::vector<double> artifact_predict_proba(const ModelArtifact& artifact, const Window& raw);
int artifact_predict_class(const ModelArtifact& artifact, const Window& raw);

/// Predicts on the original plus n2 variants drawn without replacement from
/// the frozen set, and aggregates by majority vote. Requires n2 <= the set
/// size and n2 <= hyper.n1 (prediction transforms stay a subset of
/// training's, in count as well as kind).
VoteRecord tta_predict(const ModelArtifact& artifact, const Window& w, std::size_t n2,
                       SeededRng& rng);

/// Same, with explicit variant specs; every spec passes check_condition_i.
VoteRecord tta_predict_with_specs(const ModelArtifact& artifact, const Window& w,
                                  std::span<const TransformSpec> specs, SeededRng& rng);

/// Batched TTA: model evaluations are grouped into 1+n2 whole-batch forward
/// passes. Each window's randomness comes from mix64(run_seed, index_offset +
/// position), so results do not depend on how a workload is partitioned into
/// batches as long as offsets line up.
std::vector<VoteRecord> tta_predict_batch(const ModelArtifact& artifact,
                                          std::span<const Window> windows, std::size_t n2,
                                          std::uint64_t run_seed, std::size_t index_offset = 0);

} // namespace cdaug
