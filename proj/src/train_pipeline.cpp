#include "cdaug/train_pipeline.hpp"

#include <string>

namespace cdaug {

void check_condition_ii(const Dataset& dataset, std::size_t n1) {
    if (dataset.class_count() < 2)
        raise(ErrorCode::BadConfig, "dataset must declare at least 2 classes");
    const std::size_t limit = dataset.size() / dataset.class_count();
    if (n1 > limit)
        raise(ErrorCode::TooManyVariants,
              "n1=" + std::to_string(n1) + " exceeds the average per-class sample count; limit " +
                  std::to_string(limit) + " (" + std::to_string(dataset.size()) + " windows / " +
                  std::to_string(dataset.class_count()) + " classes)");
}

Dataset augment_epoch(const Dataset& train, const std::vector<TransformSpec>& set,
                      std::size_t n1, const NormStats& stats, SeededRng& rng) {
    if (n1 == 0) return train;
    if (set.empty()) raise(ErrorCode::BadConfig, "transform set must be nonempty");
    if (n1 > set.size())
        raise(ErrorCode::TooManyVariants, "n1=" + std::to_string(n1) +
                                              " exceeds the transform set size " +
                                              std::to_string(set.size()));
    check_condition_ii(train, n1);

    const std::vector<std::size_t> subset = rng.sample_without_replacement(set.size(), n1);

    Dataset out;
    out.class_names = train.class_names;
    out.windows.reserve(2 * train.size());
    out.windows = train.windows;
    for (const LabeledWindow& lw : train.windows) {
        const TransformSpec& spec = set[subset[rng.uniform_int(n1)]];
        LabeledWindow variant;
        variant.window = apply(spec, lw.window, stats, rng);
        variant.label = lw.label;
        variant.subject_id = lw.subject_id;
        out.windows.push_back(std::move(variant));
    }
    return out;
}

TrainOutcome train_competitive(const Dataset& train, const Dataset& val,
                               const CompetitiveConfig& cfg, SeededRng& rng) {
    validate_competitive_config(cfg);
    validate_dataset(train);
    validate_dataset(val);
    if (train.empty() || val.empty())
        raise(ErrorCode::EmptyDataset, "training needs nonempty train and val splits");
    if (cfg.augment) check_condition_ii(train, cfg.n1);

    // Everything the prediction side may use is derived from the train split
    // here, before any fitting: sigma^2 for jitter, and the frozen set.
    const NormStats stats = fit_norm_stats(train.windows);
    SeededRng set_rng = rng.split(0x5E7);
    const std::vector<TransformSpec> transform_set = generate_transform_set(
        cfg.set_cfg, cfg.transform_set_size, train.windows.front().window.channels(), set_rng);

    const auto normalize = [&stats](const Dataset& d) {
        Dataset out;
        out.class_names = d.class_names;
        out.windows.reserve(d.size());
        for (const LabeledWindow& lw : d.windows)
            out.windows.push_back({apply_norm(stats, lw.window), lw.label, lw.subject_id});
        return out;
    };

    const Dataset norm_train = normalize(train);
    const Dataset norm_val = normalize(val);

    Augmenter augmenter;
    if (cfg.augment) {
        const SeededRng base = rng.split(0xA06);
        augmenter = [&train, &transform_set, &stats, &normalize, base,
                     n1 = cfg.n1](std::size_t epoch) {
            SeededRng epoch_rng = base.split(epoch);
            return normalize(augment_epoch(train, transform_set, n1, stats, epoch_rng));
        };
    }

    FitResult fitted =
        fit(norm_train, norm_val, cfg.train, cfg.model_kind, cfg.mlp_hidden, augmenter);

    TrainOutcome outcome;
    outcome.artifact.model = std::move(fitted.model);
    outcome.artifact.norm_stats = stats;
    outcome.artifact.transform_set = transform_set;
    outcome.artifact.hyper = cfg;
    outcome.artifact.class_names = train.class_names;
    outcome.log = std::move(fitted.log);
    validate_artifact(outcome.artifact);
    return outcome;
}

} // namespace cdaug
