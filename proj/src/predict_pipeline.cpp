#include "cdaug/predict_pipeline.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "cdaug/data.hpp"
#include "cdaug/transforms.hpp"

namespace cdaug {

int aggregate_votes(int base_class, std::span<const int> variant_classes,
                    std::size_t classes) {
    std::vector<long long> counts(classes, 0);
    const auto bump = [&](int cls) {
        if (cls < 0 || static_cast<std::size_t>(cls) >= classes)
            raise(ErrorCode::BadLabel, "vote class out of range");
        ++counts[static_cast<std::size_t>(cls)];
    };
    bump(base_class);
    for (int cls : variant_classes) bump(cls);

    const long long best = *std::max_element(counts.begin(), counts.end());
    if (counts[static_cast<std::size_t>(base_class)] == best) return base_class;
    for (std::size_t c = 0; c < classes; ++c)
        if (counts[c] == best) return static_cast<int>(c);
    return base_class;  // unreachable
}

namespace {

struct ObservedRanges {
    bool has_jitter = false, has_clip = false, has_segment_out = false, has_sensor_out = false;
    double alpha_lo = std::numeric_limits<double>::infinity(), alpha_hi = 0.0;
    double clip_lo = std::numeric_limits<double>::infinity(), clip_hi = 0.0;
    double seg_lo = std::numeric_limits<double>::infinity(), seg_hi = 0.0;
};

ObservedRanges observe(const std::vector<TransformSpec>& set) {
    ObservedRanges r;
    for (const TransformSpec& spec : set) {
        switch (spec.kind) {
            case TransformKind::Jitter:
                r.has_jitter = true;
                r.alpha_lo = std::min(r.alpha_lo, spec.alpha);
                r.alpha_hi = std::max(r.alpha_hi, spec.alpha);
                break;
            case TransformKind::Clip:
                r.has_clip = true;
                r.clip_lo = std::min(r.clip_lo, spec.ratio);
                r.clip_hi = std::max(r.clip_hi, spec.ratio);
                break;
            case TransformKind::SegmentOut:
                r.has_segment_out = true;
                r.seg_lo = std::min(r.seg_lo, spec.ratio);
                r.seg_hi = std::max(r.seg_hi, spec.ratio);
                break;
            case TransformKind::SensorOut:
                r.has_sensor_out = true;
                break;
            case TransformKind::KeepOnly:
                break;
        }
    }
    return r;
}

constexpr double kRangeEps = 1e-9;

bool within(double value, double lo, double hi) {
    return value >= lo - kRangeEps && value <= hi + kRangeEps;
}

} // namespace

bool is_admissible_transform(const ModelArtifact& artifact, const TransformSpec& spec) {
    for (const TransformSpec& member : artifact.transform_set)
        if (member == spec) return true;

    // Degenerate no-op transforms cannot move a sample off its training
    // distribution, so they are always admissible.
    if ((spec.kind == TransformKind::Jitter && spec.alpha == 0.0) ||
        ((spec.kind == TransformKind::Clip || spec.kind == TransformKind::SegmentOut) &&
         spec.ratio == 0.0))
        return true;

    const ObservedRanges r = observe(artifact.transform_set);
    switch (spec.kind) {
        case TransformKind::Jitter:
            return r.has_jitter && within(spec.alpha, r.alpha_lo, r.alpha_hi);
        case TransformKind::Clip:
            return r.has_clip && within(spec.ratio, r.clip_lo, r.clip_hi);
        case TransformKind::SegmentOut:
            return r.has_segment_out && within(spec.ratio, r.seg_lo, r.seg_hi);
        case TransformKind::SensorOut:
            return r.has_sensor_out;
        case TransformKind::KeepOnly:
            return r.has_clip;
    }
    return false;
}

void check_condition_i(const ModelArtifact& artifact, const TransformSpec& spec) {
    if (!is_admissible_transform(artifact, spec))
        raise(ErrorCode::ForeignTransform,
              std::string(transform_kind_name(spec.kind)) +
                  " spec is neither a member of the artifact's frozen transform set nor an "
                  "in-range instance of a trained kind");
}

std::vector<double> artifact_predict_proba(const ModelArtifact& artifact, const Window& raw) {
    return predict_proba(artifact.model, apply_norm(artifact.norm_stats, raw));
}

int artifact_predict_class(const ModelArtifact& artifact, const Window& raw) {
    const std::vector<double> probs = artifact_predict_proba(artifact, raw);
    return argmax_class(probs);
}

namespace {

void check_variant_budget(const ModelArtifact& artifact, std::size_t n2) {
    if (n2 > artifact.transform_set.size())
        raise(ErrorCode::TooManyVariants, "n2=" + std::to_string(n2) +
                                              " exceeds the frozen set size " +
                                              std::to_string(artifact.transform_set.size()));
    if (n2 > artifact.hyper.n1)
        raise(ErrorCode::TooManyVariants,
              "n2=" + std::to_string(n2) + " exceeds the training-side budget n1=" +
                  std::to_string(artifact.hyper.n1));
}

} // namespace

VoteRecord tta_predict_with_specs(const ModelArtifact& artifact, const Window& w,
                                  std::span<const TransformSpec> specs, SeededRng& rng) {
    for (const TransformSpec& spec : specs) check_condition_i(artifact, spec);

    VoteRecord record;
    record.base_probs = artifact_predict_proba(artifact, w);
    record.base_prediction = argmax_class(record.base_probs);

    std::vector<int> variant_classes;
    variant_classes.reserve(specs.size());
    for (const TransformSpec& spec : specs) {
        VoteRecord::VariantVote vote;
        vote.spec = spec;
        const Window variant = apply(spec, w, artifact.norm_stats, rng);
        vote.probs = artifact_predict_proba(artifact, variant);
        vote.predicted = argmax_class(vote.probs);
        variant_classes.push_back(vote.predicted);
        record.variant_votes.push_back(std::move(vote));
    }
    record.final_prediction = aggregate_votes(record.base_prediction, variant_classes,
                                              artifact.model.classes);
    return record;
}

VoteRecord tta_predict(const ModelArtifact& artifact, const Window& w, std::size_t n2,
                       SeededRng& rng) {
    check_variant_budget(artifact, n2);
    const std::vector<std::size_t> idx =
        rng.sample_without_replacement(artifact.transform_set.size(), n2);
    std::vector<TransformSpec> specs;
    specs.reserve(n2);
    for (std::size_t i : idx) specs.push_back(artifact.transform_set[i]);
    return tta_predict_with_specs(artifact, w, specs, rng);
}

std::vector<VoteRecord> tta_predict_batch(const ModelArtifact& artifact,
                                          std::span<const Window> windows, std::size_t n2,
                                          std::uint64_t run_seed, std::size_t index_offset) {
    check_variant_budget(artifact, n2);
    const std::size_t n = windows.size();
    const std::size_t classes = artifact.model.classes;
    std::vector<VoteRecord> records(n);
    if (n == 0) return records;

    // Per-window generators and spec draws, independent of batch layout.
    std::vector<SeededRng> rngs;
    rngs.reserve(n);
    std::vector<std::vector<std::size_t>> drawn(n);
    for (std::size_t i = 0; i < n; ++i) {
        rngs.emplace_back(mix64(run_seed, index_offset + i));
        drawn[i] = rngs[i].sample_without_replacement(artifact.transform_set.size(), n2);
    }

    // Pass 0: originals.
    std::vector<Window> normalized(n);
    std::vector<const Window*> batch(n);
    std::vector<double> probs(n * classes);
    for (std::size_t i = 0; i < n; ++i) {
        normalized[i] = apply_norm(artifact.norm_stats, windows[i]);
        batch[i] = &normalized[i];
    }
    predict_proba_batch(artifact.model, batch, probs);
    for (std::size_t i = 0; i < n; ++i) {
        records[i].base_probs.assign(probs.begin() + i * classes,
                                     probs.begin() + (i + 1) * classes);
        records[i].base_prediction = argmax_class(records[i].base_probs);
    }

    // Passes 1..n2: the j-th drawn variant of every window.
    std::vector<Window> variants(n);
    for (std::size_t j = 0; j < n2; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const TransformSpec& spec = artifact.transform_set[drawn[i][j]];
            variants[i] = apply_norm(artifact.norm_stats,
                                     apply(spec, windows[i], artifact.norm_stats, rngs[i]));
            batch[i] = &variants[i];
        }
        predict_proba_batch(artifact.model, batch, probs);
        for (std::size_t i = 0; i < n; ++i) {
            VoteRecord::VariantVote vote;
            vote.spec = artifact.transform_set[drawn[i][j]];
            vote.probs.assign(probs.begin() + i * classes, probs.begin() + (i + 1) * classes);
            vote.predicted = argmax_class(vote.probs);
            records[i].variant_votes.push_back(std::move(vote));
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        std::vector<int> variant_classes;
        variant_classes.reserve(n2);
        for (const auto& vote : records[i].variant_votes)
            variant_classes.push_back(vote.predicted);
        records[i].final_prediction =
            aggregate_votes(records[i].base_prediction, variant_classes, classes);
    }
    return records;
}

} // namespace cdaug
