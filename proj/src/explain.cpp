#include "cdaug/explain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cdaug/data.hpp"
#include "cdaug/predict_pipeline.hpp"
#include "cdaug/transforms.hpp"

namespace cdaug {

namespace {

// Jittered grid over [0, t - len] whose consecutive starts never drift more
// than `len` apart: step <= len/2 and jitter <= (len - step)/2, endpoints
// pinned. Every timestep is therefore covered once per grid.
std::vector<std::size_t> probe_starts(std::size_t t, std::size_t len, SeededRng& rng) {
    const std::size_t last = t - len;
    if (last == 0) return {0};
    const std::size_t step = std::max<std::size_t>(1, len / 2);
    const std::size_t jitter = len > step ? (len - step) / 2 : 0;

    std::vector<std::size_t> starts;
    starts.push_back(0);
    for (std::size_t g = step; g < last; g += step) {
        std::size_t s = g;
        if (jitter > 0) {
            const std::size_t offset = rng.uniform_int(2 * jitter + 1);
            s = g + offset >= jitter ? g + offset - jitter : 0;
            s = std::min(s, last);
        }
        starts.push_back(s);
    }
    starts.push_back(last);
    return starts;
}

// The spec carries the exact (possibly clamped) ratio so admissibility range
// checks see the value itself, not a length-quantized copy. The grid's tail
// probe uses the exact complement start so start_frac + ratio never exceeds
// 1 even when the ratio was clamped upward.
TransformSpec occlusion_spec(TransformKind kind, std::size_t start, std::size_t last,
                             double ratio, std::size_t t, std::size_t channels) {
    TransformSpec spec;
    spec.kind = kind;
    spec.start_frac = start == last ? 1.0 - ratio
                                    : static_cast<double>(start) / static_cast<double>(t);
    spec.ratio = ratio;
    if (kind == TransformKind::SegmentOut) {
        spec.channels.resize(channels);
        for (std::size_t c = 0; c < channels; ++c) spec.channels[c] = c;
    }
    return spec;
}

double clamp_into(double value, double lo, double hi) {
    return std::min(std::max(value, lo), hi);
}

// Magnitude ranges observed in the frozen set; probe parameters are clamped
// into these so explanations stay within what the model trained on.
struct TrainedRanges {
    double seg_lo = 0.0, seg_hi = 0.0;
    double clip_lo = 0.0, clip_hi = 0.0;
    double alpha_lo = 0.0, alpha_hi = 0.0;
    bool has_segment_out = false, has_clip = false, has_jitter = false,
         has_sensor_out = false;
};

TrainedRanges trained_ranges(const ModelArtifact& artifact) {
    TrainedRanges r;
    bool seg_init = false, clip_init = false, alpha_init = false;
    for (const TransformSpec& spec : artifact.transform_set) {
        if (spec.kind == TransformKind::SegmentOut) {
            r.has_segment_out = true;
            r.seg_lo = seg_init ? std::min(r.seg_lo, spec.ratio) : spec.ratio;
            r.seg_hi = seg_init ? std::max(r.seg_hi, spec.ratio) : spec.ratio;
            seg_init = true;
        } else if (spec.kind == TransformKind::Clip) {
            r.has_clip = true;
            r.clip_lo = clip_init ? std::min(r.clip_lo, spec.ratio) : spec.ratio;
            r.clip_hi = clip_init ? std::max(r.clip_hi, spec.ratio) : spec.ratio;
            clip_init = true;
        } else if (spec.kind == TransformKind::Jitter) {
            r.has_jitter = true;
            r.alpha_lo = alpha_init ? std::min(r.alpha_lo, spec.alpha) : spec.alpha;
            r.alpha_hi = alpha_init ? std::max(r.alpha_hi, spec.alpha) : spec.alpha;
            alpha_init = true;
        } else if (spec.kind == TransformKind::SensorOut) {
            r.has_sensor_out = true;
        }
    }
    return r;
}

} // namespace

OcclusionOutcome run_occlusion_probes(const ModelArtifact& artifact, const Window& w,
                                      std::size_t n_probes, double seg_ratio, SeededRng& rng,
                                      bool include_clip) {
    if (n_probes == 0) raise(ErrorCode::BadConfig, "need at least one occlusion probe");
    const std::size_t t = w.timesteps();

    // Per-kind probe ratios, each clamped into that kind's trained range;
    // kinds whose ratio quantizes to an empty segment at this window length
    // cannot probe anything and are skipped.
    const TrainedRanges ranges = trained_ranges(artifact);
    struct KindProbe {
        TransformKind kind;
        double ratio;
        std::size_t len;
    };
    std::vector<KindProbe> kinds;
    const auto add_kind = [&](TransformKind kind, double lo, double hi) {
        const double ratio = clamp_into(seg_ratio, lo, hi);
        const std::size_t len = segment_bounds(0.0, ratio, t).second;
        if (len > 0) kinds.push_back({kind, ratio, len});
    };
    if (ranges.has_segment_out) add_kind(TransformKind::SegmentOut, ranges.seg_lo, ranges.seg_hi);
    if (include_clip && ranges.has_clip)
        add_kind(TransformKind::Clip, ranges.clip_lo, ranges.clip_hi);
    if (kinds.empty())
        raise(ErrorCode::ForeignTransform,
              "artifact's frozen set trained no usable occlusion kind (segment_out/clip)");

    OcclusionOutcome outcome;
    outcome.timesteps = t;
    outcome.baseline = artifact_predict_class(artifact, w);

    // Enough whole passes to reach the probe budget, never fewer than 5 so
    // per-timestep coverage is at least 5 (every pass covers every timestep).
    const std::size_t per_pass = probe_starts(t, kinds.front().len, rng).size();
    std::size_t passes = std::max<std::size_t>(5, (n_probes + per_pass - 1) / per_pass);
    passes = (passes + kinds.size() - 1) / kinds.size() * kinds.size();

    for (std::size_t p = 0; p < passes; ++p) {
        const KindProbe& kp = kinds[p % kinds.size()];
        for (std::size_t start : probe_starts(t, kp.len, rng)) {
            const TransformSpec spec =
                occlusion_spec(kp.kind, start, t - kp.len, kp.ratio, t, w.channels());
            check_condition_i(artifact, spec);
            // Bookkeep the segment exactly as the transform rounds it.
            const auto [s, len] = segment_bounds(spec.start_frac, spec.ratio, t);
            const Window masked = apply(spec, w, artifact.norm_stats, rng);
            const int pred = artifact_predict_class(artifact, masked);
            outcome.probes.push_back({s, len, kp.kind, pred != outcome.baseline});
        }
    }
    return outcome;
}

std::vector<double> necessity_from_probes(const OcclusionOutcome& outcome) {
    std::vector<long long> cover(outcome.timesteps, 0);
    std::vector<long long> flips(outcome.timesteps, 0);
    for (const OcclusionProbe& probe : outcome.probes) {
        for (std::size_t t = probe.start; t < probe.start + probe.len; ++t) {
            ++cover[t];
            if (probe.flipped) ++flips[t];
        }
    }
    std::vector<double> necessity(outcome.timesteps, 0.0);
    for (std::size_t t = 0; t < outcome.timesteps; ++t)
        if (cover[t] > 0)
            necessity[t] = static_cast<double>(flips[t]) / static_cast<double>(cover[t]);
    return necessity;
}

std::vector<bool> non_essential_mask(const OcclusionOutcome& outcome) {
    std::vector<bool> covered(outcome.timesteps, false);
    std::vector<bool> flipped(outcome.timesteps, false);
    for (const OcclusionProbe& probe : outcome.probes) {
        for (std::size_t t = probe.start; t < probe.start + probe.len; ++t) {
            covered[t] = true;
            if (probe.flipped) flipped[t] = true;
        }
    }
    std::vector<bool> mask(outcome.timesteps, false);
    for (std::size_t t = 0; t < outcome.timesteps; ++t)
        mask[t] = covered[t] && !flipped[t];
    return mask;
}

std::vector<double> necessity_map(const ModelArtifact& artifact, const Window& w,
                                  std::size_t n_probes, double seg_ratio, SeededRng& rng) {
    const OcclusionOutcome outcome =
        run_occlusion_probes(artifact, w, n_probes, seg_ratio, rng, /*include_clip=*/false);
    return necessity_from_probes(outcome);
}

namespace {

std::vector<std::pair<std::size_t, std::size_t>> scan_sufficient(
    const ModelArtifact& artifact, const Window& w, double min_ratio, SeededRng& rng,
    std::size_t& probes_used) {
    if (!(min_ratio > 0.0) || min_ratio > 1.0)
        raise(ErrorCode::BadRange, "min_ratio must lie in (0,1]");
    const std::size_t t = w.timesteps();
    const std::size_t len = std::max<std::size_t>(1, segment_bounds(0.0, min_ratio, t).second);
    const int baseline = artifact_predict_class(artifact, w);

    const std::size_t last = t - len;
    const std::size_t stride =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(t / 20.0 + 0.5)));
    std::vector<std::size_t> starts;
    starts.push_back(0);
    for (std::size_t g = stride; g < last; g += stride) {
        std::size_t s = g;
        const std::size_t jitter = stride / 4;
        if (jitter > 0) {
            const std::size_t offset = rng.uniform_int(2 * jitter + 1);
            s = g + offset >= jitter ? g + offset - jitter : 0;
            s = std::min(s, last);
        }
        starts.push_back(s);
    }
    if (last > 0) starts.push_back(last);

    std::vector<std::pair<std::size_t, std::size_t>> kept;
    probes_used = starts.size();
    for (std::size_t start : starts) {
        TransformSpec spec;
        spec.kind = TransformKind::KeepOnly;
        spec.start_frac = static_cast<double>(start) / static_cast<double>(t);
        spec.ratio = static_cast<double>(len) / static_cast<double>(t);
        check_condition_i(artifact, spec);
        const Window probe = apply(spec, w, artifact.norm_stats, rng);
        if (artifact_predict_class(artifact, probe) == baseline)
            kept.emplace_back(start, start + len);
    }

    std::sort(kept.begin(), kept.end());
    std::vector<std::pair<std::size_t, std::size_t>> merged;
    for (const auto& seg : kept) {
        if (!merged.empty() && seg.first <= merged.back().second)
            merged.back().second = std::max(merged.back().second, seg.second);
        else
            merged.push_back(seg);
    }
    return merged;
}

} // namespace

std::vector<std::pair<std::size_t, std::size_t>> sufficient_segments(
    const ModelArtifact& artifact, const Window& w, double min_ratio, SeededRng& rng) {
    std::size_t probes_used = 0;
    return scan_sufficient(artifact, w, min_ratio, rng, probes_used);
}

std::vector<Band> equal_bands(double nyquist_hz, std::size_t count) {
    if (count == 0 || !(nyquist_hz > 0.0))
        raise(ErrorCode::BadBand, "need a positive band count and Nyquist frequency");
    std::vector<Band> bands(count);
    for (std::size_t i = 0; i < count; ++i) {
        bands[i].lo = nyquist_hz * static_cast<double>(i) / static_cast<double>(count);
        bands[i].hi = nyquist_hz * static_cast<double>(i + 1) / static_cast<double>(count);
    }
    return bands;
}

std::vector<BandSensitivity> band_sensitivity(const ModelArtifact& artifact, const Window& w,
                                              std::span<const Band> bands,
                                              std::size_t trials_per_band, double alpha,
                                              SeededRng& rng) {
    if (bands.empty() || trials_per_band == 0)
        raise(ErrorCode::BadBand, "need at least one band and one trial per band");
    const double nyquist = w.nyquist_hz();
    if (std::abs(bands.front().lo) > 1e-9 || std::abs(bands.back().hi - nyquist) > 1e-9)
        raise(ErrorCode::BadBand, "bands must tile (0, Nyquist]");
    for (std::size_t i = 0; i < bands.size(); ++i) {
        if (!(bands[i].lo < bands[i].hi))
            raise(ErrorCode::BadBand, "empty band");
        if (i > 0 && std::abs(bands[i].lo - bands[i - 1].hi) > 1e-9)
            raise(ErrorCode::BadBand, "bands must be contiguous");
    }

    const int baseline = artifact_predict_class(artifact, w);
    std::vector<BandSensitivity> out;
    out.reserve(bands.size());
    for (const Band& band : bands) {
        TransformSpec spec;
        spec.kind = TransformKind::Jitter;
        spec.alpha = alpha;
        spec.band = band;
        check_condition_i(artifact, spec);
        std::size_t flips = 0;
        for (std::size_t trial = 0; trial < trials_per_band; ++trial) {
            const Window noisy = apply(spec, w, artifact.norm_stats, rng);
            if (artifact_predict_class(artifact, noisy) != baseline) ++flips;
        }
        out.push_back({band, static_cast<double>(flips) / static_cast<double>(trials_per_band)});
    }
    return out;
}

Explanation explain(const ModelArtifact& artifact, const Window& w, const ExplainConfig& cfg,
                    SeededRng& rng) {
    const TrainedRanges ranges = trained_ranges(artifact);
    const double band_alpha = ranges.has_jitter
                                  ? clamp_into(cfg.band_alpha, ranges.alpha_lo, ranges.alpha_hi)
                                  : cfg.band_alpha;

    Explanation e;

    // Necessity and the non-essential mask come from one shared probe set,
    // which makes them consistent by construction. The probe runner clamps
    // cfg.seg_ratio into the trained per-kind ranges itself.
    SeededRng occlusion_rng = rng.split(1);
    const OcclusionOutcome occlusion = run_occlusion_probes(
        artifact, w, cfg.occlusion_probes, cfg.seg_ratio, occlusion_rng, /*include_clip=*/true);
    e.necessity = necessity_from_probes(occlusion);
    e.non_essential_mask = non_essential_mask(occlusion);
    e.predicted_class = occlusion.baseline;
    std::size_t evaluations = occlusion.probes.size();

    SeededRng keep_rng = rng.split(2);
    std::size_t keep_probes = 0;
    e.sufficient_segments =
        scan_sufficient(artifact, w, cfg.sufficiency_ratio, keep_rng, keep_probes);
    evaluations += keep_probes;

    const std::vector<Band> bands = equal_bands(w.nyquist_hz(), cfg.band_count);
    SeededRng band_rng = rng.split(3);
    e.band_sensitivity =
        band_sensitivity(artifact, w, bands, cfg.trials_per_band, band_alpha, band_rng);
    evaluations += cfg.band_count * cfg.trials_per_band;

    // Per-channel attribution via sensor_out flips, when that kind was
    // trained.
    if (ranges.has_sensor_out && w.channels() >= 2) {
        SeededRng ch_rng = rng.split(4);
        for (std::size_t c = 0; c < w.channels(); ++c) {
            TransformSpec spec;
            spec.kind = TransformKind::SensorOut;
            spec.channels = {c};
            check_condition_i(artifact, spec);
            const Window zeroed = apply(spec, w, artifact.norm_stats, ch_rng);
            const int pred = artifact_predict_class(artifact, zeroed);
            e.channel_sensitivity.push_back(pred != occlusion.baseline ? 1.0 : 0.0);
            ++evaluations;
        }
    }

    e.n_variants_used = evaluations;
    validate_explanation(e);
    return e;
}

} // namespace cdaug
