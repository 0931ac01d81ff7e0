#pragma once

#include <string>
#include <vector>

#include "cdaug/rng.hpp"
#include "cdaug/types.hpp"

namespace cdaug::testing {

inline Window make_window(std::size_t channels, std::size_t steps, double fs = 50.0,
                          double fill = 0.0) {
    Window w;
    w.sampling_rate_hz = fs;
    for (std::size_t c = 0; c < channels; ++c)
        w.channel_names.push_back("ch" + std::to_string(c));
    w.values.assign(channels * steps, fill);
    return w;
}

inline Window random_window(std::size_t channels, std::size_t steps, SeededRng& rng,
                            double fs = 50.0) {
    Window w = make_window(channels, steps, fs);
    for (double& v : w.values) v = rng.uniform(-2.0, 2.0);
    return w;
}

inline TransformSpec jitter_spec(double alpha) {
    TransformSpec spec;
    spec.kind = TransformKind::Jitter;
    spec.alpha = alpha;
    return spec;
}

inline TransformSpec segment_out_spec(std::vector<std::size_t> channels, double start,
                                      double ratio) {
    TransformSpec spec;
    spec.kind = TransformKind::SegmentOut;
    spec.channels = std::move(channels);
    spec.start_frac = start;
    spec.ratio = ratio;
    return spec;
}

inline TransformSpec clip_spec(double start, double ratio) {
    TransformSpec spec;
    spec.kind = TransformKind::Clip;
    spec.start_frac = start;
    spec.ratio = ratio;
    return spec;
}

inline NormStats identity_stats(std::size_t channels) {
    NormStats stats;
    stats.mean.assign(channels, 0.0);
    stats.variance.assign(channels, 1.0);
    return stats;
}

/// A frozen set whose observed parameter ranges cover the library defaults,
/// for hand-built artifacts in tests.
inline std::vector<TransformSpec> spanning_transform_set(std::size_t channels) {
    std::vector<TransformSpec> set;
    set.push_back(jitter_spec(0.05));
    set.push_back(jitter_spec(0.15));
    set.push_back(clip_spec(0.0, 0.1));
    set.push_back(clip_spec(0.2, 0.3));
    set.push_back(segment_out_spec({0}, 0.0, 0.05));
    set.push_back(segment_out_spec({0}, 0.5, 0.3));
    TransformSpec sensor;
    sensor.kind = TransformKind::SensorOut;
    sensor.channels = {channels - 1};
    set.push_back(sensor);
    return set;
}

} // namespace cdaug::testing
