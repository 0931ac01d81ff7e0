#include "cdaug/transforms.hpp"

#include <algorithm>
#include <cmath>

#include "cdaug/dft.hpp"

namespace cdaug {

std::pair<std::size_t, std::size_t> segment_bounds(double start_frac, double ratio,
                                                   std::size_t t) {
    const double td = static_cast<double>(t);
    std::size_t start = static_cast<std::size_t>(std::floor(start_frac * td + 0.5));
    std::size_t len = static_cast<std::size_t>(std::floor(ratio * td + 0.5));
    start = std::min(start, t);
    len = std::min(len, t - start);
    return {start, len};
}

Window jitter(const Window& w, double alpha, const std::optional<Band>& band,
              std::span<const double> sigma2, SeededRng& rng) {
    validate_window(w);
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        raise(ErrorCode::NegativeAlpha, "alpha must be >= 0, got " + std::to_string(alpha));
    const std::size_t channels = w.channels();
    const std::size_t steps = w.timesteps();
    if (sigma2.size() != channels)
        raise(ErrorCode::ShapeMismatch, "sigma2 must have one entry per channel");
    for (double v : sigma2)
        if (!(v >= 0.0) || !std::isfinite(v))
            raise(ErrorCode::NonFinite, "sigma2 entries must be finite and >= 0");
    if (band) {
        if (!(band->lo >= 0.0) || !(band->lo < band->hi))
            raise(ErrorCode::BadBand, "band must satisfy 0 <= lo < hi");
        if (band->hi > w.nyquist_hz() + 1e-12)
            raise(ErrorCode::BadBand, "band exceeds Nyquist (" +
                                          std::to_string(w.nyquist_hz()) + " Hz)");
    }

    Window out = w;
    if (alpha == 0.0) return out;

    if (!band) {
        std::vector<double> noise(steps);
        for (std::size_t c = 0; c < channels; ++c) {
            const double sd = std::sqrt(alpha * sigma2[c]);
            rng.fill_normal(noise, 0.0, sd);
            auto ch = out.channel(c);
            for (std::size_t t = 0; t < steps; ++t) ch[t] += noise[t];
        }
        return out;
    }

    // Band-limited: mask white noise to the requested bins, then rescale the
    // surviving signal so the added variance is exactly alpha * sigma2[c].
    std::size_t kept_bins = 0;
    for (std::size_t k = 1; k <= steps / 2; ++k) {
        const double f = bin_frequency(k, steps, w.sampling_rate_hz);
        if (f > band->lo && f <= band->hi + 1e-12) ++kept_bins;
    }
    if (kept_bins == 0)
        raise(ErrorCode::BadBand, "band (" + std::to_string(band->lo) + ", " +
                                      std::to_string(band->hi) +
                                      "] contains no resolvable frequency bin");

    std::vector<double> white(steps);
    for (std::size_t c = 0; c < channels; ++c) {
        rng.fill_normal(white, 0.0, 1.0);
        if (sigma2[c] == 0.0) continue;
        auto spectrum = dft(white);
        for (std::size_t k = 0; k < steps; ++k) {
            // Positive-frequency index of bin k (bins above n/2 mirror down).
            const std::size_t pos = std::min(k, steps - k);
            const double f = bin_frequency(pos, steps, w.sampling_rate_hz);
            const bool keep = pos > 0 && f > band->lo && f <= band->hi + 1e-12;
            if (!keep) spectrum[k] = 0.0;
        }
        std::vector<double> banded = idft_real(spectrum);
        double mean_sq = 0.0;
        for (double v : banded) mean_sq += v * v;
        mean_sq /= static_cast<double>(steps);
        if (mean_sq <= 0.0) continue;  // cannot happen with kept_bins > 0
        const double scale = std::sqrt(alpha * sigma2[c] / mean_sq);
        auto ch = out.channel(c);
        for (std::size_t t = 0; t < steps; ++t) ch[t] += scale * banded[t];
    }
    return out;
}

Window clip(const Window& w, double start_frac, double ratio) {
    validate_window(w);
    if (!(start_frac >= 0.0) || start_frac >= 1.0 || !(ratio >= 0.0) ||
        start_frac + ratio > 1.0 + 1e-12)
        raise(ErrorCode::BadRange, "clip requires start_frac in [0,1) and start_frac + ratio <= 1");

    const std::size_t steps = w.timesteps();
    const auto [start, len] = segment_bounds(start_frac, ratio, steps);
    Window out = w;
    if (len == 0) return out;

    const std::size_t end = start + len;  // one past the removed segment
    for (std::size_t c = 0; c < w.channels(); ++c) {
        auto ch = out.channel(c);
        if (start == 0 && end == steps) {
            std::fill(ch.begin(), ch.end(), 0.0);
        } else if (start == 0) {
            for (std::size_t i = 0; i < len; ++i) ch[i] = ch[end];
        } else if (end == steps) {
            for (std::size_t i = start; i < steps; ++i) ch[i] = ch[start - 1];
        } else {
            const double left = ch[start - 1];
            const double right = ch[end];
            const double denom = static_cast<double>(len + 1);
            for (std::size_t i = 0; i < len; ++i)
                ch[start + i] = left + (right - left) * (static_cast<double>(i + 1) / denom);
        }
    }
    return out;
}

namespace {

void check_channels(const std::vector<std::size_t>& channels, std::size_t channel_count) {
    if (channels.empty())
        raise(ErrorCode::BadChannel, "channel subset must be nonempty");
    std::vector<std::size_t> sorted = channels;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] >= channel_count)
            raise(ErrorCode::BadChannel, "channel " + std::to_string(sorted[i]) +
                                             " out of range for " +
                                             std::to_string(channel_count) + " channels");
        if (i > 0 && sorted[i] == sorted[i - 1])
            raise(ErrorCode::BadChannel, "duplicate channel " + std::to_string(sorted[i]));
    }
}

} // namespace

Window segment_out(const Window& w, const std::vector<std::size_t>& channels,
                   double start_frac, double ratio) {
    validate_window(w);
    check_channels(channels, w.channels());
    if (!(start_frac >= 0.0) || start_frac >= 1.0 || !(ratio >= 0.0) ||
        start_frac + ratio > 1.0 + 1e-12)
        raise(ErrorCode::BadRange, "segment_out requires start_frac + ratio <= 1");

    const auto [start, len] = segment_bounds(start_frac, ratio, w.timesteps());
    Window out = w;
    for (std::size_t c : channels) {
        auto ch = out.channel(c);
        std::fill(ch.begin() + static_cast<std::ptrdiff_t>(start),
                  ch.begin() + static_cast<std::ptrdiff_t>(start + len), 0.0);
    }
    return out;
}

Window sensor_out(const Window& w, const std::vector<std::size_t>& channels) {
    validate_window(w);
    check_channels(channels, w.channels());
    Window out = w;
    for (std::size_t c : channels) {
        auto ch = out.channel(c);
        std::fill(ch.begin(), ch.end(), 0.0);
    }
    return out;
}

Window keep_only(const Window& w, double start_frac, double ratio) {
    validate_window(w);
    if (!(ratio > 0.0))
        raise(ErrorCode::BadRange, "keep_only requires ratio > 0");
    if (!(start_frac >= 0.0) || start_frac >= 1.0 || start_frac + ratio > 1.0 + 1e-12)
        raise(ErrorCode::BadRange, "keep_only requires start_frac in [0,1) and start_frac + ratio <= 1");

    const std::size_t steps = w.timesteps();
    const auto [start, len] = segment_bounds(start_frac, ratio, steps);
    Window out = w;
    for (std::size_t c = 0; c < w.channels(); ++c) {
        auto ch = out.channel(c);
        std::fill(ch.begin(), ch.begin() + static_cast<std::ptrdiff_t>(start), 0.0);
        std::fill(ch.begin() + static_cast<std::ptrdiff_t>(start + len), ch.end(), 0.0);
    }
    return out;
}

std::vector<TransformSpec> generate_transform_set(const TransformSetConfig& cfg,
                                                  std::size_t count,
                                                  std::size_t channel_count, SeededRng& rng) {
    validate_set_config(cfg);
    if (channel_count == 0)
        raise(ErrorCode::BadConfig, "channel_count must be positive");

    std::vector<TransformKind> kinds;
    if (cfg.jitter) kinds.push_back(TransformKind::Jitter);
    if (cfg.clip) kinds.push_back(TransformKind::Clip);
    if (cfg.segment_out) kinds.push_back(TransformKind::SegmentOut);
    if (cfg.sensor_out) kinds.push_back(TransformKind::SensorOut);

    const auto range_around = [&](double center) {
        return std::pair<double, double>{center * (1.0 - cfg.spread),
                                         center * (1.0 + cfg.spread)};
    };
    const auto draw_channels = [&](std::size_t max_count) {
        const std::size_t k = 1 + static_cast<std::size_t>(rng.uniform_int(max_count));
        std::vector<std::size_t> subset = rng.sample_without_replacement(channel_count, k);
        std::sort(subset.begin(), subset.end());
        return subset;
    };

    std::vector<TransformSpec> set;
    set.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        TransformSpec spec;
        spec.kind = kinds[rng.uniform_int(kinds.size())];
        switch (spec.kind) {
            case TransformKind::Jitter: {
                const auto [lo, hi] = range_around(cfg.alpha_center);
                spec.alpha = rng.uniform(lo, hi);
                break;
            }
            case TransformKind::Clip: {
                const auto [lo, hi] = range_around(cfg.clip_ratio_center);
                spec.ratio = rng.uniform(lo, hi);
                spec.start_frac = rng.uniform(0.0, 1.0 - spec.ratio);
                break;
            }
            case TransformKind::SegmentOut: {
                const auto [lo, hi] = range_around(cfg.segment_ratio_center);
                spec.ratio = rng.uniform(lo, hi);
                spec.start_frac = rng.uniform(0.0, 1.0 - spec.ratio);
                spec.channels = draw_channels(channel_count);
                break;
            }
            case TransformKind::SensorOut: {
                const std::size_t max_count =
                    cfg.allow_full_sensor_out ? channel_count
                                              : std::max<std::size_t>(1, channel_count - 1);
                spec.channels = draw_channels(max_count);
                break;
            }
            case TransformKind::KeepOnly:
                break;  // never generated
        }
        validate_spec(spec, channel_count);
        set.push_back(std::move(spec));
    }
    return set;
}

Window apply(const TransformSpec& spec, const Window& w, const NormStats& stats,
             SeededRng& rng) {
    validate_spec(spec, w.channels(), w.sampling_rate_hz);
    switch (spec.kind) {
        case TransformKind::Jitter:
            return jitter(w, spec.alpha, spec.band, stats.variance, rng);
        case TransformKind::Clip:
            return clip(w, spec.start_frac, spec.ratio);
        case TransformKind::SegmentOut:
            return segment_out(w, spec.channels, spec.start_frac, spec.ratio);
        case TransformKind::SensorOut:
            return sensor_out(w, spec.channels);
        case TransformKind::KeepOnly:
            return keep_only(w, spec.start_frac, spec.ratio);
    }
    raise(ErrorCode::BadConfig, "unreachable transform kind");
}

} // namespace cdaug
