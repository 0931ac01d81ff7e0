#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cdaug/rng.hpp"
#include "cdaug/types.hpp"

namespace cdaug {

// Pure, seeded, label-preserving augmentations. Every transform returns a new
// window of identical shape; given the same (spec, window, rng seed) the
// output is bit-identical.

/// Converts fractional segment coordinates to {start, length} in timesteps.
/// Rounding is half-up on start and length independently; length is clamped
/// so start+length <= t.
std::pair<std::size_t, std::size_t> segment_bounds(double start_frac, double ratio,
                                                   std::size_t t);

/// Additive Gaussian noise with per-channel variance alpha * sigma2[c].
/// Without a band this is plain white noise. With a band, white noise is
/// DFT-masked to the bins inside (band.lo, band.hi] and rescaled so the
/// empirical variance of what is added still equals alpha * sigma2[c].
Window jitter(const Window& w, double alpha, const std::optional<Band>& band,
              std::span<const double> sigma2, SeededRng& rng);

/// Removes timesteps [s, s+L) on every channel and refills them by linear
/// interpolation between the neighbouring samples. At the edges there is no
/// anchor to interpolate toward, so the nearest surviving sample is held
/// flat; clipping the whole window fills with zeros.
Window clip(const Window& w, double start_frac, double ratio);

/// Zeroes timesteps [s, s+L) on the selected channels only.
Window segment_out(const Window& w, const std::vector<std::size_t>& channels,
                   double start_frac, double ratio);

/// Zeroes the selected channels entirely (segment_out with ratio 1).
Window sensor_out(const Window& w, const std::vector<std::size_t>& channels);

/// Zeroes everything outside [s, s+L) on all channels; the complement of
/// segment_out, used to probe whether a segment alone is sufficient.
Window keep_only(const Window& w, double start_frac, double ratio);

/// Draws `count` random specs: kinds uniform over the enabled set, parameters
/// uniform within the configured ranges. Channel subsets are emitted in
/// ascending order so equal subsets compare equal.
std::vector<TransformSpec> generate_transform_set(const TransformSetConfig& cfg,
                                                  std::size_t count,
                                                  std::size_t channel_count, SeededRng& rng);

/// Dispatches a spec to its kind-specific operation. `stats.variance` is the
/// per-channel sigma^2 that scales jitter noise.
Window apply(const TransformSpec& spec, const Window& w, const NormStats& stats,
             SeededRng& rng);

} // namespace cdaug
