#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cdaug/rng.hpp"
#include "cdaug/types.hpp"

namespace cdaug {

// Vote-flip explanations: occlusion probes for per-timestep necessity and
// the non-essential mask, keep-only scans for sufficient segments, and
// band-limited jitter for frequency sensitivity. A flip is a change of the
// argmax class relative to the untransformed prediction. Probes instantiate
// the artifact's trained transform kinds within their trained parameter
// ranges (enforced by check_condition_i), so the training/prediction
// transform contract extends to explanations.

struct ExplainConfig {
    std::size_t occlusion_probes = 120;  // minimum budget; rounded up to whole passes
    double seg_ratio = 0.1;              // occlusion length as a fraction of T
    double sufficiency_ratio = 0.25;     // keep-only length as a fraction of T
    std::size_t band_count = 8;
    std::size_t trials_per_band = 16;
    double band_alpha = 0.1;
};

struct OcclusionProbe {
    std::size_t start = 0;
    std::size_t len = 0;
    TransformKind kind = TransformKind::SegmentOut;
    bool flipped = false;
};

struct OcclusionOutcome {
    std::vector<OcclusionProbe> probes;
    int baseline = 0;
    std::size_t timesteps = 0;
};

/// Runs stratified occlusion probes of length ~seg_ratio*T. Starts form
/// jittered grids with pinned endpoints, one grid per pass, so every pass
/// covers every timestep and the pass count (>= 5) bounds coverage from
/// below. With include_clip, passes alternate between segment_out and clip
/// occlusions; otherwise all probes are segment_out over all channels.
OcclusionOutcome run_occlusion_probes(const ModelArtifact& artifact, const Window& w,
                                      std::size_t n_probes, double seg_ratio, SeededRng& rng,
                                      bool include_clip);

/// necessity(t) = flipped probes covering t / probes covering t.
std::vector<double> necessity_from_probes(const OcclusionOutcome& outcome);

/// mask(t) = true iff some probe covers t and none covering t flipped.
std::vector<bool> non_essential_mask(const OcclusionOutcome& outcome);

/// Convenience: segment_out-only probes, then necessity_from_probes.
std::vector<double> necessity_map(const ModelArtifact& artifact, const Window& w,
                                  std::size_t n_probes, double seg_ratio, SeededRng& rng);

/// Scans keep-only windows of length min_ratio*T at stride ~T/20 (interior
/// starts jittered, endpoints pinned); a segment is sufficient iff the
/// prediction on the kept content alone equals the baseline. Overlapping
/// sufficient segments are merged.
std::vector<std::pair<std::size_t, std::size_t>> sufficient_segments(
    const ModelArtifact& artifact, const Window& w, double min_ratio, SeededRng& rng);

/// `count` equal-width bands tiling (0, nyquist].
std::vector<Band> equal_bands(double nyquist_hz, std::size_t count);

/// Per band: trials_per_band band-limited jitter draws; flip_rate = flips /
/// trials. Bands must tile (0, Nyquist].
std::vector<BandSensitivity> band_sensitivity(const ModelArtifact& artifact, const Window& w,
                                              std::span<const Band> bands,
                                              std::size_t trials_per_band, double alpha,
                                              SeededRng& rng);

/// Bundles all analyses. Probe magnitudes (seg_ratio, sufficiency_ratio,
/// band_alpha) are clamped into the artifact's trained parameter ranges
/// before use.
Explanation explain(const ModelArtifact& artifact, const Window& w, const ExplainConfig& cfg,
                    SeededRng& rng);

/// One panel per channel: the raw signal drawn solid where essential and
/// dashed where the non-essential mask holds, red translucent rectangles
/// over sufficient segments, and the band-sensitivity profile in blue
/// against a right-hand [0,1] axis. Output bytes are deterministic.
std::string render_svg(const Explanation& explanation, const Window& w);

} // namespace cdaug
