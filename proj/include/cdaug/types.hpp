#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cdaug/error.hpp"

namespace cdaug {

// ---------------------------------------------------------------------------
// Windows and datasets
// ---------------------------------------------------------------------------

/// Fixed-shape multichannel time-series slice, the unit of classification.
/// Values are stored channels-major ([C][T]) so every per-channel pass over
/// time touches contiguous memory.
struct Window {
    std::vector<double> values;              // size C * T, values[c*T + t]
    std::vector<std::string> channel_names;  // size C
    double sampling_rate_hz = 0.0;

    std::size_t channels() const noexcept { return channel_names.size(); }
    std::size_t timesteps() const noexcept {
        return channel_names.empty() ? 0 : values.size() / channel_names.size();
    }

    double at(std::size_t c, std::size_t t) const { return values[c * timesteps() + t]; }
    double& at(std::size_t c, std::size_t t) { return values[c * timesteps() + t]; }

    std::span<const double> channel(std::size_t c) const {
        return std::span<const double>(values).subspan(c * timesteps(), timesteps());
    }
    std::span<double> channel(std::size_t c) {
        return std::span<double>(values).subspan(c * timesteps(), timesteps());
    }

    double nyquist_hz() const noexcept { return sampling_rate_hz / 2.0; }

    bool operator==(const Window&) const = default;
};

/// Throws Error(NonFinite | ShapeMismatch | BadSamplingRate) naming the
/// violated invariant; returns normally iff the window is valid
/// (C >= 1, T >= 2, all values finite, positive sampling rate).
void validate_window(const Window& w);

struct LabeledWindow {
    Window window;
    int label = 0;
    std::string subject_id;

    bool operator==(const LabeledWindow&) const = default;
};

struct Dataset {
    std::vector<LabeledWindow> windows;
    std::vector<std::string> class_names;

    std::size_t class_count() const noexcept { return class_names.size(); }
    std::size_t size() const noexcept { return windows.size(); }
    bool empty() const noexcept { return windows.empty(); }

    bool operator==(const Dataset&) const = default;
};

/// Checks K >= 2, label range, per-window validity, and that all windows
/// share one shape / channel naming / sampling rate.
void validate_dataset(const Dataset& d);

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

enum class TransformKind { Jitter, Clip, SegmentOut, SensorOut, KeepOnly };

const char* transform_kind_name(TransformKind kind) noexcept;
std::optional<TransformKind> transform_kind_from_name(const std::string& name) noexcept;

/// Frequency interval in Hz, lo < hi.
struct Band {
    double lo = 0.0;
    double hi = 0.0;
    bool operator==(const Band&) const = default;
};

/// Serializable description of one parameterized augmentation. Field use by
/// kind:
///   Jitter     - alpha, optional band
///   Clip       - start_frac, ratio
///   SegmentOut - channels, start_frac, ratio
///   SensorOut  - channels
///   KeepOnly   - start_frac, ratio
struct TransformSpec {
    TransformKind kind = TransformKind::Jitter;
    double alpha = 0.0;
    std::optional<Band> band;
    double start_frac = 0.0;
    double ratio = 0.0;
    std::vector<std::size_t> channels;

    bool operator==(const TransformSpec&) const = default;
};

/// Structural validation (kind-specific parameter ranges). Shape-dependent
/// checks need the channel count and sampling rate of the windows the spec
/// will be applied to; pass 0 to skip them.
void validate_spec(const TransformSpec& spec, std::size_t channel_count = 0,
                   double sampling_rate_hz = 0.0);

// ---------------------------------------------------------------------------
// Models and training configuration
// ---------------------------------------------------------------------------

/// Per-channel normalization statistics from the training split. `variance`
/// doubles as the sigma^2 driving jitter noise magnitude.
struct NormStats {
    std::vector<double> mean;
    std::vector<double> variance;

    bool operator==(const NormStats&) const = default;
};

enum class ModelKind { SoftmaxLinear, Mlp };

const char* model_kind_name(ModelKind kind) noexcept;
std::optional<ModelKind> model_kind_from_name(const std::string& name) noexcept;

/// Dense classifier weights. SoftmaxLinear uses w1 [K x C*T] and b1 [K];
/// Mlp adds one ReLU hidden layer: w1 [H x C*T], b1 [H], w2 [K x H], b2 [K].
struct ReferenceModel {
    ModelKind kind = ModelKind::SoftmaxLinear;
    std::size_t input_channels = 0;
    std::size_t input_timesteps = 0;
    std::size_t classes = 0;
    std::size_t hidden = 0;  // 0 for SoftmaxLinear
    std::vector<double> w1, b1, w2, b2;

    std::size_t input_dim() const noexcept { return input_channels * input_timesteps; }

    bool operator==(const ReferenceModel&) const = default;
};

void validate_model(const ReferenceModel& m);

struct TrainConfig {
    double lr0 = 1e-3;
    std::size_t batch = 256;
    std::size_t max_epochs = 500;
    std::size_t cawr_period = 50;   // T0
    double cawr_mult = 2.0;         // period multiplier on restart
    double lr_min = 1e-5;
    std::size_t patience = 50;      // = cawr_period by default
    bool use_cawr = true;           // false: constant lr0 all epochs
    std::uint64_t seed = 1;

    bool operator==(const TrainConfig&) const = default;
};

void validate_train_config(const TrainConfig& cfg);

/// Parameter ranges for random transform-set generation. Ranges are
/// [center*(1-spread), center*(1+spread)] around the defaults.
struct TransformSetConfig {
    bool jitter = true;
    bool clip = true;
    bool segment_out = true;
    bool sensor_out = true;
    double alpha_center = 0.1;
    double clip_ratio_center = 0.2;
    double segment_ratio_center = 0.1;
    double spread = 0.5;
    // SensorOut zeroing every channel destroys the whole window, so the
    // generator keeps at least one channel alive unless told otherwise.
    bool allow_full_sensor_out = false;

    bool operator==(const TransformSetConfig&) const = default;
};

void validate_set_config(const TransformSetConfig& cfg);

/// Competitive-augmentation hyperparameters: N1 transforms drawn per training
/// epoch, N2 variants voted at prediction, and the frozen set size.
struct CompetitiveConfig {
    std::size_t n1 = 20;
    std::size_t n2 = 10;
    std::size_t transform_set_size = 50;
    TrainConfig train;
    TransformSetConfig set_cfg;
    ModelKind model_kind = ModelKind::SoftmaxLinear;
    std::size_t mlp_hidden = 128;
    bool augment = true;  // false: train without augmentation (Base/CAWR scenarios)

    bool operator==(const CompetitiveConfig&) const = default;
};

/// Requires 0 < n2 <= n1 <= transform_set_size plus embedded config validity.
void validate_competitive_config(const CompetitiveConfig& cfg);

/// Trained classifier weights, normalization stats, and the frozen transform
/// set. Freezing the set in the artifact is what makes prediction-side
/// transforms a subset of the training-side ones.
struct ModelArtifact {
    ReferenceModel model;
    NormStats norm_stats;
    std::vector<TransformSpec> transform_set;
    CompetitiveConfig hyper;
    std::vector<std::string> class_names;

    bool operator==(const ModelArtifact&) const = default;
};

void validate_artifact(const ModelArtifact& a);

// ---------------------------------------------------------------------------
// Prediction and explanation records
// ---------------------------------------------------------------------------

/// Per-variant predictions from test-time augmentation; raw material of both
/// the majority vote and the explanations.
struct VoteRecord {
    struct VariantVote {
        TransformSpec spec;
        int predicted = 0;
        std::vector<double> probs;

        bool operator==(const VariantVote&) const = default;
    };

    int base_prediction = 0;
    std::vector<double> base_probs;
    std::vector<VariantVote> variant_votes;
    int final_prediction = 0;

    bool operator==(const VoteRecord&) const = default;
};

void validate_vote_record(const VoteRecord& v, std::size_t class_count);

struct BandSensitivity {
    Band band;
    double flip_rate = 0.0;

    bool operator==(const BandSensitivity&) const = default;
};

/// Per-timestep necessity scores, non-essential mask, sufficiency segments,
/// and per-band frequency sensitivity for one window.
struct Explanation {
    std::vector<double> necessity;                           // length T, in [0,1]
    std::vector<bool> non_essential_mask;                    // length T
    std::vector<std::pair<std::size_t, std::size_t>> sufficient_segments;  // [start,end)
    std::vector<BandSensitivity> band_sensitivity;
    std::vector<double> channel_sensitivity;                 // SensorOut flip per channel
    int predicted_class = 0;
    std::size_t n_variants_used = 0;

    bool operator==(const Explanation&) const = default;
};

/// Checks score ranges, mask/necessity consistency, and segment disjointness.
void validate_explanation(const Explanation& e);

} // namespace cdaug
