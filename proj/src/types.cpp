#include "cdaug/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace cdaug {

namespace {

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

} // namespace

void validate_window(const Window& w) {
    if (w.channel_names.empty())
        raise(ErrorCode::ShapeMismatch, "window must have at least one channel");
    const std::size_t c = w.channel_names.size();
    if (w.values.size() % c != 0)
        raise(ErrorCode::ShapeMismatch, "value count is not a multiple of the channel count");
    const std::size_t t = w.values.size() / c;
    if (t < 2)
        raise(ErrorCode::ShapeMismatch, "window must span at least 2 timesteps, got " + std::to_string(t));
    if (!(w.sampling_rate_hz > 0.0) || !std::isfinite(w.sampling_rate_hz))
        raise(ErrorCode::BadSamplingRate, "sampling rate must be a positive finite value");
    if (!all_finite(w.values))
        raise(ErrorCode::NonFinite, "window contains NaN or Inf");
}

void validate_dataset(const Dataset& d) {
    if (d.class_names.size() < 2)
        raise(ErrorCode::BadConfig, "dataset must declare at least 2 classes");
    const int k = static_cast<int>(d.class_names.size());
    const Window* first = nullptr;
    for (std::size_t i = 0; i < d.windows.size(); ++i) {
        const LabeledWindow& lw = d.windows[i];
        validate_window(lw.window);
        if (lw.label < 0 || lw.label >= k)
            raise(ErrorCode::BadLabel, "window " + std::to_string(i) + " has label " +
                                           std::to_string(lw.label) + ", class count is " +
                                           std::to_string(k));
        if (!first) {
            first = &lw.window;
        } else {
            if (lw.window.channel_names != first->channel_names ||
                lw.window.timesteps() != first->timesteps())
                raise(ErrorCode::ShapeMismatch,
                      "window " + std::to_string(i) + " disagrees with the dataset shape");
            if (lw.window.sampling_rate_hz != first->sampling_rate_hz)
                raise(ErrorCode::BadSamplingRate,
                      "window " + std::to_string(i) + " has a different sampling rate");
        }
    }
}

const char* transform_kind_name(TransformKind kind) noexcept {
    switch (kind) {
        case TransformKind::Jitter: return "jitter";
        case TransformKind::Clip: return "clip";
        case TransformKind::SegmentOut: return "segment_out";
        case TransformKind::SensorOut: return "sensor_out";
        case TransformKind::KeepOnly: return "keep_only";
    }
    return "unknown";
}

std::optional<TransformKind> transform_kind_from_name(const std::string& name) noexcept {
    if (name == "jitter") return TransformKind::Jitter;
    if (name == "clip") return TransformKind::Clip;
    if (name == "segment_out") return TransformKind::SegmentOut;
    if (name == "sensor_out") return TransformKind::SensorOut;
    if (name == "keep_only") return TransformKind::KeepOnly;
    return std::nullopt;
}

namespace {

void validate_channels(const TransformSpec& spec, std::size_t channel_count) {
    if (spec.channels.empty())
        raise(ErrorCode::BadChannel, std::string(transform_kind_name(spec.kind)) +
                                         " requires a nonempty channel subset");
    std::set<std::size_t> seen;
    for (std::size_t ch : spec.channels) {
        if (!seen.insert(ch).second)
            raise(ErrorCode::BadChannel, "duplicate channel " + std::to_string(ch));
        if (channel_count > 0 && ch >= channel_count)
            raise(ErrorCode::BadChannel, "channel " + std::to_string(ch) +
                                             " out of range, window has " +
                                             std::to_string(channel_count));
    }
}

void validate_segment_range(const TransformSpec& spec, double min_ratio) {
    if (!(spec.start_frac >= 0.0) || spec.start_frac >= 1.0)
        raise(ErrorCode::BadRange, "start_frac must lie in [0,1), got " +
                                       std::to_string(spec.start_frac));
    if (!(spec.ratio >= min_ratio) || spec.ratio > 1.0)
        raise(ErrorCode::BadRange, "ratio out of range: " + std::to_string(spec.ratio));
    if (spec.start_frac + spec.ratio > 1.0 + 1e-12)
        raise(ErrorCode::BadRange, "start_frac + ratio exceeds 1");
}

} // namespace

void validate_spec(const TransformSpec& spec, std::size_t channel_count,
                   double sampling_rate_hz) {
    switch (spec.kind) {
        case TransformKind::Jitter:
            if (!(spec.alpha >= 0.0) || !std::isfinite(spec.alpha))
                raise(ErrorCode::NegativeAlpha, "alpha must be >= 0, got " +
                                                    std::to_string(spec.alpha));
            if (spec.band) {
                if (!(spec.band->lo >= 0.0) || !(spec.band->lo < spec.band->hi))
                    raise(ErrorCode::BadBand, "band must satisfy 0 <= lo < hi");
                if (sampling_rate_hz > 0.0 && spec.band->hi > sampling_rate_hz / 2.0 + 1e-12)
                    raise(ErrorCode::BadBand, "band upper edge exceeds Nyquist (" +
                                                  std::to_string(sampling_rate_hz / 2.0) + " Hz)");
            }
            break;
        case TransformKind::Clip:
            validate_segment_range(spec, 0.0);
            break;
        case TransformKind::SegmentOut:
            validate_channels(spec, channel_count);
            validate_segment_range(spec, 0.0);
            break;
        case TransformKind::SensorOut:
            validate_channels(spec, channel_count);
            break;
        case TransformKind::KeepOnly:
            if (!(spec.ratio > 0.0))
                raise(ErrorCode::BadRange, "keep_only requires ratio > 0");
            validate_segment_range(spec, 0.0);
            break;
    }
}

const char* model_kind_name(ModelKind kind) noexcept {
    switch (kind) {
        case ModelKind::SoftmaxLinear: return "softmax_linear";
        case ModelKind::Mlp: return "mlp";
    }
    return "unknown";
}

std::optional<ModelKind> model_kind_from_name(const std::string& name) noexcept {
    if (name == "softmax_linear") return ModelKind::SoftmaxLinear;
    if (name == "mlp") return ModelKind::Mlp;
    return std::nullopt;
}

void validate_model(const ReferenceModel& m) {
    if (m.input_channels == 0 || m.input_timesteps == 0 || m.classes < 2)
        raise(ErrorCode::ShapeMismatch, "model needs a nonzero input shape and >= 2 classes");
    const std::size_t d = m.input_dim();
    switch (m.kind) {
        case ModelKind::SoftmaxLinear:
            if (m.w1.size() != m.classes * d || m.b1.size() != m.classes)
                raise(ErrorCode::ShapeMismatch, "linear weight shapes inconsistent with input");
            if (!m.w2.empty() || !m.b2.empty() || m.hidden != 0)
                raise(ErrorCode::ShapeMismatch, "linear model must not carry hidden-layer weights");
            break;
        case ModelKind::Mlp:
            if (m.hidden == 0)
                raise(ErrorCode::ShapeMismatch, "mlp requires a nonzero hidden width");
            if (m.w1.size() != m.hidden * d || m.b1.size() != m.hidden ||
                m.w2.size() != m.classes * m.hidden || m.b2.size() != m.classes)
                raise(ErrorCode::ShapeMismatch, "mlp weight shapes inconsistent with input");
            break;
    }
    for (const auto* vec : {&m.w1, &m.b1, &m.w2, &m.b2}) {
        if (!std::all_of(vec->begin(), vec->end(), [](double x) { return std::isfinite(x); }))
            raise(ErrorCode::NonFinite, "model weights contain NaN or Inf");
    }
}

void validate_train_config(const TrainConfig& cfg) {
    if (!(cfg.lr0 > 0.0) || !(cfg.lr_min > 0.0) || cfg.lr_min > cfg.lr0)
        raise(ErrorCode::BadConfig, "need 0 < lr_min <= lr0");
    if (cfg.batch == 0 || cfg.max_epochs == 0 || cfg.cawr_period == 0 || cfg.patience == 0)
        raise(ErrorCode::BadConfig, "batch, max_epochs, cawr_period and patience must be positive");
    if (!(cfg.cawr_mult >= 1.0))
        raise(ErrorCode::BadConfig, "cawr_mult must be >= 1");
}

void validate_set_config(const TransformSetConfig& cfg) {
    if (!cfg.jitter && !cfg.clip && !cfg.segment_out && !cfg.sensor_out)
        raise(ErrorCode::BadConfig, "at least one transform kind must be enabled");
    if (!(cfg.spread >= 0.0) || cfg.spread >= 1.0)
        raise(ErrorCode::BadConfig, "spread must lie in [0,1)");
    if (cfg.jitter && !(cfg.alpha_center > 0.0))
        raise(ErrorCode::BadConfig, "alpha_center must be positive");
    if (cfg.clip && !(cfg.clip_ratio_center > 0.0 &&
                      cfg.clip_ratio_center * (1.0 + cfg.spread) <= 1.0))
        raise(ErrorCode::BadConfig, "clip ratio range must stay within (0,1]");
    if (cfg.segment_out && !(cfg.segment_ratio_center > 0.0 &&
                             cfg.segment_ratio_center * (1.0 + cfg.spread) <= 1.0))
        raise(ErrorCode::BadConfig, "segment ratio range must stay within (0,1]");
}

void validate_competitive_config(const CompetitiveConfig& cfg) {
    if (cfg.n2 == 0 || cfg.n2 > cfg.n1 || cfg.n1 > cfg.transform_set_size)
        raise(ErrorCode::BadConfig, "need 0 < n2 <= n1 <= transform_set_size, got n1=" +
                                        std::to_string(cfg.n1) + " n2=" + std::to_string(cfg.n2) +
                                        " set=" + std::to_string(cfg.transform_set_size));
    if (cfg.model_kind == ModelKind::Mlp && cfg.mlp_hidden == 0)
        raise(ErrorCode::BadConfig, "mlp_hidden must be positive for the mlp model");
    validate_train_config(cfg.train);
    validate_set_config(cfg.set_cfg);
}

void validate_artifact(const ModelArtifact& a) {
    validate_model(a.model);
    if (a.transform_set.empty())
        raise(ErrorCode::BadConfig, "artifact transform set must be nonempty");
    for (const TransformSpec& spec : a.transform_set)
        validate_spec(spec, a.model.input_channels);
    if (a.norm_stats.mean.size() != a.model.input_channels ||
        a.norm_stats.variance.size() != a.model.input_channels)
        raise(ErrorCode::ShapeMismatch, "norm stats do not match the model channel count");
    for (double v : a.norm_stats.variance)
        if (!(v >= 0.0) || !std::isfinite(v))
            raise(ErrorCode::NonFinite, "norm variance entries must be finite and >= 0");
    if (a.class_names.size() != a.model.classes)
        raise(ErrorCode::ShapeMismatch, "class name count does not match the model output");
    validate_competitive_config(a.hyper);
}

namespace {

void validate_probs(const std::vector<double>& probs, std::size_t class_count,
                    const char* what) {
    if (probs.size() != class_count)
        raise(ErrorCode::ShapeMismatch, std::string(what) + " has wrong length");
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0) || !std::isfinite(p))
            raise(ErrorCode::BadConfig, std::string(what) + " has a negative or non-finite entry");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        raise(ErrorCode::BadConfig, std::string(what) + " does not sum to 1 within 1e-6");
}

} // namespace

void validate_vote_record(const VoteRecord& v, std::size_t class_count) {
    const int k = static_cast<int>(class_count);
    if (v.base_prediction < 0 || v.base_prediction >= k ||
        v.final_prediction < 0 || v.final_prediction >= k)
        raise(ErrorCode::BadLabel, "vote record predictions out of class range");
    validate_probs(v.base_probs, class_count, "base probs");
    for (const auto& vote : v.variant_votes) {
        if (vote.predicted < 0 || vote.predicted >= k)
            raise(ErrorCode::BadLabel, "variant prediction out of class range");
        validate_probs(vote.probs, class_count, "variant probs");
        validate_spec(vote.spec);
    }
}

void validate_explanation(const Explanation& e) {
    const std::size_t t = e.necessity.size();
    if (e.non_essential_mask.size() != t)
        raise(ErrorCode::ShapeMismatch, "necessity and non-essential mask lengths differ");
    for (std::size_t i = 0; i < t; ++i) {
        const double n = e.necessity[i];
        if (!(n >= 0.0 && n <= 1.0))
            raise(ErrorCode::BadConfig, "necessity outside [0,1] at timestep " + std::to_string(i));
        if (e.non_essential_mask[i] && n != 0.0)
            raise(ErrorCode::BadConfig,
                  "non-essential timestep " + std::to_string(i) + " has nonzero necessity");
    }
    std::size_t prev_end = 0;
    bool first = true;
    for (const auto& [start, end] : e.sufficient_segments) {
        if (start >= end || end > t)
            raise(ErrorCode::BadRange, "sufficient segment out of range");
        if (!first && start < prev_end)
            raise(ErrorCode::BadRange, "sufficient segments overlap");
        prev_end = end;
        first = false;
    }
    for (const auto& bs : e.band_sensitivity)
        if (!(bs.flip_rate >= 0.0 && bs.flip_rate <= 1.0))
            raise(ErrorCode::BadConfig, "flip rate outside [0,1]");
    for (double f : e.channel_sensitivity)
        if (!(f >= 0.0 && f <= 1.0))
            raise(ErrorCode::BadConfig, "channel sensitivity outside [0,1]");
}

} // namespace cdaug
