#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cdaug/rng.hpp"
#include "cdaug/types.hpp"

namespace cdaug {

/// One continuous multichannel recording with per-timestep labels.
/// Samples are stored time-major ([T_raw][C]) to mirror the CSV layout;
/// label -1 marks unlabeled (null) timesteps.
struct Recording {
    std::vector<double> samples;  // size T_raw * C, samples[t*C + c]
    std::vector<std::string> channel_names;
    double sampling_rate_hz = 0.0;
    std::string subject_id;
    std::vector<int> labels;  // size T_raw

    std::size_t channels() const noexcept { return channel_names.size(); }
    std::size_t length() const noexcept {
        return channel_names.empty() ? 0 : samples.size() / channel_names.size();
    }

    bool operator==(const Recording&) const = default;
};

/// Interchange corpus description: recordings live in per-file CSVs next to
/// the manifest; the manifest carries shared metadata.
struct CorpusManifest {
    double sampling_rate_hz = 0.0;
    std::vector<std::string> class_names;
    struct Entry {
        std::string file;
        std::string subject_id;
        bool operator==(const Entry&) const = default;
    };
    std::vector<Entry> recordings;

    bool operator==(const CorpusManifest&) const = default;
};

struct Corpus {
    CorpusManifest manifest;
    std::vector<Recording> recordings;
};

/// Desk-scale stand-in for the real sensor benchmarks: every class plants a
/// sine carrier, either confined to one segment (mode Segment, the carrier
/// frequency separates classes inside the shared segment) or spanning the
/// whole window (mode Band).
struct SyntheticSpec {
    enum class Mode { Segment, Band };

    std::size_t classes = 4;
    std::size_t subjects = 6;
    std::size_t windows_per_subject_per_class = 50;
    std::size_t channels = 3;
    std::size_t timesteps = 96;
    double sampling_rate_hz = 32.0;
    Mode mode = Mode::Segment;
    std::vector<double> carriers_hz = {3.0, 7.0, 11.0, 15.0};
    double amplitude = 1.0;
    std::size_t segment_start = 40;
    std::size_t segment_end = 60;
    double noise_floor = 2.0;
    double subject_amp_jitter = 0.2;  // per-subject amplitude scale ~ U[1-j, 1+j]
    double window_amp_jitter = 0.1;   // per-window amplitude scale ~ U[1-j, 1+j]

    bool operator==(const SyntheticSpec&) const = default;
};

void validate_synthetic_spec(const SyntheticSpec& spec);

// ---------------------------------------------------------------------------
// Corpus I/O
// ---------------------------------------------------------------------------

/// Reads a manifest plus the CSV recordings it references. CSV layout: header
/// row of channel names with a final `label` column; one row per timestep;
/// empty label cells mark null timesteps. Throws ParseError(file:line:col) or
/// LabelMismatch.
Corpus load_csv_corpus(const std::filesystem::path& manifest_path);

/// Writes manifest + one CSV per recording into `dir` (created if missing).
void write_csv_corpus(const Corpus& corpus, const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Windowing, normalization, folds
// ---------------------------------------------------------------------------

/// Slices a recording into fixed-length windows: stride is
/// max(1, round(T*(1-overlap))), starts at 0, stride, 2*stride, ... while
/// start+T <= T_raw. Window label = plurality of per-timestep labels (ties
/// prefer the lowest class index; windows whose plurality is null are
/// dropped).
std::vector<LabeledWindow> sliding_windows(const Recording& rec, std::size_t window_len,
                                           double overlap);

/// Per-channel mean and population variance over every timestep of every
/// window. Training-split statistics only; they feed both z-scoring and the
/// jitter noise scale.
NormStats fit_norm_stats(const std::vector<LabeledWindow>& windows);

/// z-score per channel. Channels with zero variance are centered but not
/// scaled, so constant channels come out all zero instead of dividing by 0.
Window apply_norm(const NormStats& stats, const Window& w);

struct LosoFold {
    Dataset train;
    Dataset val;
    Dataset test;
    std::string held_out_subject;
};

/// Deterministic stratified ~10% validation split: within each class, every
/// 10th window (stable order) goes to val; small corpora fall back to one
/// window per multi-window class.
std::pair<Dataset, Dataset> stratified_val_split(const Dataset& dataset);

/// One fold per subject: test = that subject, val = stratified_val_split of
/// the remaining windows, train = the rest. Throws TooFewSubjects below 2
/// subjects.
std::vector<LosoFold> loso_folds(const Dataset& dataset);

/// LOSO folds cut straight from recordings so the test subject can use a
/// different window overlap than the training side (the usual 50% train /
/// 90% test protocol).
std::vector<LosoFold> loso_folds_from_corpus(const Corpus& corpus, std::size_t window_len,
                                             double train_overlap, double test_overlap);

/// Windows every recording at one overlap and bundles the result.
Dataset windows_from_corpus(const Corpus& corpus, std::size_t window_len, double overlap);

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

Dataset generate_synthetic(const SyntheticSpec& spec, SeededRng& rng);

/// Lays a generated dataset out as an interchange corpus: one recording per
/// subject, windows tiled back to back, per-timestep labels repeated. Loading
/// with overlap 0 and the same window length recovers the windows exactly.
Corpus synthetic_corpus(const SyntheticSpec& spec, SeededRng& rng);

} // namespace cdaug
