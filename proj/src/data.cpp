#include "cdaug/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "cdaug/serialize.hpp"

namespace cdaug {

namespace fs = std::filesystem;

void validate_synthetic_spec(const SyntheticSpec& spec) {
    if (spec.classes < 2) raise(ErrorCode::BadSpec, "need at least 2 classes");
    if (spec.subjects == 0 || spec.windows_per_subject_per_class == 0)
        raise(ErrorCode::BadSpec, "subjects and windows per subject must be positive");
    if (spec.channels == 0 || spec.timesteps < 2)
        raise(ErrorCode::BadSpec, "need at least 1 channel and 2 timesteps");
    if (!(spec.sampling_rate_hz > 0.0))
        raise(ErrorCode::BadSpec, "sampling_rate_hz must be positive");
    if (spec.carriers_hz.size() != spec.classes)
        raise(ErrorCode::BadSpec, "carriers_hz must list one frequency per class");
    const double nyquist = spec.sampling_rate_hz / 2.0;
    for (double f : spec.carriers_hz)
        if (!(f > 0.0) || f >= nyquist + 1e-12)
            raise(ErrorCode::BadSpec, "carrier " + std::to_string(f) +
                                          " Hz outside (0, Nyquist=" + std::to_string(nyquist) +
                                          ")");
    if (spec.mode == SyntheticSpec::Mode::Segment) {
        if (spec.segment_start >= spec.segment_end || spec.segment_end > spec.timesteps)
            raise(ErrorCode::BadSpec, "planted segment must satisfy start < end <= timesteps");
    }
    if (!(spec.amplitude > 0.0)) raise(ErrorCode::BadSpec, "amplitude must be positive");
    if (!(spec.noise_floor >= 0.0)) raise(ErrorCode::BadSpec, "noise_floor must be >= 0");
    if (!(spec.subject_amp_jitter >= 0.0) || spec.subject_amp_jitter >= 1.0 ||
        !(spec.window_amp_jitter >= 0.0) || spec.window_amp_jitter >= 1.0)
        raise(ErrorCode::BadSpec, "amplitude jitters must lie in [0,1)");
}

// ---------------------------------------------------------------------------
// CSV corpus
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t begin = 0;
    while (true) {
        const std::size_t comma = line.find(',', begin);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(begin));
            break;
        }
        fields.push_back(line.substr(begin, comma - begin));
        begin = comma + 1;
    }
    return fields;
}

[[noreturn]] void parse_fail(const fs::path& file, std::size_t line, std::size_t col,
                             const std::string& what) {
    raise(ErrorCode::ParseError, file.filename().string() + ":" + std::to_string(line) + ":" +
                                     std::to_string(col) + ": " + what);
}

double parse_double(const std::string& field, const fs::path& file, std::size_t line,
                    std::size_t col) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        parse_fail(file, line, col, "expected a number, got '" + field + "'");
    if (!std::isfinite(value))
        parse_fail(file, line, col, "non-finite value '" + field + "'");
    return value;
}

Recording load_recording(const fs::path& path, const CorpusManifest& manifest,
                         const CorpusManifest::Entry& entry) {
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line))
        parse_fail(path, 1, 1, "empty file");
    ++line_no;
    std::vector<std::string> header = split_fields(line);
    if (header.size() < 2 || header.back() != "label")
        raise(ErrorCode::LabelMismatch,
              path.filename().string() + ": final header column must be 'label'");

    Recording rec;
    rec.channel_names.assign(header.begin(), header.end() - 1);
    rec.sampling_rate_hz = manifest.sampling_rate_hz;
    rec.subject_id = entry.subject_id;
    const std::size_t channels = rec.channel_names.size();
    const int class_count = static_cast<int>(manifest.class_names.size());

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != channels + 1)
            parse_fail(path, line_no, fields.size(),
                       "expected " + std::to_string(channels + 1) + " fields, got " +
                           std::to_string(fields.size()));
        for (std::size_t c = 0; c < channels; ++c)
            rec.samples.push_back(parse_double(fields[c], path, line_no, c + 1));
        const std::string& label_field = fields.back();
        if (label_field.empty()) {
            rec.labels.push_back(-1);
        } else {
            int label = 0;
            const auto [ptr, ec] =
                std::from_chars(label_field.data(), label_field.data() + label_field.size(), label);
            if (ec != std::errc() || ptr != label_field.data() + label_field.size())
                parse_fail(path, line_no, channels + 1, "bad label '" + label_field + "'");
            if (label < 0 || label >= class_count)
                raise(ErrorCode::LabelMismatch,
                      path.filename().string() + ":" + std::to_string(line_no) + ": label " +
                          std::to_string(label) + " outside declared class count " +
                          std::to_string(class_count));
            rec.labels.push_back(label);
        }
    }
    return rec;
}

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

} // namespace

Corpus load_csv_corpus(const fs::path& manifest_path) {
    Corpus corpus;
    corpus.manifest = manifest_from_text(read_text_file(manifest_path));
    if (corpus.manifest.class_names.size() < 2)
        raise(ErrorCode::BadConfig, "manifest must declare at least 2 classes");
    if (!(corpus.manifest.sampling_rate_hz > 0.0))
        raise(ErrorCode::BadSamplingRate, "manifest sampling rate must be positive");

    const fs::path dir = manifest_path.parent_path();
    std::vector<std::string> shared_names;
    for (const CorpusManifest::Entry& entry : corpus.manifest.recordings) {
        Recording rec = load_recording(dir / entry.file, corpus.manifest, entry);
        if (corpus.recordings.empty()) {
            shared_names = rec.channel_names;
        } else if (rec.channel_names != shared_names) {
            raise(ErrorCode::ShapeMismatch,
                  entry.file + ": channel names differ from the first recording");
        }
        corpus.recordings.push_back(std::move(rec));
    }
    return corpus;
}

void write_csv_corpus(const Corpus& corpus, const fs::path& dir) {
    fs::create_directories(dir);
    write_text_file(dir / "manifest.json", to_text(corpus.manifest));
    if (corpus.recordings.size() != corpus.manifest.recordings.size())
        raise(ErrorCode::BadConfig, "manifest entry count does not match recordings");
    for (std::size_t i = 0; i < corpus.recordings.size(); ++i) {
        const Recording& rec = corpus.recordings[i];
        std::string out;
        for (std::size_t c = 0; c < rec.channel_names.size(); ++c) {
            out += rec.channel_names[c];
            out += ',';
        }
        out += "label\n";
        const std::size_t channels = rec.channels();
        for (std::size_t t = 0; t < rec.length(); ++t) {
            for (std::size_t c = 0; c < channels; ++c) {
                out += format_double(rec.samples[t * channels + c]);
                out += ',';
            }
            if (rec.labels[t] >= 0) out += std::to_string(rec.labels[t]);
            out += '\n';
        }
        write_text_file(dir / corpus.manifest.recordings[i].file, out);
    }
}

// ---------------------------------------------------------------------------
// Windowing, normalization, folds
// ---------------------------------------------------------------------------

std::vector<LabeledWindow> sliding_windows(const Recording& rec, std::size_t window_len,
                                           double overlap) {
    if (window_len < 2) raise(ErrorCode::BadConfig, "window length must be >= 2");
    if (!(overlap >= 0.0) || overlap >= 1.0)
        raise(ErrorCode::BadConfig, "overlap must lie in [0,1)");
    const std::size_t t_raw = rec.length();
    if (window_len > t_raw)
        raise(ErrorCode::WindowTooLong, "window length " + std::to_string(window_len) +
                                            " exceeds recording length " +
                                            std::to_string(t_raw));
    if (rec.labels.size() != t_raw)
        raise(ErrorCode::LabelMismatch, "label track length does not match the recording");

    const std::size_t stride = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(
               static_cast<double>(window_len) * (1.0 - overlap) + 0.5)));

    const std::size_t channels = rec.channels();
    std::vector<LabeledWindow> windows;
    std::vector<long long> counts;
    for (std::size_t start = 0; start + window_len <= t_raw; start += stride) {
        // Plurality label; ties prefer the lowest class index, null loses ties.
        counts.assign(counts.size(), 0);
        long long null_count = 0;
        int best = -1;
        long long best_count = 0;
        for (std::size_t t = start; t < start + window_len; ++t) {
            const int label = rec.labels[t];
            if (label < 0) {
                ++null_count;
                continue;
            }
            if (static_cast<std::size_t>(label) >= counts.size())
                counts.resize(static_cast<std::size_t>(label) + 1, 0);
            const long long c = ++counts[static_cast<std::size_t>(label)];
            if (c > best_count || (c == best_count && label < best)) {
                best = label;
                best_count = c;
            }
        }
        if (best < 0 || null_count > best_count) continue;  // null-majority dropped

        LabeledWindow lw;
        lw.label = best;
        lw.subject_id = rec.subject_id;
        lw.window.channel_names = rec.channel_names;
        lw.window.sampling_rate_hz = rec.sampling_rate_hz;
        lw.window.values.resize(channels * window_len);
        for (std::size_t c = 0; c < channels; ++c)
            for (std::size_t t = 0; t < window_len; ++t)
                lw.window.values[c * window_len + t] = rec.samples[(start + t) * channels + c];
        windows.push_back(std::move(lw));
    }
    return windows;
}

NormStats fit_norm_stats(const std::vector<LabeledWindow>& windows) {
    if (windows.empty()) raise(ErrorCode::EmptyDataset, "norm stats need at least one window");
    const std::size_t channels = windows.front().window.channels();
    const std::size_t steps = windows.front().window.timesteps();
    NormStats stats;
    stats.mean.assign(channels, 0.0);
    stats.variance.assign(channels, 0.0);
    const double n = static_cast<double>(windows.size() * steps);
    for (const LabeledWindow& lw : windows) {
        for (std::size_t c = 0; c < channels; ++c) {
            const auto ch = lw.window.channel(c);
            for (double v : ch) stats.mean[c] += v;
        }
    }
    for (std::size_t c = 0; c < channels; ++c) stats.mean[c] /= n;
    for (const LabeledWindow& lw : windows) {
        for (std::size_t c = 0; c < channels; ++c) {
            const auto ch = lw.window.channel(c);
            const double mu = stats.mean[c];
            for (double v : ch) stats.variance[c] += (v - mu) * (v - mu);
        }
    }
    for (std::size_t c = 0; c < channels; ++c) stats.variance[c] /= n;
    return stats;
}

Window apply_norm(const NormStats& stats, const Window& w) {
    const std::size_t channels = w.channels();
    if (stats.mean.size() != channels || stats.variance.size() != channels)
        raise(ErrorCode::ShapeMismatch, "norm stats do not match the window channel count");
    Window out = w;
    for (std::size_t c = 0; c < channels; ++c) {
        auto ch = out.channel(c);
        const double mu = stats.mean[c];
        // Zero-variance channels are centered but left unscaled.
        const double inv_sd = stats.variance[c] > 0.0 ? 1.0 / std::sqrt(stats.variance[c]) : 1.0;
        for (double& v : ch) v = (v - mu) * inv_sd;
    }
    return out;
}

namespace {

// Deterministic stratified ~10% split: within each class (stable order),
// every 10th window goes to val. Falls back to one window per multi-window
// class when the corpus is too small for the 10% rule to pick anything.
void split_train_val(const Dataset& rest, Dataset& train, Dataset& val) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < rest.windows.size(); ++i)
        by_class[rest.windows[i].label].push_back(i);

    std::set<std::size_t> val_idx;
    for (const auto& [label, idx] : by_class)
        for (std::size_t pos = 9; pos < idx.size(); pos += 10) val_idx.insert(idx[pos]);
    if (val_idx.empty()) {
        for (const auto& [label, idx] : by_class)
            if (idx.size() >= 2) val_idx.insert(idx.back());
    }
    if (val_idx.empty() && rest.windows.size() >= 2)
        val_idx.insert(rest.windows.size() - 1);
    if (val_idx.empty())
        raise(ErrorCode::EmptyDataset, "not enough windows to carve out a validation split");

    train.class_names = rest.class_names;
    val.class_names = rest.class_names;
    for (std::size_t i = 0; i < rest.windows.size(); ++i) {
        if (val_idx.count(i))
            val.windows.push_back(rest.windows[i]);
        else
            train.windows.push_back(rest.windows[i]);
    }
}

std::vector<std::string> sorted_subjects(const std::vector<LabeledWindow>& windows) {
    std::set<std::string> subjects;
    for (const LabeledWindow& lw : windows) subjects.insert(lw.subject_id);
    return {subjects.begin(), subjects.end()};
}

} // namespace

std::pair<Dataset, Dataset> stratified_val_split(const Dataset& dataset) {
    std::pair<Dataset, Dataset> out;
    split_train_val(dataset, out.first, out.second);
    return out;
}

std::vector<LosoFold> loso_folds(const Dataset& dataset) {
    validate_dataset(dataset);
    const std::vector<std::string> subjects = sorted_subjects(dataset.windows);
    if (subjects.size() < 2)
        raise(ErrorCode::TooFewSubjects,
              "leave-one-subject-out needs >= 2 subjects, got " +
                  std::to_string(subjects.size()));

    std::vector<LosoFold> folds;
    for (const std::string& held_out : subjects) {
        LosoFold fold;
        fold.held_out_subject = held_out;
        fold.test.class_names = dataset.class_names;
        Dataset rest;
        rest.class_names = dataset.class_names;
        for (const LabeledWindow& lw : dataset.windows) {
            if (lw.subject_id == held_out)
                fold.test.windows.push_back(lw);
            else
                rest.windows.push_back(lw);
        }
        split_train_val(rest, fold.train, fold.val);
        folds.push_back(std::move(fold));
    }
    return folds;
}

Dataset windows_from_corpus(const Corpus& corpus, std::size_t window_len, double overlap) {
    Dataset out;
    out.class_names = corpus.manifest.class_names;
    for (const Recording& rec : corpus.recordings) {
        std::vector<LabeledWindow> windows = sliding_windows(rec, window_len, overlap);
        out.windows.insert(out.windows.end(), std::make_move_iterator(windows.begin()),
                           std::make_move_iterator(windows.end()));
    }
    return out;
}

std::vector<LosoFold> loso_folds_from_corpus(const Corpus& corpus, std::size_t window_len,
                                             double train_overlap, double test_overlap) {
    const Dataset train_side = windows_from_corpus(corpus, window_len, train_overlap);
    const Dataset test_side = windows_from_corpus(corpus, window_len, test_overlap);

    const std::vector<std::string> subjects = sorted_subjects(train_side.windows);
    if (subjects.size() < 2)
        raise(ErrorCode::TooFewSubjects,
              "leave-one-subject-out needs >= 2 subjects, got " +
                  std::to_string(subjects.size()));

    std::vector<LosoFold> folds;
    for (const std::string& held_out : subjects) {
        LosoFold fold;
        fold.held_out_subject = held_out;
        fold.test.class_names = corpus.manifest.class_names;
        for (const LabeledWindow& lw : test_side.windows)
            if (lw.subject_id == held_out) fold.test.windows.push_back(lw);
        Dataset rest;
        rest.class_names = corpus.manifest.class_names;
        for (const LabeledWindow& lw : train_side.windows)
            if (lw.subject_id != held_out) rest.windows.push_back(lw);
        split_train_val(rest, fold.train, fold.val);
        folds.push_back(std::move(fold));
    }
    return folds;
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

Dataset generate_synthetic(const SyntheticSpec& spec, SeededRng& rng) {
    validate_synthetic_spec(spec);

    Dataset out;
    out.class_names.reserve(spec.classes);
    for (std::size_t c = 0; c < spec.classes; ++c)
        out.class_names.push_back("class_" + std::to_string(c));

    std::vector<std::string> channel_names;
    for (std::size_t c = 0; c < spec.channels; ++c)
        channel_names.push_back("ch" + std::to_string(c));

    const std::size_t seg_lo =
        spec.mode == SyntheticSpec::Mode::Segment ? spec.segment_start : 0;
    const std::size_t seg_hi =
        spec.mode == SyntheticSpec::Mode::Segment ? spec.segment_end : spec.timesteps;

    for (std::size_t s = 0; s < spec.subjects; ++s) {
        SeededRng subject_rng = rng.split(0x5000 + s);
        const double subject_amp =
            1.0 + subject_rng.uniform(-spec.subject_amp_jitter, spec.subject_amp_jitter);
        char subject_name[16];
        std::snprintf(subject_name, sizeof(subject_name), "s%02zu", s);

        for (std::size_t c = 0; c < spec.classes; ++c) {
            const double carrier = spec.carriers_hz[c];
            for (std::size_t n = 0; n < spec.windows_per_subject_per_class; ++n) {
                const double amp =
                    spec.amplitude * subject_amp *
                    (1.0 + subject_rng.uniform(-spec.window_amp_jitter, spec.window_amp_jitter));
                LabeledWindow lw;
                lw.label = static_cast<int>(c);
                lw.subject_id = subject_name;
                lw.window.channel_names = channel_names;
                lw.window.sampling_rate_hz = spec.sampling_rate_hz;
                lw.window.values.resize(spec.channels * spec.timesteps);
                subject_rng.fill_normal(lw.window.values, 0.0, spec.noise_floor);
                for (std::size_t ch = 0; ch < spec.channels; ++ch) {
                    auto values = lw.window.channel(ch);
                    for (std::size_t t = seg_lo; t < seg_hi; ++t) {
                        const double phase = 2.0 * std::numbers::pi * carrier *
                                             (static_cast<double>(t) / spec.sampling_rate_hz);
                        values[t] += amp * std::sin(phase);
                    }
                }
                out.windows.push_back(std::move(lw));
            }
        }
    }
    return out;
}

Corpus synthetic_corpus(const SyntheticSpec& spec, SeededRng& rng) {
    const Dataset dataset = generate_synthetic(spec, rng);

    Corpus corpus;
    corpus.manifest.sampling_rate_hz = spec.sampling_rate_hz;
    corpus.manifest.class_names = dataset.class_names;

    // One recording per subject, windows tiled back to back.
    std::map<std::string, std::vector<const LabeledWindow*>> by_subject;
    for (const LabeledWindow& lw : dataset.windows) by_subject[lw.subject_id].push_back(&lw);

    for (const auto& [subject, windows] : by_subject) {
        Recording rec;
        rec.channel_names = windows.front()->window.channel_names;
        rec.sampling_rate_hz = spec.sampling_rate_hz;
        rec.subject_id = subject;
        const std::size_t channels = spec.channels;
        const std::size_t steps = spec.timesteps;
        rec.samples.reserve(windows.size() * steps * channels);
        rec.labels.reserve(windows.size() * steps);
        for (const LabeledWindow* lw : windows) {
            for (std::size_t t = 0; t < steps; ++t) {
                for (std::size_t c = 0; c < channels; ++c)
                    rec.samples.push_back(lw->window.values[c * steps + t]);
                rec.labels.push_back(lw->label);
            }
        }
        corpus.manifest.recordings.push_back({subject + ".csv", subject});
        corpus.recordings.push_back(std::move(rec));
    }
    return corpus;
}

} // namespace cdaug
