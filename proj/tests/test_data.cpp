#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "cdaug/data.hpp"
#include "cdaug/dft.hpp"
#include "cdaug/serialize.hpp"
#include "helpers.hpp"

using namespace cdaug;
using namespace cdaug::testing;
namespace fs = std::filesystem;

namespace {

Recording make_recording(std::size_t t_raw, std::size_t channels, int label,
                         const std::string& subject = "s0", double fs = 50.0) {
    Recording rec;
    rec.sampling_rate_hz = fs;
    rec.subject_id = subject;
    for (std::size_t c = 0; c < channels; ++c)
        rec.channel_names.push_back("ch" + std::to_string(c));
    rec.samples.assign(t_raw * channels, 0.0);
    for (std::size_t i = 0; i < rec.samples.size(); ++i)
        rec.samples[i] = static_cast<double>(i) * 0.01;
    rec.labels.assign(t_raw, label);
    return rec;
}

fs::path temp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("cdaug_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("sliding windows: 50% overlap on a 250-sample recording") {
    const Recording rec = make_recording(250, 1, 0);
    const auto windows = sliding_windows(rec, 100, 0.5);
    REQUIRE(windows.size() == 4);  // starts 0, 50, 100, 150
    CHECK(windows[0].window.values[0] == doctest::Approx(0.0));
    CHECK(windows[1].window.values[0] == doctest::Approx(0.5));   // sample 50
    CHECK(windows[3].window.values[0] == doctest::Approx(1.5));   // sample 150
}

TEST_CASE("sliding windows: 90% overlap gives stride 10") {
    const Recording rec = make_recording(130, 1, 1);
    const auto windows = sliding_windows(rec, 100, 0.9);
    REQUIRE(windows.size() == 4);  // starts 0, 10, 20, 30
    CHECK(windows[1].window.values[0] == doctest::Approx(0.1));
}

TEST_CASE("sliding windows: zero overlap tiles the recording") {
    const Recording rec = make_recording(505, 2, 0);
    const auto windows = sliding_windows(rec, 100, 0.0);
    CHECK(windows.size() == 5);
}

TEST_CASE("window count matches a brute-force enumeration oracle") {
    SeededRng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t window_len = 2 + rng.uniform_int(60);
        const std::size_t t_raw = window_len + rng.uniform_int(300);
        const double overlap = rng.uniform(0.0, 0.95);
        const Recording rec = make_recording(t_raw, 1, 0);
        const auto windows = sliding_windows(rec, window_len, overlap);

        const std::size_t stride = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(window_len * (1.0 - overlap) + 0.5)));
        std::size_t expected = 0;
        for (std::size_t start = 0; start + window_len <= t_raw; start += stride) ++expected;
        CHECK(windows.size() == expected);
    }
}

TEST_CASE("window labels: plurality wins, null-majority windows are dropped") {
    Recording rec = make_recording(10, 1, 0);
    rec.labels = {0, 0, 1, 1, 1, -1, -1, -1, -1, 0};
    // Window over all 10: class0 x3, class1 x3, null x4 -> null has plurality
    // over no single class? class best = 0 (tie 3 vs 3, lowest index), null 4 > 3 -> dropped.
    CHECK(sliding_windows(rec, 10, 0.0).empty());

    rec.labels = {0, 0, 1, 1, 1, 1, -1, -1, -1, 0};
    // class1 x4 >= null x3 -> kept with label 1.
    const auto windows = sliding_windows(rec, 10, 0.0);
    REQUIRE(windows.size() == 1);
    CHECK(windows[0].label == 1);
}

TEST_CASE("window too long raises") {
    const Recording rec = make_recording(50, 1, 0);
    CHECK_THROWS_AS(sliding_windows(rec, 51, 0.0), Error);
}

TEST_CASE("norm stats: constant channels center to zero without blowing up") {
    std::vector<LabeledWindow> windows;
    for (int i = 0; i < 4; ++i) {
        LabeledWindow lw;
        lw.window = make_window(2, 8, 50.0, 3.0);  // constant 3.0 everywhere
        lw.label = 0;
        windows.push_back(lw);
    }
    const NormStats stats = fit_norm_stats(windows);
    CHECK(stats.variance[0] == 0.0);
    const Window normed = apply_norm(stats, windows[0].window);
    for (double v : normed.values) CHECK(v == 0.0);
}

TEST_CASE("normalized training pool has mean 0 and variance 1") {
    SeededRng rng(2);
    std::vector<LabeledWindow> windows;
    for (int i = 0; i < 50; ++i) {
        LabeledWindow lw;
        lw.window = random_window(3, 20, rng);
        for (auto& v : lw.window.values) v = v * 2.5 - 4.0;
        lw.label = 0;
        windows.push_back(lw);
    }
    const NormStats stats = fit_norm_stats(windows);
    std::vector<LabeledWindow> normed = windows;
    for (auto& lw : normed) lw.window = apply_norm(stats, lw.window);
    const NormStats after = fit_norm_stats(normed);
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(std::abs(after.mean[c]) < 1e-6);
        CHECK(std::abs(after.variance[c] - 1.0) < 1e-6);
    }
}

TEST_CASE("apply_norm is affine in its input") {
    SeededRng rng(3);
    const Window w = random_window(1, 10, rng);
    NormStats stats;
    stats.mean = {1.5};
    stats.variance = {4.0};
    const Window n1 = apply_norm(stats, w);
    // norm(a*x + b) == a * norm(x) + (b + (a-1)*mean) / sd
    const double a = 2.0, b = 1.0;
    const double shift = (b + (a - 1.0) * stats.mean[0]) / std::sqrt(stats.variance[0]);
    Window scaled = w;
    for (double& v : scaled.values) v = a * v + b;
    const Window n2 = apply_norm(stats, scaled);
    for (std::size_t t = 0; t < 10; ++t)
        CHECK(n2.values[t] == doctest::Approx(a * n1.values[t] + shift).epsilon(1e-12));
}

TEST_CASE("loso folds: one per subject, no leakage, disjoint test union") {
    SyntheticSpec spec;
    spec.subjects = 8;
    spec.windows_per_subject_per_class = 5;
    spec.classes = 4;
    spec.timesteps = 32;
    spec.segment_start = 10;
    spec.segment_end = 22;
    spec.carriers_hz = {3, 7, 11, 15};
    SeededRng rng(4);
    const Dataset dataset = generate_synthetic(spec, rng);
    const auto folds = loso_folds(dataset);
    REQUIRE(folds.size() == 8);

    std::size_t total_test = 0;
    std::set<std::string> seen_subjects;
    for (const LosoFold& fold : folds) {
        seen_subjects.insert(fold.held_out_subject);
        total_test += fold.test.size();
        for (const LabeledWindow& lw : fold.test.windows)
            CHECK(lw.subject_id == fold.held_out_subject);
        for (const LabeledWindow& lw : fold.train.windows)
            CHECK(lw.subject_id != fold.held_out_subject);
        for (const LabeledWindow& lw : fold.val.windows)
            CHECK(lw.subject_id != fold.held_out_subject);
        CHECK_FALSE(fold.val.empty());
        CHECK(fold.train.size() + fold.val.size() + fold.test.size() == dataset.size());
        // Stratified val: roughly 10%.
        const double frac = static_cast<double>(fold.val.size()) /
                            static_cast<double>(fold.train.size() + fold.val.size());
        CHECK(frac > 0.05);
        CHECK(frac < 0.15);
    }
    CHECK(seen_subjects.size() == 8);
    CHECK(total_test == dataset.size());
}

TEST_CASE("loso folds require at least two subjects") {
    SyntheticSpec spec;
    spec.subjects = 1;
    spec.classes = 2;
    spec.carriers_hz = {3, 7};
    spec.timesteps = 32;
    spec.segment_start = 10;
    spec.segment_end = 22;
    SeededRng rng(5);
    const Dataset dataset = generate_synthetic(spec, rng);
    CHECK_THROWS_AS(loso_folds(dataset), Error);
}

TEST_CASE("synthetic dataset: counting and determinism") {
    SyntheticSpec spec;
    spec.classes = 3;
    spec.subjects = 4;
    spec.windows_per_subject_per_class = 7;
    spec.carriers_hz = {2, 5, 9};
    spec.timesteps = 48;
    spec.segment_start = 16;
    spec.segment_end = 32;
    SeededRng rng_a(6), rng_b(6);
    const Dataset a = generate_synthetic(spec, rng_a);
    const Dataset b = generate_synthetic(spec, rng_b);
    CHECK(a.size() == 3 * 4 * 7);
    CHECK(a == b);
}

TEST_CASE("segment plant: class-conditional means agree outside the segment") {
    SyntheticSpec spec;
    spec.classes = 2;
    spec.subjects = 2;
    spec.windows_per_subject_per_class = 2500;  // 10k windows total
    spec.carriers_hz = {3, 7};
    spec.channels = 1;
    spec.timesteps = 96;
    spec.segment_start = 40;
    spec.segment_end = 60;
    spec.noise_floor = 0.5;
    SeededRng rng(7);
    const Dataset d = generate_synthetic(spec, rng);

    std::vector<double> mean0(96, 0.0), mean1(96, 0.0);
    std::size_t n0 = 0, n1 = 0;
    for (const LabeledWindow& lw : d.windows) {
        auto& acc = lw.label == 0 ? mean0 : mean1;
        (lw.label == 0 ? n0 : n1) += 1;
        for (std::size_t t = 0; t < 96; ++t) acc[t] += lw.window.values[t];
    }
    for (std::size_t t = 0; t < 96; ++t) {
        mean0[t] /= static_cast<double>(n0);
        mean1[t] /= static_cast<double>(n1);
    }
    // Outside [40,60): both are pure noise, so means agree within Monte Carlo
    // error (6 standard errors of the difference).
    const double se = 0.5 * std::sqrt(1.0 / n0 + 1.0 / n1);
    for (std::size_t t = 0; t < 96; ++t) {
        if (t >= 40 && t < 60) continue;
        CHECK(std::abs(mean0[t] - mean1[t]) < 6.0 * se);
    }
    // Inside the segment the classes must differ somewhere.
    double max_diff = 0.0;
    for (std::size_t t = 40; t < 60; ++t)
        max_diff = std::max(max_diff, std::abs(mean0[t] - mean1[t]));
    CHECK(max_diff > 0.5);
}

TEST_CASE("band plant: spectrum peaks at the class carrier bin") {
    SyntheticSpec spec;
    spec.mode = SyntheticSpec::Mode::Band;
    spec.classes = 4;
    spec.subjects = 1;
    spec.windows_per_subject_per_class = 3;
    spec.carriers_hz = {3, 7, 11, 15};
    spec.channels = 1;
    spec.timesteps = 96;
    spec.sampling_rate_hz = 32.0;
    spec.noise_floor = 0.3;
    SeededRng rng(8);
    const Dataset d = generate_synthetic(spec, rng);
    for (const LabeledWindow& lw : d.windows) {
        const auto spectrum = dft(lw.window.channel(0));
        std::size_t peak = 1;
        for (std::size_t k = 1; k <= 48; ++k)
            if (std::norm(spectrum[k]) > std::norm(spectrum[peak])) peak = k;
        const double carrier = spec.carriers_hz[static_cast<std::size_t>(lw.label)];
        const std::size_t expected =
            static_cast<std::size_t>(std::llround(carrier * 96.0 / 32.0));
        CHECK(peak == expected);
    }
}

TEST_CASE("csv corpus round-trips through the interchange format") {
    SyntheticSpec spec;
    spec.classes = 2;
    spec.subjects = 2;
    spec.windows_per_subject_per_class = 3;
    spec.carriers_hz = {3, 7};
    spec.timesteps = 32;
    spec.segment_start = 10;
    spec.segment_end = 22;
    SeededRng rng(9);
    const Corpus corpus = synthetic_corpus(spec, rng);

    const fs::path dir = temp_dir("csv_roundtrip");
    write_csv_corpus(corpus, dir);
    const Corpus loaded = load_csv_corpus(dir / "manifest.json");

    CHECK(loaded.manifest == corpus.manifest);
    REQUIRE(loaded.recordings.size() == corpus.recordings.size());
    for (std::size_t i = 0; i < loaded.recordings.size(); ++i)
        CHECK(loaded.recordings[i] == corpus.recordings[i]);

    // Tiled windows reconstruct the original dataset exactly.
    SeededRng rng2(9);
    const Dataset original = generate_synthetic(spec, rng2);
    const Dataset rebuilt = windows_from_corpus(loaded, spec.timesteps, 0.0);
    CHECK(rebuilt.size() == original.size());
    fs::remove_all(dir);
}

TEST_CASE("csv loader rejects a missing label column") {
    const fs::path dir = temp_dir("csv_nolabel");
    CorpusManifest manifest;
    manifest.sampling_rate_hz = 50.0;
    manifest.class_names = {"a", "b"};
    manifest.recordings.push_back({"r0.csv", "s0"});
    write_text_file(dir / "manifest.json", to_text(manifest));
    write_text_file(dir / "r0.csv", "ch0,ch1\n1.0,2.0\n");
    try {
        load_csv_corpus(dir / "manifest.json");
        FAIL("expected LabelMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::LabelMismatch);
    }
    fs::remove_all(dir);
}

TEST_CASE("csv loader reports parse errors with file, line and column") {
    const fs::path dir = temp_dir("csv_badcell");
    CorpusManifest manifest;
    manifest.sampling_rate_hz = 50.0;
    manifest.class_names = {"a", "b"};
    manifest.recordings.push_back({"r0.csv", "s0"});
    write_text_file(dir / "manifest.json", to_text(manifest));
    write_text_file(dir / "r0.csv", "ch0,label\n1.0,0\nbogus,1\n");
    try {
        load_csv_corpus(dir / "manifest.json");
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ParseError);
        CHECK(std::string(e.what()).find("r0.csv:3:1") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("empty manifest yields an empty corpus") {
    const fs::path dir = temp_dir("csv_empty");
    CorpusManifest manifest;
    manifest.sampling_rate_hz = 50.0;
    manifest.class_names = {"a", "b"};
    write_text_file(dir / "manifest.json", to_text(manifest));
    const Corpus corpus = load_csv_corpus(dir / "manifest.json");
    CHECK(corpus.recordings.empty());
    fs::remove_all(dir);
}

TEST_CASE("corpus-level loso folds can window test subjects differently") {
    SyntheticSpec spec;
    spec.classes = 2;
    spec.subjects = 3;
    spec.windows_per_subject_per_class = 4;
    spec.carriers_hz = {3, 7};
    spec.timesteps = 32;
    spec.segment_start = 10;
    spec.segment_end = 22;
    SeededRng rng(10);
    const Corpus corpus = synthetic_corpus(spec, rng);
    const auto folds = loso_folds_from_corpus(corpus, 32, 0.0, 0.75);
    REQUIRE(folds.size() == 3);
    // Test side uses stride 8 instead of 32, so it has more windows than the
    // subject contributed at overlap 0.
    for (const LosoFold& fold : folds) {
        CHECK(fold.test.size() > 8);
        for (const LabeledWindow& lw : fold.test.windows)
            CHECK(lw.subject_id == fold.held_out_subject);
    }
}

TEST_CASE("synthetic spec validation") {
    SyntheticSpec spec;
    spec.carriers_hz = {3, 7, 11, 40};  // 40 >= Nyquist of 16
    CHECK_THROWS_AS(validate_synthetic_spec(spec), Error);
    spec.carriers_hz = {3, 7, 11};  // wrong count
    CHECK_THROWS_AS(validate_synthetic_spec(spec), Error);
}
