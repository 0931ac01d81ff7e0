#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cdaug/dft.hpp"
#include "cdaug/transforms.hpp"
#include "helpers.hpp"

using namespace cdaug;
using namespace cdaug::testing;

TEST_CASE("jitter with alpha 0 is the identity") {
    SeededRng rng(1);
    const Window w = random_window(3, 40, rng);
    const std::vector<double> sigma2 = {1.0, 2.0, 3.0};
    SeededRng jrng(2);
    CHECK(jitter(w, 0.0, std::nullopt, sigma2, jrng) == w);
}

TEST_CASE("jitter with zero variance is the identity") {
    SeededRng rng(3);
    const Window w = random_window(2, 30, rng);
    const std::vector<double> sigma2 = {0.0, 0.0};
    SeededRng jrng(4);
    CHECK(jitter(w, 0.1, std::nullopt, sigma2, jrng) == w);
}

TEST_CASE("jitter noise variance matches alpha * sigma2 (Monte Carlo)") {
    // alpha 0.1, sigma2 4 => target 0.4; tolerance three standard errors of a
    // sample variance over n draws.
    const std::size_t steps = 200;
    const std::size_t reps = 500;  // 100k draws
    const double target = 0.4;
    Window w = make_window(1, steps);
    const std::vector<double> sigma2 = {4.0};
    SeededRng rng(5);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
        const Window out = jitter(w, 0.1, std::nullopt, sigma2, rng);
        for (std::size_t t = 0; t < steps; ++t) {
            const double d = out.values[t] - w.values[t];
            sum += d;
            sum_sq += d * d;
        }
    }
    const double n = static_cast<double>(steps * reps);
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    const double se = target * std::sqrt(2.0 / (n - 1));
    CHECK(std::abs(var - target) < 3.0 * se);
    CHECK(std::abs(mean) < 3.0 * std::sqrt(target / n));
}

TEST_CASE("band-limited jitter keeps out-of-band leakage under 1%") {
    const std::size_t steps = 96;
    Window w = make_window(2, steps, 32.0);
    const std::vector<double> sigma2 = {1.0, 1.5};
    const Band band{4.0, 8.0};
    SeededRng rng(6);
    for (int rep = 0; rep < 20; ++rep) {
        const Window out = jitter(w, 0.2, band, sigma2, rng);
        for (std::size_t c = 0; c < 2; ++c) {
            std::vector<double> noise(steps);
            for (std::size_t t = 0; t < steps; ++t) noise[t] = out.at(c, t) - w.at(c, t);
            const auto spectrum = dft(noise);
            double in_band = 0.0, total = 0.0;
            for (std::size_t k = 0; k <= steps / 2; ++k) {
                const double f = bin_frequency(k, steps, 32.0);
                const double p = std::norm(spectrum[k]);
                total += p;
                if (f > band.lo && f <= band.hi) in_band += p;
            }
            REQUIRE(total > 0.0);
            CHECK((total - in_band) / total < 0.01);
        }
    }
}

TEST_CASE("band-limited jitter hits the target variance exactly per draw") {
    const std::size_t steps = 128;
    Window w = make_window(1, steps, 64.0);
    const std::vector<double> sigma2 = {2.0};
    SeededRng rng(7);
    const Window out = jitter(w, 0.25, Band{8.0, 16.0}, sigma2, rng);
    double sum_sq = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
        const double d = out.values[t] - w.values[t];
        sum_sq += d * d;
    }
    CHECK(sum_sq / steps == doctest::Approx(0.25 * 2.0).epsilon(1e-9));
}

TEST_CASE("jitter rejects bad bands and negative alpha") {
    Window w = make_window(1, 10, 20.0);  // Nyquist 10
    const std::vector<double> sigma2 = {1.0};
    SeededRng rng(8);
    CHECK_THROWS_AS(jitter(w, 0.1, Band{5.0, 15.0}, sigma2, rng), Error);
    CHECK_THROWS_AS(jitter(w, -0.5, std::nullopt, sigma2, rng), Error);
    // Band narrower than one bin: no resolvable bin inside.
    CHECK_THROWS_AS(jitter(w, 0.1, Band{0.1, 0.2}, sigma2, rng), Error);
}

TEST_CASE("clip hand-enumerated case") {
    // T=10, clip [2,5): interpolate between index 1 (value 1) and index 5
    // (value 9) => 3, 5, 7.
    Window w = make_window(1, 10);
    w.values = {0, 1, 2, 9, 9, 9, 6, 7, 8, 9};
    const Window out = clip(w, 0.2, 0.3);
    CHECK(out.values[2] == doctest::Approx(3.0));
    CHECK(out.values[3] == doctest::Approx(5.0));
    CHECK(out.values[4] == doctest::Approx(7.0));
    for (std::size_t t : {0, 1, 5, 6, 7, 8, 9}) CHECK(out.values[t] == w.values[t]);
}

TEST_CASE("clip with ratio 0 is the identity") {
    SeededRng rng(9);
    const Window w = random_window(2, 25, rng);
    CHECK(clip(w, 0.4, 0.0) == w);
}

TEST_CASE("clip is exact on linear ramps for interior segments") {
    SeededRng rng(10);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t steps = 10 + rng.uniform_int(90);
        Window w = make_window(1, steps);
        const double a = rng.uniform(-5.0, 5.0);
        const double b = rng.uniform(-2.0, 2.0);
        for (std::size_t t = 0; t < steps; ++t)
            w.values[t] = a + b * static_cast<double>(t);
        // Keep one anchor on each side.
        const double start = rng.uniform(0.5 / steps, 0.6);
        const double ratio = rng.uniform(0.0, 0.9 - start);
        const auto [s, len] = segment_bounds(start, ratio, steps);
        if (s == 0 || s + len >= steps) continue;
        const Window out = clip(w, start, ratio);
        for (std::size_t t = 0; t < steps; ++t)
            CHECK(out.values[t] == doctest::Approx(w.values[t]).epsilon(1e-12));
    }
}

TEST_CASE("clip edge rules hold the nearest surviving sample flat") {
    Window w = make_window(1, 8);
    w.values = {5, 6, 7, 8, 9, 10, 11, 12};
    const Window head = clip(w, 0.0, 0.25);  // [0,2) filled from value at 2
    CHECK(head.values[0] == 7.0);
    CHECK(head.values[1] == 7.0);
    const Window tail = clip(w, 0.75, 0.25);  // [6,8) filled from value at 5
    CHECK(tail.values[6] == 10.0);
    CHECK(tail.values[7] == 10.0);
}

TEST_CASE("segment_out hand-enumerated positions") {
    // C=2, T=4, mask channel 1 over [1,3).
    Window w = make_window(2, 4);
    for (std::size_t i = 0; i < 8; ++i) w.values[i] = static_cast<double>(i + 1);
    const Window out = segment_out(w, {1}, 0.25, 0.5);
    CHECK(out.at(1, 1) == 0.0);
    CHECK(out.at(1, 2) == 0.0);
    CHECK(out.at(0, 0) == w.at(0, 0));
    CHECK(out.at(0, 1) == w.at(0, 1));
    CHECK(out.at(0, 2) == w.at(0, 2));
    CHECK(out.at(0, 3) == w.at(0, 3));
    CHECK(out.at(1, 0) == w.at(1, 0));
    CHECK(out.at(1, 3) == w.at(1, 3));
}

TEST_CASE("segment_out with full mask zeroes the window; ratio 0 is identity") {
    SeededRng rng(11);
    const Window w = random_window(3, 20, rng);
    const Window zeroed = segment_out(w, {0, 1, 2}, 0.0, 1.0);
    for (double v : zeroed.values) CHECK(v == 0.0);
    CHECK(segment_out(w, {0, 1, 2}, 0.3, 0.0) == w);
}

TEST_CASE("sensor_out zeroes selected channels only") {
    SeededRng rng(12);
    const Window w = random_window(3, 15, rng);
    const Window out = sensor_out(w, {0});
    for (std::size_t t = 0; t < 15; ++t) {
        CHECK(out.at(0, t) == 0.0);
        CHECK(out.at(1, t) == w.at(1, t));
        CHECK(out.at(2, t) == w.at(2, t));
    }
    CHECK_THROWS_AS(sensor_out(w, {}), Error);
    const Window all = sensor_out(w, {0, 1, 2});
    for (double v : all.values) CHECK(v == 0.0);
}

TEST_CASE("keep_only preserves exactly the requested indices") {
    SeededRng rng(13);
    const Window w = random_window(1, 10, rng);
    const Window out = keep_only(w, 0.4, 0.3);  // keep [4,7)
    for (std::size_t t = 0; t < 10; ++t) {
        if (t >= 4 && t < 7)
            CHECK(out.values[t] == w.values[t]);
        else
            CHECK(out.values[t] == 0.0);
    }
    CHECK(keep_only(w, 0.0, 1.0) == w);
    CHECK_THROWS_AS(keep_only(w, 0.0, 0.0), Error);
}

TEST_CASE("keep_only and segment_out partition the window") {
    SeededRng rng(14);
    const Window w = random_window(2, 30, rng);
    const Window kept = keep_only(w, 0.2, 0.4);
    const Window cut = segment_out(w, {0, 1}, 0.2, 0.4);
    for (std::size_t i = 0; i < w.values.size(); ++i)
        CHECK(kept.values[i] + cut.values[i] == w.values[i]);
}

TEST_CASE("generate_transform_set: determinism, count, validity") {
    TransformSetConfig cfg;
    SeededRng rng_a(21), rng_b(21);
    const auto set_a = generate_transform_set(cfg, 50, 3, rng_a);
    const auto set_b = generate_transform_set(cfg, 50, 3, rng_b);
    CHECK(set_a == set_b);
    CHECK(set_a.size() == 50);

    SeededRng rng_c(22);
    CHECK(generate_transform_set(cfg, 0, 3, rng_c).empty());

    for (const TransformSpec& spec : set_a) {
        CHECK_NOTHROW(validate_spec(spec, 3));
        switch (spec.kind) {
            case TransformKind::Jitter:
                CHECK(spec.alpha >= 0.05);
                CHECK(spec.alpha <= 0.15);
                break;
            case TransformKind::Clip:
                CHECK(spec.ratio >= 0.1);
                CHECK(spec.ratio <= 0.3);
                break;
            case TransformKind::SegmentOut:
                CHECK(spec.ratio >= 0.05);
                CHECK(spec.ratio <= 0.15);
                break;
            case TransformKind::SensorOut:
                CHECK(spec.channels.size() <= 2);  // full sensor-out disabled by default
                break;
            case TransformKind::KeepOnly:
                FAIL("keep_only must not be generated");
        }
    }
}

TEST_CASE("apply dispatches and is a pure function of (spec, window, seed)") {
    TransformSetConfig cfg;
    SeededRng gen(23);
    const auto set = generate_transform_set(cfg, 50, 3, gen);
    SeededRng wrng(24);
    const Window w = random_window(3, 48, wrng);
    const NormStats stats = identity_stats(3);
    for (const TransformSpec& spec : set) {
        SeededRng r1(777), r2(777);
        const Window a = apply(spec, w, stats, r1);
        const Window b = apply(spec, w, stats, r2);
        CHECK(a == b);
        CHECK(a.channels() == w.channels());
        CHECK(a.timesteps() == w.timesteps());
    }
}

TEST_CASE("locality: masking transforms touch nothing outside their mask") {
    SeededRng rng(25);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t channels = 1 + rng.uniform_int(4);
        const std::size_t steps = 4 + rng.uniform_int(60);
        const Window w = random_window(channels, steps, rng);
        const double ratio = rng.uniform(0.0, 1.0);
        const double start = rng.uniform(0.0, 1.0 - ratio);
        const auto [s, len] = segment_bounds(start, ratio, steps);

        std::vector<std::size_t> subset;
        for (std::size_t c = 0; c < channels; ++c)
            if (rng.uniform() < 0.5) subset.push_back(c);
        if (subset.empty()) subset.push_back(rng.uniform_int(channels));

        const Window out = segment_out(w, subset, start, ratio);
        for (std::size_t c = 0; c < channels; ++c) {
            const bool selected =
                std::find(subset.begin(), subset.end(), c) != subset.end();
            for (std::size_t t = 0; t < steps; ++t) {
                const bool masked = selected && t >= s && t < s + len;
                if (masked)
                    CHECK(out.at(c, t) == 0.0);
                else
                    CHECK(out.at(c, t) == w.at(c, t));
            }
        }
    }
}

TEST_CASE("shape preservation across random specs and windows") {
    TransformSetConfig cfg;
    SeededRng rng(26);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t channels = 1 + rng.uniform_int(3);
        const std::size_t steps = 8 + rng.uniform_int(120);
        const Window w = random_window(channels, steps, rng);
        SeededRng gen(100 + trial);
        const auto set = generate_transform_set(cfg, 10, channels, gen);
        NormStats stats = identity_stats(channels);
        for (const TransformSpec& spec : set) {
            const Window out = apply(spec, w, stats, rng);
            CHECK(out.values.size() == w.values.size());
            CHECK(out.channel_names == w.channel_names);
            CHECK(out.sampling_rate_hz == w.sampling_rate_hz);
        }
    }
}
