#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "cdaug/predict_pipeline.hpp"
#include "cdaug/train_pipeline.hpp"
#include "helpers.hpp"

using namespace cdaug;
using namespace cdaug::testing;

namespace {

// Hand-built artifact: weights seeded randomly, spanning transform set,
// identity normalization.
ModelArtifact toy_artifact(std::size_t channels, std::size_t steps, std::size_t classes,
                           std::uint64_t seed) {
    SeededRng rng(seed);
    ModelArtifact a;
    a.model = make_softmax_linear(channels, steps, classes);
    for (double& v : a.model.w1) v = rng.uniform(-0.8, 0.8);
    for (double& v : a.model.b1) v = rng.uniform(-0.2, 0.2);
    a.norm_stats = identity_stats(channels);
    a.transform_set = spanning_transform_set(channels);
    a.hyper.n1 = 6;
    a.hyper.n2 = 4;
    a.hyper.transform_set_size = a.transform_set.size();
    for (std::size_t c = 0; c < classes; ++c) a.class_names.push_back("c" + std::to_string(c));
    return a;
}

// Brute-force vote oracle, written against the documented rule rather than
// the implementation: maximize votes, prefer the base class among leaders,
// otherwise the lowest class index.
int oracle_majority(int base, const std::vector<int>& variants, std::size_t classes) {
    std::map<int, int> votes;
    votes[base] += 1;
    for (int v : variants) votes[v] += 1;
    int best_count = 0;
    for (const auto& [cls, count] : votes) best_count = std::max(best_count, count);
    if (votes.count(base) && votes[base] == best_count) return base;
    for (std::size_t c = 0; c < classes; ++c) {
        auto it = votes.find(static_cast<int>(c));
        if (it != votes.end() && it->second == best_count) return static_cast<int>(c);
    }
    return base;
}

} // namespace

TEST_CASE("vote aggregation equals the brute-force oracle on every multiset (K=3, n2<=4)") {
    const std::size_t classes = 3;
    for (std::size_t n2 = 0; n2 <= 4; ++n2) {
        std::vector<int> variants(n2, 0);
        std::size_t combos = 1;
        for (std::size_t i = 0; i < n2; ++i) combos *= classes;
        for (int base = 0; base < 3; ++base) {
            for (std::size_t code = 0; code < combos; ++code) {
                std::size_t rest = code;
                for (std::size_t i = 0; i < n2; ++i) {
                    variants[i] = static_cast<int>(rest % classes);
                    rest /= classes;
                }
                CHECK(aggregate_votes(base, variants, classes) ==
                      oracle_majority(base, variants, classes));
            }
        }
    }
}

TEST_CASE("hand-counted vote: base A with variants B,B,A,A gives A 3-2") {
    const std::vector<int> variants = {1, 1, 0, 0};
    CHECK(aggregate_votes(0, variants, 2) == 0);
}

TEST_CASE("n2 = 0 makes the final prediction the base prediction") {
    const ModelArtifact a = toy_artifact(2, 16, 3, 1);
    SeededRng wrng(2);
    const Window w = random_window(2, 16, wrng);
    SeededRng rng(3);
    const VoteRecord record = tta_predict(a, w, 0, rng);
    CHECK(record.variant_votes.empty());
    CHECK(record.final_prediction == record.base_prediction);
}

TEST_CASE("vote count conservation and membership of every spec") {
    const ModelArtifact a = toy_artifact(3, 20, 4, 4);
    SeededRng wrng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const Window w = random_window(3, 20, wrng);
        SeededRng rng(100 + trial);
        const VoteRecord record = tta_predict(a, w, 4, rng);
        CHECK(record.variant_votes.size() == 4);
        CHECK_NOTHROW(validate_vote_record(record, 4));
        // Every applied spec is a member of the frozen set.
        for (const auto& vote : record.variant_votes) {
            bool member = false;
            for (const TransformSpec& spec : a.transform_set)
                if (spec == vote.spec) member = true;
            CHECK(member);
        }
        // Majority soundness: the final class has at least as many votes as
        // any other.
        std::vector<int> counts(4, 0);
        ++counts[static_cast<std::size_t>(record.base_prediction)];
        for (const auto& vote : record.variant_votes)
            ++counts[static_cast<std::size_t>(vote.predicted)];
        for (int c : counts)
            CHECK(counts[static_cast<std::size_t>(record.final_prediction)] >= c);
    }
}

TEST_CASE("unanimous votes produce that class") {
    // Strongly biased model: every input lands in the same class, transformed
    // or not.
    ModelArtifact a = toy_artifact(1, 8, 2, 6);
    for (double& v : a.model.w1) v = 0.0;
    a.model.b1 = {5.0, 0.0};
    SeededRng wrng(7);
    const Window w = random_window(1, 8, wrng);
    SeededRng rng(8);
    const VoteRecord record = tta_predict(a, w, 4, rng);
    CHECK(record.base_prediction == 0);
    CHECK(record.final_prediction == 0);
    for (const auto& vote : record.variant_votes) CHECK(vote.predicted == 0);
}

TEST_CASE("foreign transforms are rejected") {
    const ModelArtifact a = toy_artifact(2, 12, 2, 9);
    SeededRng wrng(10);
    const Window w = random_window(2, 12, wrng);
    SeededRng rng(11);
    // alpha far outside the trained range [0.05, 0.15]
    const std::vector<TransformSpec> foreign = {jitter_spec(3.0)};
    try {
        tta_predict_with_specs(a, w, foreign, rng);
        FAIL("expected ForeignTransform");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ForeignTransform);
    }
    // In-range instance of a trained kind is admissible even if not a member.
    const std::vector<TransformSpec> inrange = {jitter_spec(0.1)};
    CHECK_NOTHROW(tta_predict_with_specs(a, w, inrange, rng));
}

TEST_CASE("keep_only is admissible exactly when clip was trained") {
    ModelArtifact a = toy_artifact(2, 12, 2, 12);
    TransformSpec keep;
    keep.kind = TransformKind::KeepOnly;
    keep.start_frac = 0.25;
    keep.ratio = 0.5;
    CHECK(is_admissible_transform(a, keep));
    // Remove clip from the set: keep_only loses its backing.
    std::erase_if(a.transform_set,
                  [](const TransformSpec& s) { return s.kind == TransformKind::Clip; });
    CHECK_FALSE(is_admissible_transform(a, keep));
}

TEST_CASE("variant budget: n2 capped by the set size and by n1") {
    const ModelArtifact a = toy_artifact(2, 12, 2, 13);  // n1 = 6, set size 7
    SeededRng wrng(14);
    const Window w = random_window(2, 12, wrng);
    SeededRng rng(15);
    try {
        tta_predict(a, w, 7, rng);  // > n1
        FAIL("expected TooManyVariants");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TooManyVariants);
    }
    CHECK_NOTHROW(tta_predict(a, w, 6, rng));
}

TEST_CASE("batch of one equals the single-window path with the derived seed") {
    const ModelArtifact a = toy_artifact(3, 24, 3, 16);
    SeededRng wrng(17);
    const std::vector<Window> windows = {random_window(3, 24, wrng)};
    const std::uint64_t run_seed = 4242;
    const auto batch = tta_predict_batch(a, windows, 3, run_seed);
    SeededRng single_rng(mix64(run_seed, 0));
    const VoteRecord single = tta_predict(a, windows[0], 3, single_rng);
    REQUIRE(batch.size() == 1);
    CHECK(batch[0] == single);
}

TEST_CASE("batch results are independent of partitioning") {
    const ModelArtifact a = toy_artifact(2, 16, 3, 18);
    SeededRng wrng(19);
    std::vector<Window> windows;
    for (int i = 0; i < 10; ++i) windows.push_back(random_window(2, 16, wrng));
    const std::uint64_t run_seed = 777;

    const auto whole = tta_predict_batch(a, windows, 4, run_seed);
    const auto first = tta_predict_batch(
        a, std::span<const Window>(windows.data(), 6), 4, run_seed, 0);
    const auto second = tta_predict_batch(
        a, std::span<const Window>(windows.data() + 6, 4), 4, run_seed, 6);
    REQUIRE(whole.size() == 10);
    for (std::size_t i = 0; i < 6; ++i) CHECK(whole[i] == first[i]);
    for (std::size_t i = 0; i < 4; ++i) CHECK(whole[6 + i] == second[i]);
}

TEST_CASE("condition (i) downstream of a real training run") {
    SyntheticSpec spec;
    spec.classes = 2;
    spec.subjects = 2;
    spec.windows_per_subject_per_class = 30;
    spec.carriers_hz = {3, 7};
    spec.channels = 2;
    spec.timesteps = 48;
    spec.segment_start = 16;
    spec.segment_end = 32;
    SeededRng gen(20);
    const Dataset data = generate_synthetic(spec, gen);
    const auto folds = loso_folds(data);
    CompetitiveConfig cfg;
    cfg.train.max_epochs = 5;
    cfg.train.batch = 64;
    SeededRng rng(21);
    const TrainOutcome outcome = train_competitive(folds[0].train, folds[0].val, cfg, rng);

    SeededRng prng(22);
    for (const LabeledWindow& lw : folds[0].test.windows) {
        const VoteRecord record = tta_predict(outcome.artifact, lw.window, 10, prng);
        for (const auto& vote : record.variant_votes)
            CHECK(is_admissible_transform(outcome.artifact, vote.spec));
    }
}
