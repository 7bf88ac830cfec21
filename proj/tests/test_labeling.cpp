#include <doctest.h>

#include "helpers.hpp"
#include "pixelscene/labeling.hpp"

using namespace pxs;

TEST_CASE("softmax of all-zero scores is uniform") {
    const ScoreMap scores(3, 3, 4, 0.0);
    const ScoreMap probs = softmax_map(scores);
    for (const double p : probs.data()) CHECK(p == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("softmax of (1,2,3) matches the direct formula") {
    ScoreMap scores(1, 1, 3);
    scores.set(0, 0, 0, 1.0);
    scores.set(0, 0, 1, 2.0);
    scores.set(0, 0, 2, 3.0);
    const ScoreMap probs = softmax_map(scores);
    CHECK(probs.at(0, 0, 0) == doctest::Approx(0.09003057).epsilon(1e-6));
    CHECK(probs.at(0, 0, 1) == doctest::Approx(0.24472847).epsilon(1e-6));
    CHECK(probs.at(0, 0, 2) == doctest::Approx(0.66524096).epsilon(1e-6));
}

TEST_CASE("max_fuse of a single map is the identity") {
    Rng rng(30);
    const ScoreMap map = testutil::random_score_map(rng, 4, 4, 3);
    CHECK(max_fuse({map}) == map);
    CHECK(max_fuse({map, map, map}) == map);
}

TEST_CASE("max_fuse rejects dimension mismatches") {
    const ScoreMap a(4, 4, 3), b(4, 5, 3), c(4, 4, 2);
    CHECK_THROWS_AS(max_fuse({a, b}), ValidationError);
    CHECK_THROWS_AS(max_fuse({a, c}), ValidationError);
    CHECK_THROWS_AS(max_fuse({}), ValidationError);
}

TEST_CASE("max_fuse matches the per-element loop oracle") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<ScoreMap> maps;
        for (int i = 0; i < 3; ++i) maps.push_back(testutil::random_score_map(rng, 4, 4, 3));
        const ScoreMap fused = max_fuse(maps);
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x)
                for (int c = 0; c < 3; ++c) {
                    double expected = maps[0].at(y, x, c);
                    for (const ScoreMap& m : maps) expected = std::max(expected, m.at(y, x, c));
                    CHECK(fused.at(y, x, c) == expected);
                }
    }
}

TEST_CASE("argmax picks the dominant channel and breaks ties low") {
    ScoreMap dominant(2, 2, 4, 0.0);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) dominant.set(y, x, 2, 5.0);
    const LabelMap labels = argmax_label(dominant);
    for (const std::uint8_t v : labels.data()) CHECK(v == 2);

    ScoreMap tie(1, 1, 4, 0.0);
    tie.set(0, 0, 1, 3.0);
    tie.set(0, 0, 3, 3.0);
    CHECK(argmax_label(tie).at(0, 0) == 1);
}

TEST_CASE("argmax matches the per-pixel scan oracle") {
    Rng rng(32);
    for (int trial = 0; trial < 30; ++trial) {
        const ScoreMap scores = testutil::random_score_map(rng, 6, 6, 5);
        const LabelMap labels = argmax_label(scores);
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 6; ++x) {
                int best = 0;
                for (int c = 1; c < 5; ++c)
                    if (scores.at(y, x, c) > scores.at(y, x, best)) best = c;
                CHECK(labels.at(y, x) == best);
            }
    }
}

TEST_SUITE("invariants") {
    TEST_CASE("softmax channel vectors sum to one and lie in (0,1)") {
        Rng rng(33);
        for (int trial = 0; trial < 20; ++trial) {
            // +-15 keeps the largest margin below the point where a double
            // rounds the winning probability to exactly 1
            const ScoreMap scores = testutil::random_score_map(rng, 5, 5, 6, -15.0, 15.0);
            const ScoreMap probs = softmax_map(scores);
            for (int y = 0; y < 5; ++y)
                for (int x = 0; x < 5; ++x) {
                    double sum = 0.0;
                    for (int c = 0; c < 6; ++c) {
                        const double p = probs.at(y, x, c);
                        CHECK(p > 0.0);
                        CHECK(p < 1.0);
                        sum += p;
                    }
                    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
                }
        }
    }

    TEST_CASE("softmax is invariant to per-pixel score shifts") {
        Rng rng(34);
        const ScoreMap scores = testutil::random_score_map(rng, 4, 4, 5);
        ScoreMap shifted = scores;
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) {
                const double t = rng.next_real(-3.0, 3.0);
                for (int c = 0; c < 5; ++c) shifted.set(y, x, c, scores.at(y, x, c) + t);
            }
        const ScoreMap pa = softmax_map(scores);
        const ScoreMap pb = softmax_map(shifted);
        for (std::size_t i = 0; i < pa.data().size(); ++i)
            CHECK(pa.data()[i] == doctest::Approx(pb.data()[i]).epsilon(1e-5));
    }

    TEST_CASE("argmax of softmax equals argmax of raw scores") {
        Rng rng(35);
        for (int trial = 0; trial < 20; ++trial) {
            const ScoreMap scores = testutil::random_score_map(rng, 5, 7, 4);
            CHECK(argmax_label(softmax_map(scores)) == argmax_label(scores));
        }
    }

    TEST_CASE("max_fuse is commutative and associative") {
        Rng rng(36);
        std::vector<ScoreMap> maps;
        for (int i = 0; i < 4; ++i) maps.push_back(testutil::random_score_map(rng, 5, 5, 3));
        const ScoreMap forward = max_fuse(maps);
        const ScoreMap reversed = max_fuse({maps[3], maps[1], maps[2], maps[0]});
        CHECK(forward == reversed);
        const ScoreMap nested = max_fuse({max_fuse({maps[0], maps[1]}),
                                          max_fuse({maps[2], maps[3]})});
        CHECK(forward == nested);
    }

    TEST_CASE("constant channel shift does not change the fused argmax") {
        Rng rng(37);
        std::vector<ScoreMap> maps;
        for (int i = 0; i < 3; ++i) maps.push_back(testutil::random_score_map(rng, 4, 4, 4));
        const LabelMap before = argmax_label(max_fuse(maps));
        std::vector<ScoreMap> shifted = maps;
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) {
                const double t = rng.next_real(-2.0, 2.0);
                for (ScoreMap& m : shifted)
                    for (int c = 0; c < 4; ++c) m.set(y, x, c, m.at(y, x, c) + t);
            }
        CHECK(argmax_label(max_fuse(shifted)) == before);
    }
}
