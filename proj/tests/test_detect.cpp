#include <doctest.h>

#include <map>

#include "helpers.hpp"
#include "pixelscene/dataset.hpp"
#include "pixelscene/detect.hpp"
#include "pixelscene/io.hpp"

using namespace pxs;

namespace {

BinaryMask random_mask(Rng& rng, int h, int w, double fill) {
    BinaryMask mask;
    mask.height = h;
    mask.width = w;
    mask.data.resize(static_cast<std::size_t>(h) * w);
    for (auto& v : mask.data) v = rng.next_real01() < fill ? 1 : 0;
    return mask;
}

// Literal transcription of the detection-score definition: for every class,
// every component gets the mean confidence over label-c pixels in its box.
std::vector<Detection> detect_oracle(const LabelMap& labels, const ScoreMap& conf,
                                     const std::vector<int>& classes) {
    std::vector<Detection> out;
    for (const int c : classes) {
        std::vector<std::uint8_t> mask(labels.data().size());
        for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = labels.data()[i] == c;
        const std::vector<int> comp =
            testutil::components_oracle(mask, labels.height(), labels.width());
        int max_id = -1;
        for (const int id : comp) max_id = std::max(max_id, id);
        for (int id = 0; id <= max_id; ++id) {
            BoundingBox box{labels.width(), labels.height(), 0, 0};
            for (int y = 0; y < labels.height(); ++y)
                for (int x = 0; x < labels.width(); ++x)
                    if (comp[static_cast<std::size_t>(y) * labels.width() + x] == id) {
                        box.x0 = std::min(box.x0, x);
                        box.y0 = std::min(box.y0, y);
                        box.x1 = std::max(box.x1, x + 1);
                        box.y1 = std::max(box.y1, y + 1);
                    }
            double sum = 0.0;
            long long count = 0;
            for (int y = box.y0; y < box.y1; ++y)
                for (int x = box.x0; x < box.x1; ++x)
                    if (labels.at(y, x) == c) {
                        sum += conf.at(y, x, c);
                        ++count;
                    }
            out.push_back(Detection{c, box, sum / static_cast<double>(count), count});
        }
    }
    return out;
}

}  // namespace

TEST_CASE("a solid 3x3 block yields one tight half-open box") {
    BinaryMask mask;
    mask.height = 8;
    mask.width = 8;
    mask.data.assign(64, 0);
    for (int y = 2; y <= 4; ++y)
        for (int x = 2; x <= 4; ++x) mask.data[y * 8 + x] = 1;
    const auto comps = connected_components(mask);
    REQUIRE(comps.size() == 1);
    CHECK(comps[0].box == BoundingBox{2, 2, 5, 5});
    CHECK(comps[0].pixels.size() == 9);
}

TEST_CASE("diagonal touch merges under 8-connectivity but not 4") {
    BinaryMask mask;
    mask.height = 4;
    mask.width = 4;
    mask.data.assign(16, 0);
    mask.data[1 * 4 + 1] = 1;
    mask.data[2 * 4 + 2] = 1;
    CHECK(connected_components(mask).size() == 1);
    // a 4-connectivity oracle splits them, documenting the choice
    const std::vector<int> four = testutil::components_oracle(mask.data, 4, 4, false);
    std::set<int> ids;
    for (const int id : four)
        if (id >= 0) ids.insert(id);
    CHECK(ids.size() == 2);
}

TEST_CASE("empty masks give no components") {
    BinaryMask mask;
    mask.height = 3;
    mask.width = 3;
    mask.data.assign(9, 0);
    CHECK(connected_components(mask).empty());
}

TEST_CASE("component memberships match the recursive flood-fill oracle") {
    Rng rng(50);
    for (int trial = 0; trial < 1000; ++trial) {
        const BinaryMask mask = random_mask(rng, 32, 32, rng.next_real(0.05, 0.6));
        const auto comps = connected_components(mask);
        const std::vector<int> oracle = testutil::components_oracle(mask.data, 32, 32);

        int oracle_count = 0;
        for (const int id : oracle) oracle_count = std::max(oracle_count, id + 1);
        REQUIRE(comps.size() == static_cast<std::size_t>(oracle_count));

        // same membership: every component maps to exactly one oracle id
        for (const auto& comp : comps) {
            const int id = oracle[static_cast<std::size_t>(comp.pixels[0].first) * 32 +
                                  comp.pixels[0].second];
            long long oracle_size = 0;
            for (const int v : oracle)
                if (v == id) ++oracle_size;
            CHECK(oracle_size == static_cast<long long>(comp.pixels.size()));
            for (const auto& [y, x] : comp.pixels)
                CHECK(oracle[static_cast<std::size_t>(y) * 32 + x] == id);
        }
    }
}

TEST_CASE("constant confidence gives the constant as score") {
    LabelMap labels(6, 6, 0);
    for (int y = 1; y < 4; ++y)
        for (int x = 2; x < 5; ++x) labels.set(y, x, 1);
    ScoreMap conf(6, 6, 3, 0.0);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x) conf.set(y, x, 1, 0.7);
    const auto dets = detect_objects(labels, conf, {1});
    REQUIRE(dets.size() == 1);
    CHECK(dets[0].score == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(dets[0].box == BoundingBox{2, 1, 5, 4});
    CHECK(dets[0].pixel_count == 9);
}

TEST_CASE("single-pixel component scores exactly that pixel") {
    LabelMap labels(5, 5, 0);
    labels.set(2, 3, 2);
    ScoreMap conf(5, 5, 4, 0.25);
    conf.set(2, 3, 2, 0.625);
    const auto dets = detect_objects(labels, conf, {2});
    REQUIRE(dets.size() == 1);
    CHECK(dets[0].score == 0.625);
    CHECK(dets[0].pixel_count == 1);
}

TEST_CASE("detect_objects matches the literal double-loop oracle") {
    Rng rng(51);
    const std::vector<int> classes{1, 2, 3};
    for (int trial = 0; trial < 500; ++trial) {
        const LabelMap labels = testutil::random_label_map(rng, 12, 12, 4, 0.05);
        ScoreMap conf(12, 12, 4);
        for (double& v : conf.data()) v = rng.next_real01();
        auto got = detect_objects(labels, conf, classes);
        auto expected = detect_oracle(labels, conf, classes);
        REQUIRE(got.size() == expected.size());
        const auto key = [](const Detection& d) {
            return std::make_tuple(d.class_id, d.box.y0, d.box.x0, d.box.y1, d.box.x1);
        };
        std::sort(got.begin(), got.end(),
                  [&](const Detection& a, const Detection& b) { return key(a) < key(b); });
        std::sort(expected.begin(), expected.end(),
                  [&](const Detection& a, const Detection& b) { return key(a) < key(b); });
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].class_id == expected[i].class_id);
            CHECK(got[i].box == expected[i].box);
            CHECK(got[i].pixel_count == expected[i].pixel_count);
            CHECK(got[i].score == doctest::Approx(expected[i].score).epsilon(1e-12));
        }
    }
}

TEST_CASE("dimension mismatches are rejected") {
    const LabelMap labels(4, 4);
    const ScoreMap conf(4, 5, 3);
    CHECK_THROWS_AS(detect_objects(labels, conf, {1}), ValidationError);
}

TEST_CASE("min_area drops small components") {
    LabelMap labels(6, 6, 0);
    labels.set(0, 0, 1);
    for (int y = 2; y < 5; ++y)
        for (int x = 2; x < 5; ++x) labels.set(y, x, 1);
    const ScoreMap conf(6, 6, 2, 0.5);
    CHECK(detect_objects(labels, conf, {1}).size() == 2);
    CHECK(detect_objects(labels, conf, {1}, 2).size() == 1);
}

TEST_SUITE("invariants") {
    TEST_CASE("boxes are tight: every side touches a component pixel") {
        Rng rng(52);
        for (int trial = 0; trial < 100; ++trial) {
            const BinaryMask mask = random_mask(rng, 16, 16, 0.3);
            for (const auto& comp : connected_components(mask)) {
                bool top = false, bottom = false, left = false, right = false;
                for (const auto& [y, x] : comp.pixels) {
                    top |= y == comp.box.y0;
                    bottom |= y == comp.box.y1 - 1;
                    left |= x == comp.box.x0;
                    right |= x == comp.box.x1 - 1;
                }
                CHECK(top);
                CHECK(bottom);
                CHECK(left);
                CHECK(right);
            }
        }
    }

    TEST_CASE("component pixel sets partition the mask") {
        Rng rng(53);
        for (int trial = 0; trial < 100; ++trial) {
            const BinaryMask mask = random_mask(rng, 16, 16, 0.4);
            std::set<std::pair<int, int>> seen;
            std::size_t total = 0;
            for (const auto& comp : connected_components(mask))
                for (const auto& p : comp.pixels) {
                    CHECK(seen.insert(p).second);  // disjoint
                    ++total;
                }
            std::size_t expected = 0;
            for (const auto v : mask.data) expected += v;
            CHECK(total == expected);  // cover all set pixels
            for (const auto& [y, x] : seen) CHECK(mask.at(y, x) == 1);
        }
    }

    TEST_CASE("scores stay within the contributing confidence range") {
        Rng rng(54);
        for (int trial = 0; trial < 100; ++trial) {
            const LabelMap labels = testutil::random_label_map(rng, 10, 10, 3);
            ScoreMap conf(10, 10, 3);
            for (double& v : conf.data()) v = rng.next_real01();
            for (const Detection& det : detect_objects(labels, conf, {1, 2})) {
                CHECK(det.score >= 0.0);
                CHECK(det.score <= 1.0);
                double lo = 1.0, hi = 0.0;
                for (int y = det.box.y0; y < det.box.y1; ++y)
                    for (int x = det.box.x0; x < det.box.x1; ++x)
                        if (labels.at(y, x) == det.class_id) {
                            lo = std::min(lo, static_cast<double>(conf.at(y, x, det.class_id)));
                            hi = std::max(hi, static_cast<double>(conf.at(y, x, det.class_id)));
                        }
                CHECK(det.score >= lo - 1e-12);
                CHECK(det.score <= hi + 1e-12);
            }
        }
    }

    TEST_CASE("detection on ToyRooms ground truth recovers the placement boxes") {
        testutil::TempDir dir("gt_closure");
        ToyRoomsConfig config;
        config.train_count = 0;
        config.test_count = 12;
        config.seed = 99;
        const GeneratedDataset data =
            generate_toyrooms(config, SceneRule::default_rule(config), dir.path().string());
        std::vector<int> classes;
        for (int c = config.first_object_class(); c < config.num_classes(); ++c)
            classes.push_back(c);
        std::map<int, std::vector<std::vector<BoundingBox>>> gt_boxes;
        std::map<int, std::vector<RankedDetection>> ranked;
        for (const int c : classes) gt_boxes[c].resize(data.test.size());
        for (std::size_t i = 0; i < data.test.size(); ++i) {
            const LabelMap labels = read_label_png(data.test.label_path(i));
            const ScoreMap unit(labels.height(), labels.width(), config.num_classes(), 1.0);
            std::set<std::tuple<int, int, int, int, int>> got;
            const auto detections = detect_objects(labels, unit, classes);
            for (std::size_t j = 0; j < detections.size(); ++j) {
                const Detection& det = detections[j];
                CHECK(det.score == 1.0);
                got.insert({det.class_id, det.box.x0, det.box.y0, det.box.x1, det.box.y1});
                ranked[det.class_id].push_back(RankedDetection{
                    det.score, static_cast<int>(i), static_cast<int>(j), det.box});
            }
            std::set<std::tuple<int, int, int, int, int>> expected;
            for (const ObjectInstance& obj : data.test.objects[i]) {
                expected.insert({obj.class_id, obj.box.x0, obj.box.y0, obj.box.x1, obj.box.y1});
                gt_boxes[obj.class_id][i].push_back(obj.box);
            }
            CHECK(got == expected);
        }
        // and the AP form of the same closure: exactly 1.0 per populated class
        for (const int c : classes) {
            long long total = 0;
            for (const auto& boxes : gt_boxes[c]) total += static_cast<long long>(boxes.size());
            if (total == 0) continue;
            CHECK(average_precision(ranked[c], gt_boxes[c]).ap == 1.0);
        }
    }
}
