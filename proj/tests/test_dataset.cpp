#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "helpers.hpp"
#include "pixelscene/dataset.hpp"
#include "pixelscene/io.hpp"

using namespace pxs;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) { return read_text_file(path); }

bool trees_identical(const fs::path& a, const fs::path& b) {
    std::vector<std::string> rel_a, rel_b;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) rel_a.push_back(fs::relative(e.path(), a).string());
    for (const auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file()) rel_b.push_back(fs::relative(e.path(), b).string());
    std::sort(rel_a.begin(), rel_a.end());
    std::sort(rel_b.begin(), rel_b.end());
    if (rel_a != rel_b) return false;
    for (const std::string& rel : rel_a)
        if (slurp((a / rel).string()) != slurp((b / rel).string())) return false;
    return true;
}

ToyRoomsConfig small_config(std::uint64_t seed) {
    ToyRoomsConfig config;
    config.train_count = 6;
    config.test_count = 4;
    config.seed = seed;
    return config;
}

}  // namespace

TEST_CASE("identical seeds generate byte-identical datasets") {
    testutil::TempDir dir_a("gen_a");
    testutil::TempDir dir_b("gen_b");
    const ToyRoomsConfig config = small_config(777);
    const SceneRule rule = SceneRule::default_rule(config);
    generate_toyrooms(config, rule, dir_a.path().string());
    generate_toyrooms(config, rule, dir_b.path().string());
    CHECK(trees_identical(dir_a.path(), dir_b.path()));
}

TEST_CASE("different seeds change the data") {
    testutil::TempDir dir_a("gen_c");
    testutil::TempDir dir_b("gen_d");
    const SceneRule rule = SceneRule::default_rule(small_config(0));
    generate_toyrooms(small_config(1), rule, dir_a.path().string());
    generate_toyrooms(small_config(2), rule, dir_b.path().string());
    CHECK_FALSE(trees_identical(dir_a.path(), dir_b.path()));
}

TEST_CASE("zero objects per image means every scene is the fallback") {
    testutil::TempDir dir("gen_empty");
    ToyRoomsConfig config = small_config(5);
    config.min_objects = 0;
    config.max_objects = 0;
    const SceneRule rule = SceneRule::default_rule(config);
    const GeneratedDataset data = generate_toyrooms(config, rule, dir.path().string());
    for (const ManifestRecord& rec : data.train.records)
        CHECK(rec.scene_id == rule.fallback_scene_id);
    for (const ManifestRecord& rec : data.test.records)
        CHECK(rec.scene_id == rule.fallback_scene_id);
}

TEST_CASE("impossible placement raises an error naming the image") {
    testutil::TempDir dir("gen_full");
    ToyRoomsConfig config = small_config(6);
    config.image_size = 12;  // room for one object, never four
    config.min_objects = 4;
    config.max_objects = 4;
    CHECK_THROWS_WITH_AS(
        generate_toyrooms(config, SceneRule::default_rule(config), dir.path().string()),
        doctest::Contains("image"), ValidationError);
}

TEST_CASE("object presence frequencies match the configured distribution") {
    testutil::TempDir dir("gen_freq");
    ToyRoomsConfig config;
    config.train_count = 1000;
    config.test_count = 0;
    config.seed = 4242;
    const GeneratedDataset data =
        generate_toyrooms(config, SceneRule::default_rule(config), dir.path().string());

    // P(class present) = E_n[1 - (1 - 1/K)^n], n uniform on [1, 4]
    double expected = 0.0;
    for (int n = 1; n <= 4; ++n)
        expected += (1.0 - std::pow(1.0 - 1.0 / config.num_object_classes, n)) / 4.0;

    std::vector<int> present_count(config.num_classes(), 0);
    for (const auto& objects : data.train.objects) {
        std::set<int> classes;
        for (const ObjectInstance& obj : objects) classes.insert(obj.class_id);
        for (const int c : classes) ++present_count[c];
    }
    for (int c = config.first_object_class(); c < config.num_classes(); ++c) {
        const double freq = present_count[c] / 1000.0;
        CHECK(std::fabs(freq - expected) <= 0.05);
    }
}

TEST_CASE("manifest round trip preserves records, palette and scene names") {
    testutil::TempDir dir("manifest_rt");
    const ToyRoomsConfig config = small_config(7);
    const SceneRule rule = SceneRule::default_rule(config);
    const GeneratedDataset data = generate_toyrooms(config, rule, dir.path().string());
    const DatasetManifest loaded = load_manifest(dir.file("train.manifest"));
    CHECK(loaded.records == data.train.records);
    CHECK(loaded.palette.names == data.train.palette.names);
    CHECK(loaded.palette.colors == data.train.palette.colors);
    CHECK(loaded.scene_names == rule.scene_names);
}

TEST_CASE("loading fails on missing files and bad label values") {
    testutil::TempDir dir("manifest_bad");
    const ToyRoomsConfig config = small_config(8);
    generate_toyrooms(config, SceneRule::default_rule(config), dir.path().string());

    SUBCASE("missing label map") {
        fs::remove(dir.path() / "train" / "lab_00002.png");
        CHECK_THROWS_WITH_AS(load_manifest(dir.file("train.manifest")),
                             doctest::Contains("missing"), ValidationError);
    }
    SUBCASE("label value equal to the class count") {
        LabelMap bad = read_label_png((dir.path() / "train" / "lab_00001.png").string());
        bad.set(3, 3, static_cast<std::uint8_t>(config.num_classes()));
        write_label_png((dir.path() / "train" / "lab_00001.png").string(), bad);
        CHECK_THROWS_WITH_AS(load_manifest(dir.file("train.manifest")),
                             doctest::Contains("(3,3)"), ValidationError);
    }
    SUBCASE("missing manifest") {
        CHECK_THROWS_AS(load_manifest(dir.file("nope.manifest")), ValidationError);
    }
}

TEST_SUITE("invariants") {
    TEST_CASE("generated label maps are valid and objects are single components") {
        testutil::TempDir dir("gen_cc");
        ToyRoomsConfig config = small_config(9);
        config.train_count = 20;
        config.test_count = 0;
        const GeneratedDataset data =
            generate_toyrooms(config, SceneRule::default_rule(config), dir.path().string());
        for (std::size_t i = 0; i < data.train.size(); ++i) {
            const LabelMap labels = read_label_png(data.train.label_path(i));
            labels.validate(config.num_classes());

            // per class, flood-fill component count equals placed instances
            std::map<int, int> instances;
            for (const ObjectInstance& obj : data.train.objects[i]) ++instances[obj.class_id];
            for (int c = config.first_object_class(); c < config.num_classes(); ++c) {
                std::vector<std::uint8_t> mask(labels.data().size());
                for (std::size_t k = 0; k < mask.size(); ++k)
                    mask[k] = labels.data()[k] == c;
                const std::vector<int> ids = testutil::components_oracle(
                    mask, labels.height(), labels.width());
                int count = 0;
                for (const int id : ids) count = std::max(count, id + 1);
                CHECK(count == (instances.count(c) ? instances[c] : 0));
            }
        }
    }

    TEST_CASE("scene labels are a pure function of object presence") {
        testutil::TempDir dir("gen_scene");
        ToyRoomsConfig config = small_config(10);
        config.train_count = 30;
        config.test_count = 0;
        const SceneRule rule = SceneRule::default_rule(config);
        const GeneratedDataset data = generate_toyrooms(config, rule, dir.path().string());
        for (std::size_t i = 0; i < data.train.size(); ++i) {
            const LabelMap labels = read_label_png(data.train.label_path(i));
            std::vector<bool> present(config.num_classes(), false);
            for (const std::uint8_t v : labels.data())
                if (v != kIgnoreLabel) present[v] = true;
            CHECK(rule.classify(present) == data.train.records[i].scene_id);
        }
    }

    TEST_CASE("the ignore ring is exactly the 1-pixel border") {
        testutil::TempDir dir("gen_ring");
        const ToyRoomsConfig config = small_config(11);
        const GeneratedDataset data =
            generate_toyrooms(config, SceneRule::default_rule(config), dir.path().string());
        const LabelMap labels = read_label_png(data.train.label_path(0));
        for (int x = 0; x < labels.width(); ++x) {
            CHECK(labels.at(0, x) == kIgnoreLabel);
            CHECK(labels.at(labels.height() - 1, x) == kIgnoreLabel);
        }
        for (int y = 0; y < labels.height(); ++y) {
            CHECK(labels.at(y, 0) == kIgnoreLabel);
            CHECK(labels.at(y, labels.width() - 1) == kIgnoreLabel);
        }
        for (int y = 1; y < labels.height() - 1; ++y)
            for (int x = 1; x < labels.width() - 1; ++x)
                CHECK(labels.at(y, x) != kIgnoreLabel);
    }
}
