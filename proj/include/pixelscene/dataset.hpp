#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pixelscene/grid.hpp"
#include "pixelscene/image.hpp"

namespace pxs {

// Desk-scale synthetic scenes: a wall/floor background split plus colored
// rectangles and ellipses for objects, with a 1-pixel ignore ring.
struct ToyRoomsConfig {
    int image_size = 64;
    int num_object_classes = 6;
    int num_structure_classes = 2;  // wall = 0, floor = 1
    int min_objects = 1;
    int max_objects = 4;
    int min_object_size = 12;  // box side in pixels
    int max_object_size = 26;
    double noise_stddev = 0.05;
    std::uint64_t seed = 0;
    int train_count = 500;
    int test_count = 200;

    int num_classes() const { return num_structure_classes + num_object_classes; }
    int first_object_class() const { return num_structure_classes; }
    void validate() const;
};

// Ordered first-match rules from required object subsets to scene ids; the
// fallback id catches every remaining presence pattern, so the mapping is a
// total deterministic function of the presence set.
struct SceneRule {
    struct Entry {
        std::vector<int> required_classes;
        int scene_id = 0;
    };

    std::vector<Entry> entries;
    int fallback_scene_id = 0;
    std::vector<std::string> scene_names;

    int num_scenes() const { return static_cast<int>(scene_names.size()); }
    int classify(const std::vector<bool>& class_present) const;
    void validate(int num_classes) const;

    // 4 named scenes driven by the first three object classes, plus "other".
    static SceneRule default_rule(const ToyRoomsConfig& config);
};

struct ObjectInstance {
    int class_id = 0;
    BoundingBox box;  // tight box of the drawn pixels

    bool operator==(const ObjectInstance&) const = default;
};

struct ManifestRecord {
    std::string image_path;  // relative to the manifest's directory
    std::string label_path;
    int scene_id = 0;

    bool operator==(const ManifestRecord&) const = default;
};

struct DatasetManifest {
    std::string base_dir;
    std::string split;
    std::vector<ManifestRecord> records;
    ClassPalette palette;
    std::vector<std::string> scene_names;
    // Placement ground truth, filled by the generator only (not serialized).
    std::vector<std::vector<ObjectInstance>> objects;

    std::size_t size() const { return records.size(); }
    std::string image_path(std::size_t i) const;
    std::string label_path(std::size_t i) const;
};

struct GeneratedDataset {
    DatasetManifest train;
    DatasetManifest test;
};

// Writes images, label maps, train/test manifests, palette.txt and
// scenes.txt under out_dir. Deterministic for a given config.seed.
GeneratedDataset generate_toyrooms(const ToyRoomsConfig& config, const SceneRule& rule,
                                   const std::string& out_dir);

// Manifest lines are "image<TAB>labels<TAB>scene_id". Loading requires
// palette.txt next to the manifest and validates every referenced file,
// including label values against the palette size.
void save_manifest(const std::string& path, const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::string& path);

// Convenience for training/eval: load all referenced images and label maps.
std::vector<Image> load_images(const DatasetManifest& manifest);
std::vector<LabelMap> load_label_maps(const DatasetManifest& manifest);

}  // namespace pxs
