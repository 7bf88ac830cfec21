#include "pixelscene/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "pixelscene/io.hpp"

namespace fs = std::filesystem;

namespace pxs {

void ToyRoomsConfig::validate() const {
    if (image_size < 8) throw ValidationError("toyrooms: image size must be at least 8");
    if (num_structure_classes < 1 || num_structure_classes > 2)
        throw ValidationError("toyrooms: 1 or 2 structure classes supported");
    if (num_object_classes < 0) throw ValidationError("toyrooms: negative object class count");
    if (num_classes() > 254)
        throw ValidationError("toyrooms: total class count must stay below the ignore label");
    if (min_objects < 0 || max_objects < min_objects)
        throw ValidationError("toyrooms: invalid objects-per-image range");
    if (min_object_size < 3 || max_object_size < min_object_size)
        throw ValidationError("toyrooms: invalid object size range");
    if (max_objects > 0 && num_object_classes == 0)
        throw ValidationError("toyrooms: objects requested but no object classes");
    if (noise_stddev < 0.0) throw ValidationError("toyrooms: negative noise stddev");
    if (train_count < 0 || test_count < 0) throw ValidationError("toyrooms: negative counts");
}

int SceneRule::classify(const std::vector<bool>& class_present) const {
    for (const Entry& entry : entries) {
        bool all = true;
        for (const int c : entry.required_classes)
            if (c >= static_cast<int>(class_present.size()) || !class_present[c]) {
                all = false;
                break;
            }
        if (all) return entry.scene_id;
    }
    return fallback_scene_id;
}

void SceneRule::validate(int num_classes) const {
    if (scene_names.empty()) throw ValidationError("scene rule: no scene names");
    for (const Entry& entry : entries) {
        if (entry.scene_id < 0 || entry.scene_id >= num_scenes())
            throw ValidationError("scene rule: scene id out of range");
        if (entry.required_classes.empty())
            throw ValidationError("scene rule: empty required subset");
        for (const int c : entry.required_classes)
            if (c < 0 || c >= num_classes)
                throw ValidationError("scene rule: class id out of range");
    }
    if (fallback_scene_id < 0 || fallback_scene_id >= num_scenes())
        throw ValidationError("scene rule: fallback scene id out of range");
}

SceneRule SceneRule::default_rule(const ToyRoomsConfig& config) {
    SceneRule rule;
    const int first = config.first_object_class();
    const int k = config.num_object_classes;
    if (k >= 3) {
        rule.entries = {{{first, first + 1}, 0}, {{first}, 1}, {{first + 1}, 2},
                        {{first + 2}, 3}};
        rule.scene_names = {"office", "dining", "lounge", "studio", "other"};
        rule.fallback_scene_id = 4;
    } else if (k == 2) {
        rule.entries = {{{first, first + 1}, 0}, {{first}, 1}, {{first + 1}, 2}};
        rule.scene_names = {"office", "dining", "lounge", "other"};
        rule.fallback_scene_id = 3;
    } else if (k == 1) {
        rule.entries = {{{first}, 0}};
        rule.scene_names = {"dining", "other"};
        rule.fallback_scene_id = 1;
    } else {
        rule.scene_names = {"other"};
        rule.fallback_scene_id = 0;
    }
    return rule;
}

std::string DatasetManifest::image_path(std::size_t i) const {
    return (fs::path(base_dir) / records[i].image_path).string();
}

std::string DatasetManifest::label_path(std::size_t i) const {
    return (fs::path(base_dir) / records[i].label_path).string();
}

namespace {

const char* kObjectNames[] = {"table", "chair", "lamp", "sofa", "shelf", "plant"};

std::vector<std::string> class_names(const ToyRoomsConfig& config) {
    std::vector<std::string> names;
    if (config.num_structure_classes >= 1) names.push_back("wall");
    if (config.num_structure_classes >= 2) names.push_back("floor");
    for (int i = 0; i < config.num_object_classes; ++i) {
        if (i < static_cast<int>(std::size(kObjectNames)))
            names.emplace_back(kObjectNames[i]);
        else
            names.push_back("object" + std::to_string(i + 1));
    }
    return names;
}

struct PlacedObject {
    int class_id;
    bool ellipse;
    BoundingBox box;        // sampled placement box
    BoundingBox tight_box;  // box of actually drawn pixels
};

bool boxes_gap_ok(const BoundingBox& candidate, const std::vector<PlacedObject>& placed) {
    // 1-pixel dilation: touching or diagonal adjacency of boxes is rejected,
    // so drawn pixel sets of distinct objects can never be 8-connected.
    for (const PlacedObject& other : placed) {
        const bool overlap = candidate.x0 - 1 < other.box.x1 && other.box.x0 < candidate.x1 + 1 &&
                             candidate.y0 - 1 < other.box.y1 && other.box.y0 < candidate.y1 + 1;
        if (overlap) return false;
    }
    return true;
}

// Rasterize into labels; returns the tight box of the pixels written.
BoundingBox draw_object(LabelMap& labels, const PlacedObject& obj) {
    BoundingBox tight{labels.width(), labels.height(), 0, 0};
    const double cx = (obj.box.x0 + obj.box.x1) / 2.0;
    const double cy = (obj.box.y0 + obj.box.y1) / 2.0;
    const double rx = obj.box.width() / 2.0;
    const double ry = obj.box.height() / 2.0;
    for (int y = obj.box.y0; y < obj.box.y1; ++y) {
        for (int x = obj.box.x0; x < obj.box.x1; ++x) {
            if (obj.ellipse) {
                const double dx = (x + 0.5 - cx) / rx;
                const double dy = (y + 0.5 - cy) / ry;
                if (dx * dx + dy * dy > 1.0) continue;
            }
            labels.set(y, x, static_cast<std::uint8_t>(obj.class_id));
            tight.x0 = std::min(tight.x0, x);
            tight.y0 = std::min(tight.y0, y);
            tight.x1 = std::max(tight.x1, x + 1);
            tight.y1 = std::max(tight.y1, y + 1);
        }
    }
    if (!tight.valid()) throw InternalError("object rasterized to zero pixels");
    return tight;
}

struct GeneratedImage {
    Image image;
    LabelMap labels;
    int scene_id;
    std::vector<ObjectInstance> objects;
};

GeneratedImage generate_image(const ToyRoomsConfig& config, const SceneRule& rule,
                              const ClassPalette& palette, const std::string& split, int index) {
    Rng rng(derive_seed(config.seed, split + "/" + std::to_string(index)));
    const int size = config.image_size;
    LabelMap labels(size, size, 0);

    if (config.num_structure_classes == 2) {
        const int split_row = size / 4 + static_cast<int>(rng.next_below(std::max(1, size / 2)));
        for (int y = split_row; y < size; ++y)
            for (int x = 0; x < size; ++x) labels.set(y, x, 1);
    }

    const int count =
        config.min_objects + static_cast<int>(rng.next_below(
                                 static_cast<std::uint64_t>(config.max_objects -
                                                            config.min_objects) + 1));
    std::vector<PlacedObject> placed;
    const int interior = size - 2;  // keep objects off the ignore ring
    const int lo = std::min(config.min_object_size, interior);
    const int hi = std::min(config.max_object_size, interior);
    for (int obj_i = 0; obj_i < count; ++obj_i) {
        bool done = false;
        for (int attempt = 0; attempt < 200 && !done; ++attempt) {
            PlacedObject obj;
            obj.class_id = config.first_object_class() +
                           static_cast<int>(rng.next_below(config.num_object_classes));
            obj.ellipse = rng.next_below(2) == 1;
            if (lo < 3) break;
            const int w = lo + static_cast<int>(rng.next_below(hi - lo + 1));
            const int h = lo + static_cast<int>(rng.next_below(hi - lo + 1));
            const int x0 = 1 + static_cast<int>(rng.next_below(size - 1 - w - 1 + 1));
            const int y0 = 1 + static_cast<int>(rng.next_below(size - 1 - h - 1 + 1));
            obj.box = {x0, y0, x0 + w, y0 + h};
            if (!boxes_gap_ok(obj.box, placed)) continue;
            obj.tight_box = draw_object(labels, obj);
            placed.push_back(obj);
            done = true;
        }
        if (!done)
            throw ValidationError("toyrooms: could not place object " + std::to_string(obj_i) +
                                  " in " + split + " image " + std::to_string(index) +
                                  " after bounded retries");
    }

    std::vector<bool> present(config.num_classes(), false);
    for (const PlacedObject& obj : placed) present[obj.class_id] = true;

    GeneratedImage out{Image(size, size), labels, rule.classify(present), {}};
    for (const PlacedObject& obj : placed)
        out.objects.push_back(ObjectInstance{obj.class_id, obj.tight_box});

    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const auto& base = palette.colors[labels.at(y, x)];
            for (int ch = 0; ch < 3; ++ch) {
                double v = base[ch] / 255.0 + config.noise_stddev * rng.next_gaussian();
                v = std::clamp(v, 0.0, 1.0);
                out.image.set(y, x, ch, static_cast<std::uint8_t>(std::lround(v * 255.0)));
            }
        }
    }

    // Ignore ring, written last so it never affects object pixels (objects
    // are placed with a 1-pixel interior margin).
    for (int x = 0; x < size; ++x) {
        out.labels.set(0, x, kIgnoreLabel);
        out.labels.set(size - 1, x, kIgnoreLabel);
    }
    for (int y = 0; y < size; ++y) {
        out.labels.set(y, 0, kIgnoreLabel);
        out.labels.set(y, size - 1, kIgnoreLabel);
    }
    return out;
}

DatasetManifest generate_split(const ToyRoomsConfig& config, const SceneRule& rule,
                               const ClassPalette& palette, const std::string& out_dir,
                               const std::string& split, int count) {
    DatasetManifest manifest;
    manifest.base_dir = out_dir;
    manifest.split = split;
    manifest.palette = palette;
    manifest.scene_names = rule.scene_names;
    fs::create_directories(fs::path(out_dir) / split);

    char name[32];
    for (int i = 0; i < count; ++i) {
        GeneratedImage gen = generate_image(config, rule, palette, split, i);
        std::snprintf(name, sizeof(name), "%s/img_%05d.png", split.c_str(), i);
        const std::string image_rel = name;
        std::snprintf(name, sizeof(name), "%s/lab_%05d.png", split.c_str(), i);
        const std::string label_rel = name;
        write_rgb_png((fs::path(out_dir) / image_rel).string(), gen.image);
        write_label_png((fs::path(out_dir) / label_rel).string(), gen.labels);
        manifest.records.push_back(ManifestRecord{image_rel, label_rel, gen.scene_id});
        manifest.objects.push_back(std::move(gen.objects));
    }
    return manifest;
}

void write_scene_names(const std::string& path, const std::vector<std::string>& names) {
    std::string out;
    for (const auto& n : names) {
        out += n;
        out += '\n';
    }
    write_text_file(path, out);
}

std::vector<std::string> read_lines_if_exists(const std::string& path) {
    std::vector<std::string> lines;
    if (!fs::exists(path)) return lines;
    std::istringstream in(read_text_file(path));
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

}  // namespace

GeneratedDataset generate_toyrooms(const ToyRoomsConfig& config, const SceneRule& rule,
                                   const std::string& out_dir) {
    config.validate();
    rule.validate(config.num_classes());
    const ClassPalette palette = make_default_palette(class_names(config));

    fs::create_directories(out_dir);
    GeneratedDataset data;
    data.train = generate_split(config, rule, palette, out_dir, "train", config.train_count);
    data.test = generate_split(config, rule, palette, out_dir, "test", config.test_count);
    write_palette((fs::path(out_dir) / "palette.txt").string(), palette);
    write_scene_names((fs::path(out_dir) / "scenes.txt").string(), rule.scene_names);
    save_manifest((fs::path(out_dir) / "train.manifest").string(), data.train);
    save_manifest((fs::path(out_dir) / "test.manifest").string(), data.test);
    return data;
}

void save_manifest(const std::string& path, const DatasetManifest& manifest) {
    std::string out;
    for (const ManifestRecord& rec : manifest.records) {
        out += rec.image_path;
        out += '\t';
        out += rec.label_path;
        out += '\t';
        out += std::to_string(rec.scene_id);
        out += '\n';
    }
    write_text_file(path, out);
}

DatasetManifest load_manifest(const std::string& path) {
    if (!fs::exists(path)) throw ValidationError("manifest not found: " + path);
    DatasetManifest manifest;
    manifest.base_dir = fs::path(path).parent_path().string();
    manifest.split = fs::path(path).stem().string();

    const std::string palette_path = (fs::path(manifest.base_dir) / "palette.txt").string();
    if (!fs::exists(palette_path))
        throw ValidationError("palette.txt not found next to manifest: " + path);
    manifest.palette = read_palette(palette_path);
    manifest.scene_names =
        read_lines_if_exists((fs::path(manifest.base_dir) / "scenes.txt").string());

    std::istringstream in(read_text_file(path));
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto tab1 = line.find('\t');
        const auto tab2 = tab1 == std::string::npos ? std::string::npos
                                                    : line.find('\t', tab1 + 1);
        if (tab2 == std::string::npos)
            throw ValidationError("malformed manifest line " + std::to_string(line_no) + " in " +
                                  path);
        ManifestRecord rec;
        rec.image_path = line.substr(0, tab1);
        rec.label_path = line.substr(tab1 + 1, tab2 - tab1 - 1);
        rec.scene_id = static_cast<int>(
            parse_int(line.substr(tab2 + 1), "scene id in " + path));
        manifest.records.push_back(std::move(rec));
    }

    const int num_classes = manifest.palette.num_classes();
    const int num_scenes = static_cast<int>(manifest.scene_names.size());
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
        const std::string image_path = manifest.image_path(i);
        if (!fs::exists(image_path))
            throw ValidationError("manifest references missing image: " + image_path);
        const std::string label_path = manifest.label_path(i);
        if (!fs::exists(label_path))
            throw ValidationError("manifest references missing label map: " + label_path);
        read_label_png(label_path).validate(num_classes, label_path);
        if (manifest.records[i].scene_id < 0 ||
            (num_scenes > 0 && manifest.records[i].scene_id >= num_scenes))
            throw ValidationError("scene id out of range in " + path + " line " +
                                  std::to_string(i + 1));
    }
    return manifest;
}

std::vector<Image> load_images(const DatasetManifest& manifest) {
    std::vector<Image> images;
    images.reserve(manifest.size());
    for (std::size_t i = 0; i < manifest.size(); ++i)
        images.push_back(read_rgb_png(manifest.image_path(i)));
    return images;
}

std::vector<LabelMap> load_label_maps(const DatasetManifest& manifest) {
    std::vector<LabelMap> maps;
    maps.reserve(manifest.size());
    for (std::size_t i = 0; i < manifest.size(); ++i)
        maps.push_back(read_label_png(manifest.label_path(i)));
    return maps;
}

}  // namespace pxs
