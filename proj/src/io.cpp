#include "pixelscene/io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace pxs {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw ValidationError("cannot open file: " + path);
    return f;
}

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    }
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriter() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    }
};

// rows must outlive png_read_image/png_write_image
std::vector<png_bytep> row_pointers(std::uint8_t* data, int height, std::size_t stride) {
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) rows[y] = data + y * stride;
    return rows;
}

void read_png_8bit(const std::string& path, int want_channels, int& height, int& width,
                   std::vector<std::uint8_t>& out) {
    FilePtr file = open_file(path, "rb");
    png_byte header[8];
    if (std::fread(header, 1, 8, file.get()) != 8 || png_sig_cmp(header, 0, 8))
        throw ValidationError("not a PNG file: " + path);

    PngReader r;
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!r.png) throw InternalError("libpng init failed");
    r.info = png_create_info_struct(r.png);
    if (!r.info) throw InternalError("libpng info init failed");
    if (setjmp(png_jmpbuf(r.png))) throw ValidationError("corrupt PNG file: " + path);

    png_init_io(r.png, file.get());
    png_set_sig_bytes(r.png, 8);
    png_read_info(r.png, r.info);

    width = static_cast<int>(png_get_image_width(r.png, r.info));
    height = static_cast<int>(png_get_image_height(r.png, r.info));
    const int color_type = png_get_color_type(r.png, r.info);
    const int bit_depth = png_get_bit_depth(r.png, r.info);

    if (want_channels == 1) {
        if (color_type != PNG_COLOR_TYPE_GRAY || bit_depth != 8)
            throw ValidationError("label map PNG must be 8-bit single-channel: " + path);
    } else {
        if (bit_depth == 16) png_set_strip_16(r.png);
        if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
        if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
            if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
            png_set_gray_to_rgb(r.png);
        }
        if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(r.png);
        if (png_get_valid(r.png, r.info, PNG_INFO_tRNS)) {
            png_set_tRNS_to_alpha(r.png);
            png_set_strip_alpha(r.png);
        }
    }
    png_read_update_info(r.png, r.info);

    const std::size_t stride = png_get_rowbytes(r.png, r.info);
    if (stride != static_cast<std::size_t>(width) * want_channels)
        throw ValidationError("unexpected PNG layout in " + path);
    out.assign(static_cast<std::size_t>(height) * stride, 0);
    auto rows = row_pointers(out.data(), height, stride);
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);
}

void write_png_8bit(const std::string& path, const std::uint8_t* data, int height, int width,
                    int channels) {
    FilePtr file = open_file(path, "wb");
    PngWriter w;
    w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!w.png) throw InternalError("libpng init failed");
    w.info = png_create_info_struct(w.png);
    if (!w.info) throw InternalError("libpng info init failed");
    if (setjmp(png_jmpbuf(w.png))) throw InternalError("PNG write failed: " + path);

    png_init_io(w.png, file.get());
    const int color = channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(w.png, w.info, width, height, 8, color, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    auto rows = row_pointers(const_cast<std::uint8_t*>(data), height,
                             static_cast<std::size_t>(width) * channels);
    png_write_image(w.png, rows.data());
    png_write_end(w.png, nullptr);
}

void put_u32le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void write_label_png(const std::string& path, const LabelMap& labels) {
    write_png_8bit(path, labels.data().data(), labels.height(), labels.width(), 1);
}

LabelMap read_label_png(const std::string& path) {
    int h = 0, w = 0;
    std::vector<std::uint8_t> data;
    read_png_8bit(path, 1, h, w, data);
    LabelMap labels(h, w);
    labels.data() = std::move(data);
    return labels;
}

void write_rgb_png(const std::string& path, const Image& image) {
    write_png_8bit(path, image.data().data(), image.height(), image.width(), 3);
}

Image read_rgb_png(const std::string& path) {
    int h = 0, w = 0;
    std::vector<std::uint8_t> data;
    read_png_8bit(path, 3, h, w, data);
    Image image(h, w);
    image.data() = std::move(data);
    return image;
}

void write_scoremap(const std::string& path, const ScoreMap& scores) {
    std::string buf;
    buf.reserve(17 + scores.data().size() * 4);
    buf.append("PXSM");
    buf.push_back(1);
    put_u32le(buf, static_cast<std::uint32_t>(scores.height()));
    put_u32le(buf, static_cast<std::uint32_t>(scores.width()));
    put_u32le(buf, static_cast<std::uint32_t>(scores.num_classes()));
    static_assert(sizeof(float) == 4);
    const std::size_t pos = buf.size();
    buf.resize(pos + scores.data().size() * 4);
    char* out = buf.data() + pos;
    for (const double v : scores.data()) {
        const float f = static_cast<float>(v);
        std::memcpy(out, &f, 4);
        out += 4;
    }
    write_text_file(path, buf);
}

ScoreMap read_scoremap(const std::string& path) {
    const std::string buf = read_text_file(path);
    if (buf.size() < 17 || buf.compare(0, 4, "PXSM") != 0)
        throw ValidationError("not a PXSM score map: " + path);
    if (buf[4] != 1) throw ValidationError("unsupported PXSM version in " + path);
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
    const std::uint32_t h = get_u32le(p + 5);
    const std::uint32_t w = get_u32le(p + 9);
    const std::uint32_t c = get_u32le(p + 13);
    if (h < 1 || w < 1 || c < 2)
        throw ValidationError("invalid PXSM dimensions in " + path);
    const std::size_t expect = static_cast<std::size_t>(h) * w * c * 4;
    if (buf.size() != 17 + expect)
        throw ValidationError("truncated PXSM file: " + path);
    ScoreMap scores(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
    const char* in = buf.data() + 17;
    for (double& v : scores.data()) {
        float f;
        std::memcpy(&f, in, 4);
        in += 4;
        if (!std::isfinite(f)) throw ValidationError("non-finite score in " + path);
        v = static_cast<double>(f);
    }
    return scores;
}

void write_palette(const std::string& path, const ClassPalette& palette) {
    palette.validate();
    std::string out;
    for (int i = 0; i < palette.num_classes(); ++i) {
        out += palette.names[i];
        out += ' ';
        out += std::to_string(palette.colors[i][0]);
        out += ' ';
        out += std::to_string(palette.colors[i][1]);
        out += ' ';
        out += std::to_string(palette.colors[i][2]);
        out += '\n';
    }
    write_text_file(path, out);
}

ClassPalette read_palette(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::vector<std::string> names;
    std::vector<std::array<std::uint8_t, 3>> colors;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string name;
        ls >> name;
        int r = -1, g = -1, b = -1;
        if (ls >> r >> g >> b) {
            if (r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255)
                throw ValidationError("invalid palette color in " + path);
            colors.push_back({static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                              static_cast<std::uint8_t>(b)});
        } else {
            colors.push_back({0, 0, 0});  // fill defaults below
        }
        names.push_back(name);
    }
    if (names.empty()) throw ValidationError("empty palette file: " + path);
    bool any_default = false;
    for (const auto& c : colors) any_default |= (c == std::array<std::uint8_t, 3>{0, 0, 0});
    if (any_default) {
        const auto def = make_default_palette(names);
        for (std::size_t i = 0; i < colors.size(); ++i)
            if (colors[i] == std::array<std::uint8_t, 3>{0, 0, 0}) colors[i] = def.colors[i];
    }
    ClassPalette palette{std::move(names), std::move(colors)};
    palette.validate();
    return palette;
}

void write_feature(const std::string& path, const std::vector<double>& values) {
    std::string out;
    for (const double v : values) {
        out += format_double(v);
        out += '\n';
    }
    write_text_file(path, out);
}

std::vector<double> read_feature(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        values.push_back(parse_double(line, "feature value in " + path));
    }
    return values;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InternalError("short write: " + path);
}

}  // namespace pxs
