#include "semiscale/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace semiscale {

namespace {

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageFormatError("cannot open image '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string lower_extension(const std::string& path) {
    auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return {};
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

Image from_interleaved(const unsigned char* data, int width, int height, int channels) {
    Image img;
    img.planes.assign(channels, Grid2(width, height));
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < channels; ++c) {
                std::size_t i = (static_cast<std::size_t>(y) * width + x) * channels + c;
                img.planes[c](x, y) = data[i] / 255.0;
            }
        }
    }
    return img;
}

unsigned char quantize(double v) {
    if (std::isnan(v)) v = 0.0;
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

std::vector<unsigned char> to_interleaved(const Image& image) {
    const int w = image.width();
    const int h = image.height();
    const int ch = image.channels();
    std::vector<unsigned char> data(static_cast<std::size_t>(w) * h * ch);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < ch; ++c) {
                data[(static_cast<std::size_t>(y) * w + x) * ch + c] = quantize(image.planes[c](x, y));
            }
        }
    }
    return data;
}

Image load_png(const std::vector<unsigned char>& bytes, const std::string& path) {
    png_image png;
    std::memset(&png, 0, sizeof png);
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
        throw ImageFormatError("corrupt PNG '" + path + "': " + png.message);
    }
    if (png.format & PNG_FORMAT_FLAG_LINEAR) {
        png_image_free(&png);
        throw ImageFormatError("16-bit PNG '" + path + "' is not supported");
    }
    const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
    png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    std::vector<unsigned char> data(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, data.data(), 0, nullptr)) {
        std::string msg = png.message;
        png_image_free(&png);
        throw ImageFormatError("corrupt PNG '" + path + "': " + msg);
    }
    return from_interleaved(data.data(), static_cast<int>(png.width), static_cast<int>(png.height),
                            color ? 3 : 1);
}

class PnmReader {
public:
    PnmReader(const std::vector<unsigned char>& bytes, const std::string& path) : b_(bytes), path_(path) {}

    long next_int() {
        skip_space();
        if (pos_ >= b_.size() || !std::isdigit(b_[pos_])) fail("expected a number");
        long v = 0;
        while (pos_ < b_.size() && std::isdigit(b_[pos_])) {
            v = v * 10 + (b_[pos_++] - '0');
            if (v > 1'000'000'000) fail("number out of range");
        }
        return v;
    }
    void skip_single_space() {
        if (pos_ >= b_.size() || !std::isspace(b_[pos_])) fail("missing separator after header");
        ++pos_;
    }
    std::size_t pos() const { return pos_; }
    [[noreturn]] void fail(const std::string& what) const {
        throw ImageFormatError("corrupt PNM '" + path_ + "': " + what);
    }

private:
    void skip_space() {
        while (pos_ < b_.size()) {
            if (b_[pos_] == '#') {
                while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
            } else if (std::isspace(b_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }
    const std::vector<unsigned char>& b_;
    const std::string& path_;
    std::size_t pos_ = 2;
};

Image load_pnm(const std::vector<unsigned char>& bytes, const std::string& path) {
    const char type = static_cast<char>(bytes[1]);
    const bool binary = type == '5' || type == '6';
    const int channels = (type == '3' || type == '6') ? 3 : 1;
    PnmReader r(bytes, path);
    long w = r.next_int();
    long h = r.next_int();
    long maxval = r.next_int();
    if (w <= 0 || h <= 0) r.fail("non-positive dimensions");
    if (maxval <= 0) r.fail("bad maxval");
    if (maxval > 255) throw ImageFormatError("16-bit PNM '" + path + "' is not supported");
    const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * channels;
    std::vector<unsigned char> data(count);
    if (binary) {
        r.skip_single_space();
        if (bytes.size() - r.pos() < count) r.fail("truncated pixel data");
        std::copy_n(bytes.begin() + static_cast<long>(r.pos()), count, data.begin());
    } else {
        for (auto& v : data) {
            long x = r.next_int();
            if (x > maxval) r.fail("sample exceeds maxval");
            v = static_cast<unsigned char>(x);
        }
    }
    if (maxval != 255) {
        for (auto& v : data) v = static_cast<unsigned char>(std::lround(v * 255.0 / maxval));
    }
    return from_interleaved(data.data(), static_cast<int>(w), static_cast<int>(h), channels);
}

}  // namespace

Image load_image(const std::string& path) {
    auto bytes = read_file(path);
    static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= 8 && std::equal(png_sig, png_sig + 8, bytes.begin())) return load_png(bytes, path);
    if (bytes.size() >= 3 && bytes[0] == 'P' && bytes[1] >= '2' && bytes[1] <= '6' && bytes[1] != '4') {
        return load_pnm(bytes, path);
    }
    throw ImageFormatError("unsupported image format: '" + path + "'");
}

Grid2 to_grayscale(const Image& image) {
    if (image.channels() == 1) return image.planes.front();
    if (image.channels() != 3) throw ImageFormatError("expected a gray or RGB image");
    Grid2 out(image.width(), image.height());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.values()[i] = 0.299 * image.planes[0].values()[i] + 0.587 * image.planes[1].values()[i] +
                          0.114 * image.planes[2].values()[i];
    }
    return out;
}

void save_image(const Image& image, const std::string& path) {
    const int ch = image.channels();
    if (ch != 1 && ch != 3) throw ImageFormatError("only gray and RGB images can be saved");
    auto data = to_interleaved(image);
    const std::string ext = lower_extension(path);
    if (ext == "png") {
        png_image png;
        std::memset(&png, 0, sizeof png);
        png.version = PNG_IMAGE_VERSION;
        png.width = static_cast<png_uint_32>(image.width());
        png.height = static_cast<png_uint_32>(image.height());
        png.format = ch == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
        if (!png_image_write_to_file(&png, path.c_str(), 0, data.data(), 0, nullptr)) {
            throw ImageFormatError("cannot write PNG '" + path + "': " + png.message);
        }
        return;
    }
    if (ext == "pgm" || ext == "ppm") {
        if ((ext == "pgm") != (ch == 1)) throw ImageFormatError("'." + ext + "' does not match the channel count");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ImageFormatError("cannot write '" + path + "'");
        out << (ch == 1 ? "P5" : "P6") << '\n' << image.width() << ' ' << image.height() << "\n255\n";
        out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
        if (!out) throw ImageFormatError("failed writing '" + path + "'");
        return;
    }
    throw ImageFormatError("unsupported output format for '" + path + "' (use .png, .pgm or .ppm)");
}

void save_image(const Grid2& gray, const std::string& path) { save_image(Image{{gray}}, path); }

}  // namespace semiscale
