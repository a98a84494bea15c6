#include <doctest.h>
#include <png.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "semiscale/csv.hpp"
#include "semiscale/data_source.hpp"
#include "semiscale/image_io.hpp"
#include "semiscale/patches.hpp"

using namespace semiscale;
using oracle::Rng;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("semiscale_io_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
};

void write_png16(const std::string& path, int w, int h) {
    FILE* fp = std::fopen(path.c_str(), "wb");
    REQUIRE(fp);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    png_init_io(png, fp);
    png_set_IHDR(png, info, w, h, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_byte> row(2 * w, 0x7f);
    for (int y = 0; y < h; ++y) png_write_row(png, row.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

Image rgb_image(Rng& rng, int w, int h) {
    Image img;
    for (int c = 0; c < 3; ++c) img.planes.push_back(oracle::random_grid(rng, w, h, 0, 1));
    return img;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("image round trips are exact up to 8-bit quantisation") {
    TempDir dir("roundtrip");
    Rng rng(31);
    Grid2 gray = oracle::random_grid(rng, 23, 17, 0, 1);
    for (std::string name : {"g.png", "g.pgm"}) {
        save_image(gray, dir / name);
        Image back = load_image(dir / name);
        REQUIRE(back.channels() == 1);
        CHECK(back.width() == 23);
        CHECK(back.height() == 17);
        CHECK(oracle::max_abs(back.planes[0], gray) <= 1.0 / 510 + 1e-12);
    }
    Image color = rgb_image(rng, 9, 11);
    for (std::string name : {"c.png", "c.ppm"}) {
        save_image(color, dir / name);
        Image back = load_image(dir / name);
        REQUIRE(back.channels() == 3);
        for (int c = 0; c < 3; ++c) CHECK(oracle::max_abs(back.planes[c], color.planes[c]) <= 1.0 / 510 + 1e-12);
    }
    // Values outside [0, 1] are clamped on write.
    save_image(Grid2(2, 2, std::vector<double>{-1, 2, 0.5, 1}), dir / "clamp.png");
    CHECK(load_image(dir / "clamp.png").planes[0].values() == std::vector<double>{0, 1, 128.0 / 255, 1});
}

TEST_CASE("ascii pnm and maxval rescaling") {
    TempDir dir("ascii");
    {
        std::ofstream out(dir / "a.pgm");
        out << "P2\n# comment\n3 1\n15\n0 15 5\n";
    }
    Image img = load_image(dir / "a.pgm");
    REQUIRE(img.width() == 3);
    CHECK(img.planes[0](0, 0) == 0.0);
    CHECK(img.planes[0](1, 0) == 1.0);
    CHECK(img.planes[0](2, 0) == doctest::Approx(85.0 / 255));
}

TEST_CASE("bad images are rejected") {
    TempDir dir("bad");
    write_png16(dir / "deep.png", 4, 4);
    CHECK_THROWS_AS(load_image(dir / "deep.png"), ImageFormatError);
    {
        std::ofstream out(dir / "deep.pgm");
        out << "P5\n2 2\n65535\n" << std::string(8, '\0');
    }
    CHECK_THROWS_AS(load_image(dir / "deep.pgm"), ImageFormatError);

    Rng rng(32);
    save_image(oracle::random_grid(rng, 30, 30, 0, 1), dir / "ok.png");
    std::string bytes;
    {
        std::ifstream in(dir / "ok.png", std::ios::binary);
        bytes.assign(std::istreambuf_iterator<char>(in), {});
    }
    {
        std::ofstream out(dir / "truncated.png", std::ios::binary);
        out << bytes.substr(0, bytes.size() / 2);
    }
    CHECK_THROWS_AS(load_image(dir / "truncated.png"), ImageFormatError);
    {
        std::ofstream out(dir / "short.pgm", std::ios::binary);
        out << "P5\n4 4\n255\nab";
    }
    CHECK_THROWS_AS(load_image(dir / "short.pgm"), ImageFormatError);
    {
        std::ofstream out(dir / "text.png");
        out << "hello";
    }
    CHECK_THROWS_AS(load_image(dir / "text.png"), ImageFormatError);
    CHECK_THROWS_AS(load_image(dir / "missing.png"), ImageFormatError);
    CHECK_THROWS_AS(save_image(Grid2(2, 2), dir / "x.bmp"), ImageFormatError);
    CHECK_THROWS_AS(save_image(rgb_image(rng, 2, 2), dir / "x.pgm"), ImageFormatError);
}

TEST_CASE("grayscale uses luma weights") {
    Image img;
    img.planes = {Grid2(1, 1, 1.0), Grid2(1, 1, 0.5), Grid2(1, 1, 0.0)};
    CHECK(to_grayscale(img)(0, 0) == doctest::Approx(0.299 + 0.587 * 0.5));
    Image gray;
    gray.planes = {Grid2(1, 1, 0.3)};
    CHECK(to_grayscale(gray)(0, 0) == 0.3);
}

TEST_CASE("patch offsets span the image evenly") {
    auto xs = patch_offsets(565, 64, 12);
    auto ys = patch_offsets(584, 64, 12);
    REQUIRE(xs.size() == 12);
    CHECK(xs.front() == 0);
    CHECK(xs.back() == 565 - 64);
    CHECK(ys.back() == 584 - 64);
    for (int k = 0; k < 12; ++k) CHECK(xs[k] == (k * (565 - 64)) / 11);
    CHECK(patch_offsets(64, 64, 3) == std::vector<int>{0, 0, 0});
    CHECK_THROWS_AS(patch_offsets(63, 64, 2), std::invalid_argument);
}

TEST_CASE("patch extraction counts and drop rule") {
    Rng rng(33);
    const int w = 565, h = 584;
    std::vector<FeatureStack> images;
    std::vector<Grid2> ones, annotations;
    for (int i = 0; i < 20; ++i) {
        images.push_back({Grid2(w, h, 0.1 * (i % 10)), Grid2(w, h, 0.5), Grid2(w, h, 0.2)});
        ones.push_back(Grid2(w, h, 1.0));
        annotations.push_back(Grid2(w, h, 0.0));
    }
    auto all = extract_patches(images, ones, annotations);
    CHECK(all.pre_filter == 2880);
    CHECK(all.data.size() == 2880);
    CHECK(all.origins[13].image == 0);
    CHECK(all.origins[13].x == patch_offsets(w, 64, 12)[1]);
    CHECK(all.origins[13].y == patch_offsets(h, 64, 12)[1]);
    CHECK(all.origins[144].image == 1);
    CHECK(all.data.images[0].size() == 3);

    // A disc of field of view: corners fall outside and carry no annotation.
    std::vector<Grid2> discs(20, Grid2(w, h, 0.0));
    for (auto& d : discs)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if ((x - w / 2.0) * (x - w / 2.0) + (y - h / 2.0) * (y - h / 2.0) < 270.0 * 270.0) d(x, y) = 1.0;
    auto disc = extract_patches(images, discs, annotations);
    CHECK(disc.pre_filter == 2880);
    CHECK(disc.data.size() < 2880);
    CHECK(disc.data.size() % 20 == 0);

    // Annotated patches always survive.
    for (auto& a : annotations) a(0, 0) = 1.0;
    auto kept = extract_patches(images, discs, annotations);
    CHECK(kept.data.size() == disc.data.size() + 20);

    // Independent count of the drop rule on one image.
    std::size_t expected = 0;
    for (int py : patch_offsets(h, 64, 12))
        for (int px : patch_offsets(w, 64, 12)) {
            int outside = 0;
            for (int y = 0; y < 64; ++y)
                for (int x = 0; x < 64; ++x) outside += discs[0](px + x, py + y) > 0.5 ? 0 : 1;
            if (outside < 0.99 * 64 * 64) ++expected;
        }
    CHECK(disc.data.size() == 20 * expected);

    CHECK_THROWS_AS(extract_patches(images, ones, {}), std::invalid_argument);
    ones[3] = Grid2(w, h - 1, 1.0);
    CHECK_THROWS_AS(extract_patches(images, ones, annotations), std::invalid_argument);
}

TEST_CASE("patch extraction is deterministic") {
    Rng rng(34);
    std::vector<FeatureStack> images{{oracle::random_grid(rng, 100, 90, 0, 1)}};
    std::vector<Grid2> masks{Grid2(100, 90, 1.0)};
    std::vector<Grid2> ann{oracle::random_grid(rng, 100, 90, 0, 1)};
    PatchSpec spec{32, 3, 4, 0.99};
    auto a = extract_patches(images, masks, ann, spec);
    auto b = extract_patches(images, masks, ann, spec);
    REQUIRE(a.data.size() == 12);
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        CHECK(a.data.images[i][0] == b.data.images[i][0]);
        CHECK(a.data.masks[i] == b.data.masks[i]);
        auto o = a.origins[i];
        CHECK(a.data.images[i][0](5, 7) == images[0][0](o.x + 5, o.y + 7));
    }
}

TEST_CASE("drive folders") {
    TempDir dir("drive");
    Rng rng(35);
    for (auto sub : {"images", "mask", "1st_manual"}) fs::create_directories(dir.path / "training" / sub);
    for (int i = 0; i < 2; ++i) {
        std::string id = std::to_string(21 + i);
        save_image(rgb_image(rng, 70, 80), dir / ("training/images/" + id + "_training.png"));
        save_image(Grid2(70, 80, 1.0), dir / ("training/mask/" + id + "_training_mask.png"));
        Grid2 ann(70, 80, 0.0);
        ann(10, 10) = 1.0;
        save_image(ann, dir / ("training/1st_manual/" + id + "_manual1.png"));
    }
    auto set = load_drive(dir / "training");
    REQUIRE(set.images.size() == 2);
    CHECK(set.names[0] == "21_training.png");
    CHECK(set.images[0].size() == 3);
    CHECK(set.images[0][0].width() == 70);
    CHECK(set.annotations[1](10, 10) == 1.0);

    auto train = load_split(DataSource::parse("drive:" + dir.path.string()), Split::Train);
    CHECK(train.size() == 2 * 144);
    CHECK_THROWS(load_split(DataSource::parse("drive:" + dir.path.string()), Split::Test));

    fs::remove(dir.path / "training/mask/22_training_mask.png");
    CHECK_THROWS_AS(load_drive(dir / "training"), std::runtime_error);
}

TEST_CASE("data source specifications") {
    auto s = DataSource::parse("synthetic:42");
    CHECK(s.kind == DataSource::Kind::Synthetic);
    CHECK(s.seed == 42);
    auto d = DataSource::parse("drive:/data/DRIVE");
    CHECK(d.kind == DataSource::Kind::Drive);
    CHECK(d.path == "/data/DRIVE");
    for (std::string bad : {"synthetic:", "synthetic:4x", "drive:", "imagenet:1", "plain"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(DataSource::parse(bad), std::invalid_argument);
    }
}

TEST_CASE("csv quoting and round trip") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_field("two\nlines") == "\"two\nlines\"");
    CHECK(csv_field("") == "");

    std::ostringstream out;
    write_csv(out, {"name", "value"}, {{"x,y", "1.5"}, {"multi\nline", "\"q\""}, {"", "-0"}});
    CHECK(out.str().find('\r') == std::string::npos);
    CHECK(out.str().starts_with("name,value\n\"x,y\",1.5\n"));
    std::istringstream in(out.str());
    auto rows = read_csv(in);
    REQUIRE(rows.size() == 4);
    CHECK(rows[1] == CsvRow{"x,y", "1.5"});
    CHECK(rows[2] == CsvRow{"multi\nline", "\"q\""});
    CHECK(rows[3] == CsvRow{"", "-0"});

    std::istringstream crlf("a,b\r\n1,2\r\n");
    CHECK(read_csv(crlf) == std::vector<CsvRow>{{"a", "b"}, {"1", "2"}});
    std::istringstream broken("a,\"open\n");
    CHECK_THROWS(read_csv(broken));
}

TEST_CASE("csv numbers read back exactly") {
    Rng rng(36);
    for (int i = 0; i < 1000; ++i) {
        double v = oracle::uniform(rng, -1, 1) * std::pow(10.0, oracle::uniform(rng, -12, 12));
        CHECK(std::stod(csv_number(v)) == v);
    }
    CHECK(csv_number(0.5) == "0.5");
    CHECK(csv_number(3.0) == "3");
}

}  // TEST_SUITE
