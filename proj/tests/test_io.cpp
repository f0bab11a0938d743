#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "haarscat/experiments.hpp"
#include "haarscat/io.hpp"
#include "support.hpp"

using namespace haarscat;
using testing::error_kind;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("haarscat-io-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path operator/(const std::string& name) const { return path / name; }
};

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

int run(const std::string& args) {
    const std::string cmd = std::string(HAARSCAT_CLI) + " " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str());
}

const std::string data_dir = HAARSCAT_DATA_DIR "/mnist-desk";

}  // namespace

TEST_CASE("IDX fixture round trip") {
    TempDir dir;
    // Hand-built: 1 image of 2 x 3 pixels, big-endian header.
    write_bytes(dir / "img", {0, 0, 8, 3, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 3, 0, 51, 102, 153, 204, 255});
    write_bytes(dir / "lab", {0, 0, 8, 1, 0, 0, 0, 1, 7});
    const auto img = read_idx(dir / "img", idx_images_magic);
    CHECK(img.shape == std::vector<std::uint32_t>{1, 2, 3});
    CHECK(img.data == std::vector<std::uint8_t>{0, 51, 102, 153, 204, 255});
    write_idx(dir / "copy", img);
    CHECK(read_text(dir / "copy") == read_text(dir / "img"));

    const auto ds = load_idx_dataset(dir / "img", dir / "lab");
    CHECK(ds.labels == std::vector<std::size_t>{7});
    CHECK(ds.classes == 8);
    REQUIRE(ds.geometry.has_value());
    CHECK(ds.geometry->height == 4);
    CHECK(ds.geometry->width == 4);
    // 2 x 3 centred in 4 x 4: rows 1..2, columns 0..2 (offset floor((4 - 3) / 2) = 0).
    const auto row = ds.images.row(0);
    std::size_t nonzero = 0;
    for (double v : row) nonzero += v != 0.0;
    CHECK(nonzero == 5);
    CHECK(std::count(ds.source_pixels.begin(), ds.source_pixels.end(), true) == 6);
    double total = 0.0;
    for (double v : row) total += v;
    CHECK(total == doctest::Approx((51 + 102 + 153 + 204 + 255) / 255.0));

    CHECK(error_kind([&] { read_idx(dir / "lab", idx_images_magic); }) == ErrorKind::BadMagic);
    write_bytes(dir / "short", {0, 0, 8, 3, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 3, 0, 51});
    CHECK(error_kind([&] { read_idx(dir / "short", idx_images_magic); }) == ErrorKind::TruncatedFile);
    write_bytes(dir / "header", {0, 0, 8});
    CHECK(error_kind([&] { read_idx(dir / "header", idx_images_magic); }) == ErrorKind::TruncatedFile);
    write_bytes(dir / "long", {0, 0, 8, 1, 0, 0, 0, 1, 7, 9});
    CHECK(error_kind([&] { read_idx(dir / "long", idx_labels_magic); }) == ErrorKind::CorruptFile);
}

TEST_CASE("desk MNIST files load with 32 x 32 geometry") {
    const auto ds = load_idx_dataset(data_dir + "/train-images-idx3-ubyte", data_dir + "/train-labels-idx1-ubyte");
    CHECK(ds.images.dim() == 1024);
    CHECK(ds.classes == 10);
    CHECK(ds.geometry->height == 32);
    for (double v : ds.images.values()) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
    }
    // Borders added by padding stay zero.
    for (std::size_t i = 0; i < 50; ++i) {
        CHECK(ds.images.row(i)[0] == 0.0);
        CHECK(ds.images.row(i)[1023] == 0.0);
    }
}

TEST_CASE("padding") {
    SignalBatch raw(1, 28 * 28, std::vector<double>(28 * 28, 1.0));
    GridGeometry g;
    std::vector<bool> source;
    const auto padded = pad_images(raw, 28, 28, g, source);
    CHECK(g.height == 32);
    CHECK(g.width == 32);
    CHECK(padded.row(0)[2 * 32 + 2] == 1.0);
    CHECK(padded.row(0)[1 * 32 + 2] == 0.0);
    CHECK(padded.row(0)[29 * 32 + 29] == 1.0);
    CHECK(padded.row(0)[30 * 32 + 29] == 0.0);
    CHECK(std::count(source.begin(), source.end(), true) == 784);
    CHECK(error_kind([&] { pad_images(raw, 28, 27, g, source); }) == ErrorKind::ShapeMismatch);
}

TEST_CASE("CSV datasets and edge lists") {
    TempDir dir;
    write_text(dir / "a.csv", "1,0.5,0.25,1\n0,1,2,3\n");
    const auto ds = load_csv_dataset(dir / "a.csv");
    CHECK(ds.images.dim() == 4);
    CHECK(ds.labels == std::vector<std::size_t>{1, 0});
    CHECK(ds.classes == 2);
    CHECK(std::vector<double>(ds.images.row(0).begin(), ds.images.row(0).end()) ==
          std::vector<double>{0.5, 0.25, 1, 0});
    write_text(dir / "b.csv", "1,0.5,x\n");
    CHECK(error_kind([&] { load_csv_dataset(dir / "b.csv"); }) == ErrorKind::CorruptFile);
    write_text(dir / "c.csv", "1,0.5,2\n0,1\n");
    CHECK(error_kind([&] { load_csv_dataset(dir / "c.csv"); }) == ErrorKind::ShapeMismatch);

    write_text(dir / "g.txt", "# ring\n0 1\n1 2\n2 3\n3 0\n");
    const auto g = load_edge_list(dir / "g.txt", 4);
    CHECK(g.adjacent(3, 0));
    CHECK_FALSE(g.adjacent(0, 2));
    write_text(dir / "bad.txt", "0 9\n");
    CHECK(error_kind([&] { load_edge_list(dir / "bad.txt", 4); }).has_value());
}

TEST_CASE("scrambling") {
    const auto perm = scramble_permutation(64, 3);
    CHECK(std::set<std::size_t>(perm.begin(), perm.end()).size() == 64);
    CHECK(perm == scramble_permutation(64, 3));
    CHECK(perm != scramble_permutation(64, 4));
    const auto inv = inverse_permutation(perm);
    std::mt19937_64 rng(1);
    SignalBatch b(3, 64);
    for (double& v : b.values()) v = std::uniform_real_distribution<double>(0, 1)(rng);
    const auto s = permute(b, perm);
    CHECK(permute(s, inv) == b);
    for (std::size_t k = 0; k < 64; ++k) CHECK(s.row(1)[k] == b.row(1)[perm[k]]);
    // Differences between images are relabeled, not changed.
    for (std::size_t k = 0; k < 64; ++k) CHECK(s.row(0)[k] - s.row(2)[k] == b.row(0)[perm[k]] - b.row(2)[perm[k]]);

    Dataset ds{b, {0, 1, 0}, 2, GridGeometry{8, 8}, std::vector<bool>(64, true)};
    const auto scrambled = scramble(ds, 3);
    CHECK_FALSE(scrambled.geometry.has_value());
    CHECK(scrambled.images == s);
    CHECK(error_kind([&] { permute(b, scramble_permutation(8, 0)); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("structured training commutes with scrambling") {
    std::mt19937_64 rng(2);
    SignalBatch b(30, 32);
    for (double& v : b.values()) v = std::uniform_real_distribution<double>(0, 1)(rng);
    const auto perm = scramble_permutation(32, 8);
    const TrainConfig cfg{3, Mode::structured, Norm::l1, Matcher::exact, 0};
    const auto plain = build_partition(train_layerwise(b, cfg));
    const auto scrambled = build_partition(train_layerwise(permute(b, perm), cfg));
    // Both trainings define the same sets once scrambled indices are mapped back.
    for (std::size_t j = 0; j <= 3; ++j) {
        std::set<std::set<std::size_t>> a, c;
        for (const auto& set : plain.level(j)) a.emplace(set.begin(), set.end());
        for (const auto& set : scrambled.level(j)) {
            std::set<std::size_t> mapped;
            for (std::size_t v : set) mapped.insert(perm[v]);
            c.insert(mapped);
        }
        CHECK(a == c);
    }
}

TEST_CASE("grid pairings") {
    const auto two = build_partition(grid_pairings(2, 2, 2, 0, 0, GridOrientation::axis));
    CHECK(two.level(1) == std::vector<std::vector<std::size_t>>{{0, 1}, {2, 3}});
    CHECK(two.level(2).size() == 1);

    const auto four = build_partition(grid_pairings(4, 4, 2, 0, 0, GridOrientation::axis));
    for (const auto& set : four.level(2)) {
        std::set<std::size_t> rows, cols;
        for (std::size_t v : set) rows.insert(v / 4), cols.insert(v % 4);
        CHECK(rows.size() == 2);
        CHECK(cols.size() == 2);
        CHECK(*rows.rbegin() - *rows.begin() == 1);
        CHECK(*cols.rbegin() - *cols.begin() == 1);
        CHECK(*rows.begin() % 2 == 0);
    }

    const auto base = grid_pairings(8, 8, 3, 0, 0, GridOrientation::axis);
    const auto shifted = grid_pairings(8, 8, 3, 1, 0, GridOrientation::axis);
    CHECK(build_partition(base).level(1) != build_partition(shifted).level(1));
    const auto diagonal = build_partition(grid_pairings(8, 8, 4, 0, 0, GridOrientation::diagonal));
    CHECK(diagonal.level(2) != build_partition(base).level(2));

    // Every variant pairs torus neighbours at level 0: axis neighbours for even t,
    // diagonal neighbours for odd t.
    for (std::size_t t = 0; t < 32; ++t) {
        const auto p = build_partition(grid_variant(8, 8, 4, t));
        for (const auto& set : p.level(1)) {
            const std::size_t a = set[0], b = set[1];
            const std::size_t dr = (a / 8 + 8 - b / 8) % 8, dc = (a % 8 + 8 - b % 8) % 8;
            const bool dr1 = dr == 1 || dr == 7, dc1 = dc == 1 || dc == 7;
            if (t % 2 == 0)
                CHECK(((dr == 0 && dc1) || (dc == 0 && dr1)));
            else
                CHECK((dr1 && dc1));
        }
    }
    CHECK(error_kind([] { grid_pairings(6, 8, 2, 0, 0, GridOrientation::axis); }) == ErrorKind::NotPowerOfTwo);
}

TEST_CASE("model files") {
    std::mt19937_64 rng(4);
    SignalBatch b(40, 16);
    for (double& v : b.values()) v = std::uniform_real_distribution<double>(0, 1)(rng);
    std::vector<std::size_t> labels(40);
    for (std::size_t i = 0; i < 40; ++i) labels[i] = i % 3;
    ModelFile file;
    file.model = train_bagged(b, 2, {3, Mode::structured, Norm::mixed, Matcher::greedy, 12});
    file.max_order = 2;
    const auto features = build_features(file.model, b, file.max_order);
    file.selection = ols_select(features, labels, 3, 4);
    auto embedded = project(*file.selection, features);
    normalize_rows(embedded);
    file.classifier = fit({0.9, 1e-2}, embedded, labels, 3);

    TempDir dir;
    save_model(dir / "m.json", file);
    const auto loaded = load_model(dir / "m.json");
    CHECK(loaded == file);
    save_model(dir / "again.json", loaded);
    CHECK(read_text(dir / "m.json") == read_text(dir / "again.json"));
    CHECK(transform(loaded.model.transforms[1], b.row(5)) == transform(file.model.transforms[1], b.row(5)));

    const auto text = read_text(dir / "m.json");
    CHECK(error_kind([&] { parse_model(text.substr(0, text.size() / 2)); }) == ErrorKind::CorruptFile);
    CHECK(error_kind([&] { parse_model("{}"); }) == ErrorKind::CorruptFile);
    auto bumped = text;
    const auto at = bumped.find("\"version\": 1");
    REQUIRE(at != std::string::npos);
    bumped.replace(at, 12, "\"version\": 2");
    CHECK(error_kind([&] { parse_model(bumped); }) == ErrorKind::VersionMismatch);

    ModelFile bare;
    bare.model = train_bagged(b, 1, {2, Mode::free, Norm::l1, Matcher::exact, 0});
    CHECK(parse_model(serialize_model(bare)) == bare);
}

TEST_CASE("command line runs are reproducible") {
    TempDir dir;
    const std::string images = data_dir + "/train-images-idx3-ubyte";
    const std::string labels = data_dir + "/train-labels-idx1-ubyte";
    // Outputs record the model file name, so both runs use the same names in separate folders.
    for (const std::string name : {"a", "b"}) {
        fs::create_directories(dir / name);
        const auto out = (dir / name / "run").string();
        REQUIRE(run("train --images " + images + " --labels " + labels +
                    " --count 120 --depth 3 --transforms 2 --per-class 5 --seed 3 --out " + out + ".json") == 0);
        REQUIRE(run("classify --model " + out + ".json --images " + images + " --labels " + labels +
                    " --count 50 --out " + out + ".pred.csv") == 0);
        REQUIRE(run("transform --model " + out + ".json --images " + images + " --labels " + labels +
                    " --count 5 --out " + out + ".features.csv") == 0);
        REQUIRE(run("experiment reconstruct --dims 4,8 --trials 5 --depth 2 --seed 1 --out " + out + ".rec.csv") == 0);
    }
    for (const std::string ext : {".json", ".pred.csv", ".features.csv", ".rec.csv"})
        CHECK(read_text(dir / "a" / ("run" + ext)) == read_text(dir / "b" / ("run" + ext)));

    CHECK(run("scramble --images " + images + " --seed 5 --out " + (dir / "s.idx").string() + " --permutation-out " +
              (dir / "perm.txt").string()) == 0);
    const auto orig = read_idx(images, idx_images_magic);
    const auto scr = read_idx(dir / "s.idx", idx_images_magic);
    const auto perm = scramble_permutation(784, 5);
    for (std::size_t k = 0; k < 784; ++k) CHECK(scr.data[784 + k] == orig.data[784 + perm[k]]);

    CHECK(run("train --images /nonexistent --labels /nonexistent --out " + (dir / "x").string()) != 0);
    CHECK(run("experiment reconstruct --dims 4 --trials 1 --depth 1") != 0);
}
