#include "haarscat/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "haarscat/error.hpp"
#include "haarscat/random.hpp"

namespace haarscat {

using nlohmann::json;

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::InvalidArgument, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::InvalidArgument, "cannot write " + path.string());
    out << text;
    require(static_cast<bool>(out), ErrorKind::InvalidArgument, "write failed for " + path.string());
}

namespace {

std::uint32_t read_be32(const std::string& bytes, std::size_t at) {
    std::uint32_t v = 0;
    for (std::size_t k = 0; k < 4; ++k) v = (v << 8) | static_cast<std::uint8_t>(bytes[at + k]);
    return v;
}

void write_be32(std::string& out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

IdxArray read_idx(const std::filesystem::path& path, std::uint32_t expected_magic) {
    const std::string bytes = read_text(path);
    require(bytes.size() >= 4, ErrorKind::TruncatedFile, path.string() + ": missing IDX header");
    IdxArray array;
    array.magic = read_be32(bytes, 0);
    require(array.magic == expected_magic, ErrorKind::BadMagic,
            path.string() + ": magic " + std::to_string(array.magic) + ", expected " + std::to_string(expected_magic));
    const std::size_t dims = array.magic & 0xff;
    require(bytes.size() >= 4 + 4 * dims, ErrorKind::TruncatedFile, path.string() + ": truncated dimension list");
    std::size_t payload = 1;
    for (std::size_t k = 0; k < dims; ++k) {
        array.shape.push_back(read_be32(bytes, 4 + 4 * k));
        payload *= array.shape.back();
    }
    const std::size_t start = 4 + 4 * dims;
    require(bytes.size() >= start + payload, ErrorKind::TruncatedFile,
            path.string() + ": expected " + std::to_string(payload) + " data bytes, found " +
                std::to_string(bytes.size() - start));
    require(bytes.size() == start + payload, ErrorKind::CorruptFile, path.string() + ": trailing bytes");
    array.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(start), bytes.end());
    return array;
}

void write_idx(const std::filesystem::path& path, const IdxArray& array) {
    require((array.magic & 0xff) == array.shape.size(), ErrorKind::InvalidArgument, "magic and shape disagree");
    std::string out;
    write_be32(out, array.magic);
    std::size_t payload = 1;
    for (auto s : array.shape) {
        write_be32(out, s);
        payload *= s;
    }
    require(payload == array.data.size(), ErrorKind::ShapeMismatch, "IDX payload does not match shape");
    out.append(array.data.begin(), array.data.end());
    write_text(path, out);
}

SignalBatch pad_images(const SignalBatch& images, std::size_t height, std::size_t width, GridGeometry& padded,
                       std::vector<bool>& source_pixels) {
    require(images.dim() == height * width, ErrorKind::ShapeMismatch, "image size does not match h x w");
    const std::size_t side = next_power_of_two(std::max(height, width));
    padded = {side, side};
    const std::size_t top = (side - height) / 2;
    const std::size_t left = (side - width) / 2;
    source_pixels.assign(side * side, false);
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c) source_pixels[(r + top) * side + c + left] = true;
    SignalBatch out(images.count(), side * side);
    for (std::size_t i = 0; i < images.count(); ++i) {
        const auto src = images.row(i);
        auto dst = out.row(i);
        for (std::size_t r = 0; r < height; ++r)
            std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(r * width), width,
                        dst.begin() + static_cast<std::ptrdiff_t>((r + top) * side + left));
    }
    return out;
}

namespace {

void finish_labels(Dataset& ds) {
    ds.classes = 0;
    for (std::size_t y : ds.labels) ds.classes = std::max(ds.classes, y + 1);
}

}  // namespace

Dataset load_idx_dataset(const std::filesystem::path& images, const std::filesystem::path& labels) {
    const auto img = read_idx(images, idx_images_magic);
    const auto lab = read_idx(labels, idx_labels_magic);
    require(img.shape.size() == 3, ErrorKind::ShapeMismatch, "image file must be N x rows x cols");
    require(lab.shape.size() == 1 && lab.shape[0] == img.shape[0], ErrorKind::ShapeMismatch,
            "label count does not match image count");
    const std::size_t count = img.shape[0];
    const std::size_t h = img.shape[1];
    const std::size_t w = img.shape[2];
    SignalBatch raw(count, h * w);
    for (std::size_t k = 0; k < img.data.size(); ++k) raw.values()[k] = img.data[k] / 255.0;
    Dataset ds;
    GridGeometry grid;
    ds.images = pad_images(raw, h, w, grid, ds.source_pixels);
    ds.geometry = grid;
    ds.labels.assign(lab.data.begin(), lab.data.end());
    finish_labels(ds);
    return ds;
}

Dataset load_csv_dataset(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    std::string line;
    std::vector<std::vector<double>> rows;
    Dataset ds;
    std::size_t width = 0;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> values;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (p < end) {
            double v = 0.0;
            while (p < end && (*p == ' ' || *p == '\r')) ++p;
            const auto [next, ec] = std::from_chars(p, end, v);
            require(ec == std::errc{}, ErrorKind::CorruptFile,
                    path.string() + ":" + std::to_string(line_no) + ": not a number");
            values.push_back(v);
            p = next;
            while (p < end && (*p == ' ' || *p == '\r')) ++p;
            if (p < end) {
                require(*p == ',', ErrorKind::CorruptFile, path.string() + ":" + std::to_string(line_no) + ": expected ','");
                ++p;
            }
        }
        require(values.size() >= 2, ErrorKind::CorruptFile, path.string() + ": row without values");
        require(values[0] >= 0 && values[0] == static_cast<double>(static_cast<std::size_t>(values[0])),
                ErrorKind::CorruptFile, path.string() + ":" + std::to_string(line_no) + ": bad label");
        if (width == 0) width = values.size() - 1;
        require(values.size() - 1 == width, ErrorKind::ShapeMismatch,
                path.string() + ":" + std::to_string(line_no) + ": row length differs");
        ds.labels.push_back(static_cast<std::size_t>(values[0]));
        rows.emplace_back(values.begin() + 1, values.end());
    }
    require(!rows.empty(), ErrorKind::EmptyBatch, path.string() + ": no samples");
    const std::size_t d = std::max<std::size_t>(2, next_power_of_two(width));
    ds.images = SignalBatch(rows.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), ds.images.row(i).begin());
    ds.source_pixels.assign(d, false);
    std::fill_n(ds.source_pixels.begin(), width, true);
    finish_labels(ds);
    return ds;
}

ReferenceGraph load_edge_list(const std::filesystem::path& path, std::size_t vertices) {
    std::istringstream in(read_text(path));
    ReferenceGraph g(vertices);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream fields(line);
        long long u = 0, v = 0;
        if (!(fields >> u)) continue;
        require(static_cast<bool>(fields >> v) && u >= 0 && v >= 0, ErrorKind::CorruptFile,
                path.string() + ": bad edge line '" + line + "'");
        g.add_edge(static_cast<std::size_t>(u), static_cast<std::size_t>(v));
    }
    return g;
}

std::vector<std::size_t> scramble_permutation(std::size_t dim, std::uint64_t seed) {
    std::vector<std::size_t> perm(dim);
    for (std::size_t i = 0; i < dim; ++i) perm[i] = i;
    auto rng = make_rng(seed, {0x5c});
    for (std::size_t i = dim; i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(perm[i - 1], perm[pick(rng)]);
    }
    return perm;
}

std::vector<std::size_t> inverse_permutation(const std::vector<std::size_t>& permutation) {
    std::vector<std::size_t> inv(permutation.size(), permutation.size());
    for (std::size_t k = 0; k < permutation.size(); ++k) {
        require(permutation[k] < permutation.size() && inv[permutation[k]] == permutation.size(),
                ErrorKind::InvalidArgument, "not a permutation");
        inv[permutation[k]] = k;
    }
    return inv;
}

SignalBatch permute(const SignalBatch& batch, const std::vector<std::size_t>& permutation) {
    require(permutation.size() == batch.dim(), ErrorKind::DimensionMismatch, "permutation size differs from dim");
    SignalBatch out(batch.count(), batch.dim());
    for (std::size_t i = 0; i < batch.count(); ++i) {
        const auto src = batch.row(i);
        auto dst = out.row(i);
        for (std::size_t k = 0; k < permutation.size(); ++k) dst[k] = src[permutation[k]];
    }
    return out;
}

Dataset scramble(const Dataset& dataset, std::uint64_t seed) {
    const auto perm = scramble_permutation(dataset.images.dim(), seed);
    Dataset out;
    out.images = permute(dataset.images, perm);
    out.labels = dataset.labels;
    out.classes = dataset.classes;
    if (!dataset.source_pixels.empty()) {
        out.source_pixels.resize(perm.size());
        for (std::size_t k = 0; k < perm.size(); ++k) out.source_pixels[k] = dataset.source_pixels[perm[k]];
    }
    return out;
}

HaarNetwork grid_pairings(std::size_t height, std::size_t width, std::size_t depth, std::size_t shift_x,
                          std::size_t shift_y, GridOrientation orientation) {
    require(is_power_of_two(height) && is_power_of_two(width), ErrorKind::NotPowerOfTwo,
            "grid sides must be powers of 2");
    const std::size_t d = height * width;
    require(depth <= log2_exact(d), ErrorKind::InvalidArgument, "depth exceeds log2(h w)");

    std::vector<std::size_t> xs(d), ys(d);
    for (std::size_t v = 0; v < d; ++v) {
        xs[v] = (v % width + shift_x) % width;
        ys[v] = (v / width + shift_y) % height;
        if (orientation == GridOrientation::diagonal) ys[v] = (ys[v] + xs[v]) % height;
    }
    std::vector<std::size_t> rep(d);
    for (std::size_t v = 0; v < d; ++v) rep[v] = v;
    std::size_t block_w = 1, block_h = 1;
    std::vector<Pairing> layers;
    for (std::size_t level = 1; level <= depth; ++level) {
        const bool horizontal = (level % 2 == 1 && block_w < width) || block_h == height;
        (horizontal ? block_w : block_h) *= 2;
        std::map<std::size_t, std::vector<std::size_t>> children;
        for (std::size_t r = 0; r < rep.size(); ++r) {
            const std::size_t v = rep[r];
            children[(ys[v] / block_h) * (width / block_w) + xs[v] / block_w].push_back(r);
        }
        std::vector<IndexPair> pairs;
        for (const auto& [key, rows] : children) {
            require(rows.size() == 2, ErrorKind::InvalidArgument, "grid blocks do not split in two");
            pairs.push_back({rows[0], rows[1]});
        }
        Pairing p(std::move(pairs));
        std::vector<std::size_t> next;
        for (const auto& pr : p.pairs()) next.push_back(rep[pr.first]);
        rep = std::move(next);
        layers.push_back(std::move(p));
    }
    return HaarNetwork(Mode::structured, d, std::move(layers));
}

HaarNetwork grid_variant(std::size_t height, std::size_t width, std::size_t depth, std::size_t t) {
    const auto orientation = t % 2 == 0 ? GridOrientation::axis : GridOrientation::diagonal;
    return grid_pairings(height, width, depth, (t / 2) % 4, (t / 8) % 4, orientation);
}

std::string to_string(Mode mode) { return mode == Mode::free ? "free" : "structured"; }
std::string to_string(Norm norm) { return norm == Norm::l1 ? "l1" : "mixed"; }
std::string to_string(Matcher matcher) { return matcher == Matcher::exact ? "exact" : "greedy"; }

Mode parse_mode(const std::string& s) {
    if (s == "free") return Mode::free;
    if (s == "structured") return Mode::structured;
    fail(ErrorKind::InvalidArgument, "unknown mode '" + s + "'");
}

Norm parse_norm(const std::string& s) {
    if (s == "l1") return Norm::l1;
    if (s == "mixed") return Norm::mixed;
    fail(ErrorKind::InvalidArgument, "unknown norm '" + s + "'");
}

Matcher parse_matcher(const std::string& s) {
    if (s == "exact") return Matcher::exact;
    if (s == "greedy") return Matcher::greedy;
    fail(ErrorKind::InvalidArgument, "unknown matcher '" + s + "'");
}

namespace {

json batch_to_json(const SignalBatch& b) {
    return json{{"count", b.count()}, {"dim", b.dim()}, {"values", b.values()}};
}

SignalBatch batch_from_json(const json& j) {
    return SignalBatch(j.at("count").get<std::size_t>(), j.at("dim").get<std::size_t>(),
                       j.at("values").get<std::vector<double>>());
}

}  // namespace

std::string serialize_model(const ModelFile& file) {
    const auto& m = file.model;
    require(!m.transforms.empty(), ErrorKind::InvalidModel, "model has no transforms");
    json doc;
    doc["version"] = model_format_version;
    doc["mode"] = to_string(m.config.mode);
    doc["dim"] = m.transforms.front().dim();
    doc["depth"] = m.config.depth;
    doc["training"] = {{"norm", to_string(m.config.norm)},
                       {"matcher", to_string(m.config.matcher)},
                       {"seed", m.config.seed}};
    json transforms = json::array();
    for (const auto& net : m.transforms) {
        require(net.mode() == m.config.mode && net.depth() == m.config.depth, ErrorKind::InvalidModel,
                "transform does not match the model configuration");
        json layers = json::array();
        for (const auto& p : net.layers()) {
            json pairs = json::array();
            for (const auto& pr : p.pairs()) pairs.push_back({pr.first, pr.second});
            layers.push_back(std::move(pairs));
        }
        transforms.push_back(std::move(layers));
    }
    doc["transforms"] = std::move(transforms);
    doc["subset_of_sample"] = m.subset_of_sample;
    doc["max_order"] = file.max_order ? json(*file.max_order) : json(nullptr);
    if (file.selection) {
        json classes = json::array();
        for (const auto& c : file.selection->classes)
            classes.push_back({{"features", c.features},
                               {"alpha", c.alpha},
                               {"residual", c.residual},
                               {"transform", c.transform},
                               {"column_norms", c.column_norms}});
        doc["selection"] = {{"dictionary_size", file.selection->dictionary_size}, {"classes", std::move(classes)}};
    } else {
        doc["selection"] = nullptr;
    }
    if (file.classifier) {
        const auto& c = *file.classifier;
        doc["classifier"] = {{"sigma", c.config.sigma},
                             {"lambda", c.config.lambda},
                             {"classes", c.classes},
                             {"training", batch_to_json(c.training)},
                             {"dual", c.dual}};
    } else {
        doc["classifier"] = nullptr;
    }
    return doc.dump(1) + "\n";
}

ModelFile parse_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorKind::CorruptFile, std::string("model file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("version") || !doc["version"].is_number_integer())
        fail(ErrorKind::CorruptFile, "model file has no format version");
    const int version = doc["version"].get<int>();
    require(version == model_format_version, ErrorKind::VersionMismatch,
            "model format " + std::to_string(version) + ", this build reads " + std::to_string(model_format_version));
    try {
        ModelFile file;
        auto& m = file.model;
        m.config.mode = parse_mode(doc.at("mode").get<std::string>());
        m.config.depth = doc.at("depth").get<std::size_t>();
        const auto& tr = doc.at("training");
        m.config.norm = parse_norm(tr.at("norm").get<std::string>());
        m.config.matcher = parse_matcher(tr.at("matcher").get<std::string>());
        m.config.seed = tr.at("seed").get<std::uint64_t>();
        const auto dim = doc.at("dim").get<std::size_t>();
        for (const auto& layers : doc.at("transforms")) {
            std::vector<Pairing> pairings;
            for (const auto& pairs : layers) {
                std::vector<IndexPair> list;
                for (const auto& pr : pairs) list.push_back({pr.at(0).get<std::size_t>(), pr.at(1).get<std::size_t>()});
                pairings.emplace_back(std::move(list));
            }
            m.transforms.emplace_back(m.config.mode, dim, std::move(pairings));
            require(m.transforms.back().depth() == m.config.depth, ErrorKind::CorruptFile, "layer count != depth");
        }
        m.subset_of_sample = doc.at("subset_of_sample").get<std::vector<std::size_t>>();
        if (!doc.at("max_order").is_null()) file.max_order = doc["max_order"].get<int>();
        if (!doc.at("selection").is_null()) {
            SelectionState s;
            s.dictionary_size = doc["selection"].at("dictionary_size").get<std::size_t>();
            for (const auto& c : doc["selection"].at("classes")) {
                ClassSelection cs;
                cs.features = c.at("features").get<std::vector<std::size_t>>();
                cs.alpha = c.at("alpha").get<std::vector<double>>();
                cs.residual = c.at("residual").get<std::vector<double>>();
                cs.transform = c.at("transform").get<std::vector<double>>();
                cs.column_norms = c.at("column_norms").get<std::vector<double>>();
                const std::size_t k = cs.features.size();
                require(cs.alpha.size() == k && cs.residual.size() == k && cs.transform.size() == k * k &&
                            cs.column_norms.size() == k,
                        ErrorKind::CorruptFile, "selection arrays disagree in length");
                for (std::size_t p : cs.features)
                    require(p < s.dictionary_size, ErrorKind::CorruptFile, "selected feature outside dictionary");
                s.classes.push_back(std::move(cs));
            }
            file.selection = std::move(s);
        }
        if (!doc.at("classifier").is_null()) {
            const auto& c = doc["classifier"];
            KernelClassifier clf;
            clf.config.sigma = c.at("sigma").get<double>();
            clf.config.lambda = c.at("lambda").get<double>();
            clf.classes = c.at("classes").get<std::size_t>();
            clf.training = batch_from_json(c.at("training"));
            clf.dual = c.at("dual").get<std::vector<double>>();
            require(clf.dual.size() == clf.training.count() * clf.classes, ErrorKind::CorruptFile,
                    "dual coefficients do not match the training set");
            file.classifier = std::move(clf);
        }
        return file;
    } catch (const json::exception& e) {
        fail(ErrorKind::CorruptFile, std::string("malformed model file: ") + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::CorruptFile) throw;
        fail(ErrorKind::CorruptFile, std::string("inconsistent model file: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const ModelFile& model) { write_text(path, serialize_model(model)); }

ModelFile load_model(const std::filesystem::path& path) { return parse_model(read_text(path)); }

}  // namespace haarscat
