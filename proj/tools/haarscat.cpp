#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "haarscat/error.hpp"
#include "haarscat/experiments.hpp"
#include "haarscat/features.hpp"
#include "haarscat/io.hpp"
#include "haarscat/kernels.hpp"
#include "haarscat/learn.hpp"

namespace fs = std::filesystem;
using namespace haarscat;

namespace {

struct Common {
    std::uint64_t seed = 0;
    std::size_t depth = 0;
    std::size_t transforms = 1;
    std::string norm = "l1";
    std::string matcher = "exact";
    std::string mode = "structured";
    fs::path out;
};

void add_common(CLI::App* cmd, Common& c, std::size_t default_depth, std::size_t default_transforms) {
    c.depth = default_depth;
    c.transforms = default_transforms;
    cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    cmd->add_option("--depth", c.depth, "Network depth J")->capture_default_str();
    cmd->add_option("--transforms", c.transforms, "Number of bagged transforms T")->capture_default_str();
    cmd->add_option("--norm", c.norm, "Pairing cost")->check(CLI::IsMember({"l1", "mixed"}))->capture_default_str();
    cmd->add_option("--matcher", c.matcher, "Pairing solver")
        ->check(CLI::IsMember({"exact", "greedy"}))
        ->capture_default_str();
    cmd->add_option("--mode", c.mode, "Network type")
        ->check(CLI::IsMember({"free", "structured"}))
        ->capture_default_str();
    cmd->add_option("--out", c.out, "Output file")->required();
}

TrainConfig train_config(const Common& c) {
    return {c.depth, parse_mode(c.mode), parse_norm(c.norm), parse_matcher(c.matcher), c.seed};
}

struct DataArgs {
    fs::path images;
    fs::path labels;
    fs::path csv;
    std::size_t count = 0;
};

void add_data(CLI::App* cmd, DataArgs& a, bool labels_required) {
    auto* img = cmd->add_option("--images", a.images, "IDX image file");
    auto* csv = cmd->add_option("--csv", a.csv, "CSV dataset (label,values...)");
    auto* lab = cmd->add_option("--labels", a.labels, "IDX label file");
    img->excludes(csv);
    if (labels_required) img->needs(lab);
    cmd->add_option("--count", a.count, "Use only the first N samples (0 = all)");
}

Dataset load(const DataArgs& a) {
    Dataset ds;
    if (!a.csv.empty()) {
        ds = load_csv_dataset(a.csv);
    } else {
        require(!a.images.empty(), ErrorKind::InvalidArgument, "pass --images or --csv");
        if (a.labels.empty()) {
            const auto img = read_idx(a.images, idx_images_magic);
            require(img.shape.size() == 3, ErrorKind::ShapeMismatch, "image file must be N x rows x cols");
            SignalBatch raw(img.shape[0], std::size_t{img.shape[1]} * img.shape[2]);
            for (std::size_t k = 0; k < img.data.size(); ++k) raw.values()[k] = img.data[k] / 255.0;
            GridGeometry g;
            ds.images = pad_images(raw, img.shape[1], img.shape[2], g, ds.source_pixels);
            ds.geometry = g;
            ds.labels.assign(raw.count(), 0);
            ds.classes = 1;
        } else {
            ds = load_idx_dataset(a.images, a.labels);
        }
    }
    if (a.count && a.count < ds.images.count()) {
        std::vector<std::size_t> rows(a.count);
        for (std::size_t i = 0; i < a.count; ++i) rows[i] = i;
        ds.images = ds.images.select(rows);
        ds.labels.resize(a.count);
    }
    return ds;
}

class Stopwatch {
public:
    explicit Stopwatch(std::string label) : label_(std::move(label)), start_(std::chrono::steady_clock::now()) {}
    ~Stopwatch() {
        const std::chrono::duration<double> s = std::chrono::steady_clock::now() - start_;
        std::cerr << label_ << ": " << s.count() << " s (" << kernels::max_threads() << " threads)\n";
    }

private:
    std::string label_;
    std::chrono::steady_clock::time_point start_;
};

void write_report(const fs::path& out, const Report& report) {
    write_text(out, report.csv());
    std::cout << report.csv();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Haar scattering: pairing learning, transforms, classification and experiments"};
    app.require_subcommand(1);

    // train
    Common train_common;
    DataArgs train_data;
    bool grid = false;
    bool unsupervised = false;
    int max_order = 4;
    std::size_t per_class = 0;
    KernelConfig kernel;
    auto* train = app.add_subcommand("train", "Learn pairings (and optionally a classifier) and save a model file");
    add_common(train, train_common, 6, 4);
    add_data(train, train_data, false);
    train->add_flag("--grid", grid, "Use known-geometry grid pairings instead of learning them");
    train->add_flag("--unsupervised", unsupervised, "Skip feature selection and classifier training");
    train->add_option("--max-order", max_order, "Highest coefficient order kept as a feature")->capture_default_str();
    train->add_option("--per-class", per_class, "Selected features per class (0 = 1000 / C)")->capture_default_str();
    train->add_option("--sigma", kernel.sigma, "Kernel bandwidth")->capture_default_str();
    train->add_option("--lambda", kernel.lambda, "Kernel regularization")->capture_default_str();

    // transform
    fs::path transform_model, transform_out;
    DataArgs transform_data;
    auto* transform = app.add_subcommand("transform", "Write bagged scattering features as CSV");
    transform->add_option("--model", transform_model, "Model file")->required();
    transform->add_option("--out", transform_out, "Output CSV")->required();
    add_data(transform, transform_data, false);

    // classify
    fs::path classify_model, classify_out;
    DataArgs classify_data;
    auto* classify = app.add_subcommand("classify", "Predict labels with a trained model");
    classify->add_option("--model", classify_model, "Model file")->required();
    classify->add_option("--out", classify_out, "Output CSV of predictions")->required();
    add_data(classify, classify_data, false);

    // scramble
    fs::path scramble_in, scramble_out, scramble_perm;
    std::uint64_t scramble_seed = 0;
    auto* scramble_cmd = app.add_subcommand("scramble", "Apply one seeded pixel permutation to every image");
    scramble_cmd->add_option("--images", scramble_in, "IDX image file")->required();
    scramble_cmd->add_option("--out", scramble_out, "Output IDX file")->required();
    scramble_cmd->add_option("--seed", scramble_seed, "Permutation seed")->capture_default_str();
    scramble_cmd->add_option("--permutation-out", scramble_perm, "Write the permutation (one index per line)");

    auto* experiment = app.add_subcommand("experiment", "Reproduction experiments");
    experiment->require_subcommand(1);

    Common var_common;
    std::size_t var_dim = 1024, var_count = 10000;
    auto* variance = experiment->add_subcommand("variance-table", "Normalized variance per coefficient order");
    add_common(variance, var_common, 5, 1);
    variance->add_option("--dim", var_dim, "Signal length d")->capture_default_str();
    variance->add_option("--count", var_count, "Number of white-noise signals")->capture_default_str();

    Common ring_common;
    RingRecoveryConfig ring;
    std::size_t ring_min = 2, ring_max = 2048;
    auto* ring_cmd = experiment->add_subcommand("ring-recovery", "Ring pairing recovery by total variation");
    add_common(ring_cmd, ring_common, 1, 1);
    ring_cmd->add_option("--dims", ring.dims, "Ring sizes")->delimiter(',')->capture_default_str();
    ring_cmd->add_option("--min-n", ring_min, "Smallest sample size")->capture_default_str();
    ring_cmd->add_option("--max-n", ring_max, "Largest sample size")->capture_default_str();
    ring_cmd->add_option("--trials", ring.trials, "Trials per cell")->capture_default_str();
    ring_cmd->add_option("--neighbour-ratio", ring.neighbour_ratio, "rho(1) / rho(0)")->capture_default_str();
    ring_cmd->add_option("--far-ratio", ring.far_ratio, "rho(n) / rho(0) for n >= 2")->capture_default_str();
    ring_cmd->add_option("--epsilon", ring.epsilon, "Failure probability for the bound")->capture_default_str();

    Common mnist_common;
    MnistConfig mnist;
    std::string geometry = "known";
    fs::path data_dir = "data/mnist-desk";
    auto* mnist_cmd = experiment->add_subcommand("mnist", "Desk-scale MNIST pipeline");
    add_common(mnist_cmd, mnist_common, 6, 4);
    mnist_cmd->add_option("--data", data_dir, "Directory with the four IDX files")->capture_default_str();
    mnist_cmd->add_option("--geometry", geometry, "Pixel geometry")
        ->check(CLI::IsMember({"known", "scrambled"}))
        ->capture_default_str();
    mnist_cmd->add_option("--train-count", mnist.train_count, "Training images")->capture_default_str();
    mnist_cmd->add_option("--test-count", mnist.test_count, "Test images")->capture_default_str();
    mnist_cmd->add_option("--max-order", mnist.max_order, "Highest coefficient order kept")->capture_default_str();
    mnist_cmd->add_option("--per-class", mnist.per_class, "Selected features per class (0 = 1000 / C)");
    mnist_cmd->add_option("--sigma", mnist.kernel.sigma, "Kernel bandwidth")->capture_default_str();
    mnist_cmd->add_option("--lambda", mnist.kernel.lambda, "Kernel regularization")->capture_default_str();
    mnist_cmd->add_option("--active-fraction", mnist.active_fraction,
                          "Connectivity counts pixels lit in more than this fraction of training images")
        ->capture_default_str();
    fs::path mnist_model;
    mnist_cmd->add_option("--model-out", mnist_model, "Also save the trained model");

    Common rec_common;
    ReconstructConfig rec;
    auto* rec_cmd = experiment->add_subcommand("reconstruct", "Round-trip reconstruction from 2^J transforms");
    add_common(rec_cmd, rec_common, 3, 1);
    rec_cmd->add_option("--dims", rec.dims, "Signal lengths")->delimiter(',')->capture_default_str();
    rec_cmd->add_option("--trials", rec.trials, "Signals per (d, J)")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            Stopwatch sw("train");
            const Dataset ds = load(train_data);
            const TrainConfig cfg = train_config(train_common);
            ModelFile file;
            file.max_order = max_order;
            if (grid) {
                require(ds.geometry.has_value(), ErrorKind::InvalidArgument, "--grid needs image data");
                file.model.config = cfg;
                file.model.config.mode = Mode::structured;
                for (std::size_t t = 0; t < train_common.transforms; ++t)
                    file.model.transforms.push_back(
                        grid_variant(ds.geometry->height, ds.geometry->width, cfg.depth, t));
                file.model.subset_of_sample.assign(ds.images.count(), 0);
            } else {
                file.model = train_bagged(ds.images, train_common.transforms, cfg);
            }
            if (!unsupervised && ds.classes >= 2) {
                const auto features = build_features(file.model, ds.images, max_order);
                const std::size_t k =
                    per_class ? per_class
                              : default_per_class(ds.classes, std::min(features.dim(), ds.images.count() - 1));
                file.selection = ols_select(features, ds.labels, ds.classes, k);
                auto embedded = project(*file.selection, features);
                normalize_rows(embedded);
                file.classifier = fit(kernel, embedded, ds.labels, ds.classes);
            }
            save_model(train_common.out, file);
        } else if (*transform) {
            Stopwatch sw("transform");
            const auto file = load_model(transform_model);
            const Dataset ds = load(transform_data);
            const auto features = build_features(file.model, ds.images, file.max_order);
            Report report;
            report.config = {{"model", transform_model.filename().string()}};
            report.columns = {"label"};
            for (std::size_t p = 0; p < features.dim(); ++p) report.columns.push_back("f" + std::to_string(p));
            for (std::size_t i = 0; i < features.count(); ++i) {
                std::vector<std::string> row{std::to_string(ds.labels[i])};
                for (double v : features.row(i)) row.push_back(format_number(v));
                report.rows.push_back(std::move(row));
            }
            write_text(transform_out, report.csv());
        } else if (*classify) {
            Stopwatch sw("classify");
            const auto file = load_model(classify_model);
            require(file.selection && file.classifier, ErrorKind::InvalidModel, "model has no trained classifier");
            const Dataset ds = load(classify_data);
            auto embedded = project(*file.selection, build_features(file.model, ds.images, file.max_order));
            normalize_rows(embedded);
            const auto predicted = predict(*file.classifier, embedded);
            std::size_t wrong = 0;
            Report report;
            report.columns = {"index", "label", "predicted"};
            for (std::size_t i = 0; i < predicted.size(); ++i) {
                wrong += predicted[i] != ds.labels[i];
                report.rows.push_back(
                    {std::to_string(i), std::to_string(ds.labels[i]), std::to_string(predicted[i])});
            }
            report.config = {{"model", classify_model.filename().string()},
                             {"samples", std::to_string(predicted.size())},
                             {"error", format_number(predicted.empty() ? 0.0 : double(wrong) / predicted.size())}};
            write_text(classify_out, report.csv());
            std::cout << "error=" << report.config.back().second << '\n';
        } else if (*scramble_cmd) {
            auto img = read_idx(scramble_in, idx_images_magic);
            require(img.shape.size() == 3, ErrorKind::ShapeMismatch, "image file must be N x rows x cols");
            const std::size_t dim = std::size_t{img.shape[1]} * img.shape[2];
            const auto perm = scramble_permutation(dim, scramble_seed);
            IdxArray out = img;
            for (std::size_t i = 0; i < img.shape[0]; ++i)
                for (std::size_t k = 0; k < dim; ++k) out.data[i * dim + k] = img.data[i * dim + perm[k]];
            write_idx(scramble_out, out);
            if (!scramble_perm.empty()) {
                std::string text;
                for (std::size_t p : perm) text += std::to_string(p) + '\n';
                write_text(scramble_perm, text);
            }
        } else if (*variance) {
            Stopwatch sw("variance-table");
            write_report(var_common.out, run_variance_table(var_common.depth, var_dim, var_count, var_common.seed));
        } else if (*ring_cmd) {
            Stopwatch sw("ring-recovery");
            ring.seed = ring_common.seed;
            ring.sample_sizes = geometric_sizes(ring_min, ring_max);
            write_report(ring_common.out, ring_recovery_report(ring, ring_recovery(ring)));
        } else if (*mnist_cmd) {
            Stopwatch sw("mnist");
            mnist.train_images = data_dir / "train-images-idx3-ubyte";
            mnist.train_labels = data_dir / "train-labels-idx1-ubyte";
            mnist.test_images = data_dir / "test-images-idx3-ubyte";
            mnist.test_labels = data_dir / "test-labels-idx1-ubyte";
            mnist.geometry = geometry == "known" ? Geometry::known : Geometry::scrambled;
            mnist.transforms = mnist_common.transforms;
            mnist.training = train_config(mnist_common);
            const auto result = run_mnist(mnist);
            write_report(mnist_common.out, mnist_report(mnist, result));
            if (!mnist_model.empty()) save_model(mnist_model, result.model);
        } else if (*rec_cmd) {
            Stopwatch sw("reconstruct");
            rec.max_depth = rec_common.depth;
            rec.seed = rec_common.seed;
            write_report(rec_common.out, run_reconstruct(rec));
        }
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
