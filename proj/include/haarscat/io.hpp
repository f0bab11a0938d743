#pragma once

// Dataset ingestion, scrambling, known-geometry grid pairings and model files.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "haarscat/batch.hpp"
#include "haarscat/features.hpp"
#include "haarscat/graph_haar.hpp"
#include "haarscat/learn.hpp"

namespace haarscat {

inline constexpr std::uint32_t idx_images_magic = 0x00000803;
inline constexpr std::uint32_t idx_labels_magic = 0x00000801;

/// Unsigned-byte IDX array.
struct IdxArray {
    std::uint32_t magic = 0;
    std::vector<std::uint32_t> shape;
    std::vector<std::uint8_t> data;

    friend bool operator==(const IdxArray&, const IdxArray&) = default;
};

/// Reads an IDX file; `expected_magic` guards against swapped files.
IdxArray read_idx(const std::filesystem::path& path, std::uint32_t expected_magic);
void write_idx(const std::filesystem::path& path, const IdxArray& array);

struct GridGeometry {
    std::size_t height = 0;
    std::size_t width = 0;
};

struct Dataset {
    SignalBatch images;
    std::vector<std::size_t> labels;
    std::size_t classes = 0;
    std::optional<GridGeometry> geometry;
    /// Pixels that came from the source image (false for padding).
    std::vector<bool> source_pixels;
};

/// Zero-pads each h x w image to the next power-of-two square, centered.
SignalBatch pad_images(const SignalBatch& images, std::size_t height, std::size_t width, GridGeometry& padded,
                       std::vector<bool>& source_pixels);

/// IDX images scaled to [0, 1] and padded to a power-of-two grid.
Dataset load_idx_dataset(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Lines "label,v_1,...,v_n"; rows are zero-padded to the next power of two.
Dataset load_csv_dataset(const std::filesystem::path& path);

/// "u v" per line, 0-indexed; '#' starts a comment.
ReferenceGraph load_edge_list(const std::filesystem::path& path, std::size_t vertices);

/// Seeded permutation: scrambled(k) = original(permutation[k]).
std::vector<std::size_t> scramble_permutation(std::size_t dim, std::uint64_t seed);
std::vector<std::size_t> inverse_permutation(const std::vector<std::size_t>& permutation);
SignalBatch permute(const SignalBatch& batch, const std::vector<std::size_t>& permutation);

/// Same permutation for every image; geometry is dropped.
Dataset scramble(const Dataset& dataset, std::uint64_t seed);

enum class GridOrientation { axis, diagonal };

/// Structured network over an h x w torus: level 0 pairs horizontal
/// neighbours, then levels alternate vertical / horizontal. Blocks are cut
/// after a cyclic shift; the diagonal variant cuts them in the sheared
/// coordinates (x, (y + x) mod h).
HaarNetwork grid_pairings(std::size_t height, std::size_t width, std::size_t depth, std::size_t shift_x,
                          std::size_t shift_y, GridOrientation orientation);

/// Variant t: orientation t % 2, shift_x (t / 2) % 4, shift_y (t / 8) % 4.
HaarNetwork grid_variant(std::size_t height, std::size_t width, std::size_t depth, std::size_t t);

inline constexpr int model_format_version = 1;

struct ModelFile {
    BaggedModel model;
    std::optional<int> max_order;
    std::optional<SelectionState> selection;
    std::optional<KernelClassifier> classifier;

    friend bool operator==(const ModelFile&, const ModelFile&) = default;
};

std::string serialize_model(const ModelFile& model);
ModelFile parse_model(const std::string& text);
void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

std::string to_string(Mode mode);
std::string to_string(Norm norm);
std::string to_string(Matcher matcher);
Mode parse_mode(const std::string& s);
Norm parse_norm(const std::string& s);
Matcher parse_matcher(const std::string& s);

}  // namespace haarscat
