#pragma once

// VPRF feature-store container and ground-truth JSON.
//
// VPRF layout (little-endian):
//   "VPRF" | version u32 = 1 | image_count u32 | d_loc u32 | holistic_dim u32
//   per image: id_length u16 | id bytes | feature_count u32
//              | feature_count × (x f32, y f32, d_loc × f32)
//              | holistic_dim × f32 (only when holistic_dim > 0)

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hvpr/types.hpp"

namespace hvpr {

inline constexpr std::uint32_t kStoreVersion = 1;

struct StoreHeader {
  std::uint32_t image_count = 0;
  std::uint32_t d_loc = 0;
  std::uint32_t holistic_dim = 0;
};

// Throws kDimensionMismatch for heterogeneous descriptor or holistic lengths
// and kOutOfRange for positions outside [0, 100).
std::vector<std::uint8_t> encode_store(std::span<const ImageFeatureSet> sets);
std::vector<ImageFeatureSet> decode_store(std::span<const std::uint8_t> bytes);
StoreHeader decode_store_header(std::span<const std::uint8_t> bytes);

// Returns the number of bytes written.
std::uint64_t write_store(std::span<const ImageFeatureSet> sets, const std::filesystem::path& path);
std::vector<ImageFeatureSet> read_store(const std::filesystem::path& path);

GroundTruth parse_ground_truth(std::string_view json_text);
std::string ground_truth_to_json(const GroundTruth& gt);
GroundTruth read_ground_truth(const std::filesystem::path& path);
void write_ground_truth(const GroundTruth& gt, const std::filesystem::path& path);

// Checks that every id referenced by `gt` exists in the stores.
void validate_ground_truth(const GroundTruth& gt, std::span<const ImageFeatureSet> db,
                           std::span<const ImageFeatureSet> queries);

}  // namespace hvpr
