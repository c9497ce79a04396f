#pragma once

// Dense map + attention map -> sparse local features: NMS detection on the
// attention map, d×d patch pooling, PCA compression. The softmax and
// attention-weighted global descriptor are exposed as diagnostics.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hvpr/types.hpp"

namespace hvpr {

inline constexpr int kDefaultPatchSize = 7;

struct Keypoint {
  std::size_t y = 0;
  std::size_t x = 0;
  double attention = 0.0;
};

// Rows of `components` are orthonormal principal directions, ordered by
// non-increasing explained variance.
struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;  // d_out × d_in
  Eigen::VectorXd explained_variance;

  [[nodiscard]] std::size_t input_dim() const noexcept { return static_cast<std::size_t>(mean.size()); }
  [[nodiscard]] std::size_t output_dim() const noexcept { return static_cast<std::size_t>(components.rows()); }
};

struct Patch {
  Keypoint keypoint;
  Eigen::VectorXd values;  // d·d·C, row-major over (dy, dx, c)
};

struct PcaProjection {
  Eigen::MatrixXd rows;    // one L2-normalized output per input row
  std::vector<bool> zero;  // true where the projection vanished
  [[nodiscard]] std::size_t zero_count() const;
};

Eigen::MatrixXd softmax_normalize(const Eigen::MatrixXd& attention);

// I_c = sum_yx weights_yx * F_yxc.
Eigen::VectorXd global_descriptor(const DenseFeatureMap& dense, const Eigen::MatrixXd& weights);

// Cells strictly greater than every existing 8-neighbour, sorted by attention
// (descending, raster order on ties), optionally truncated.
std::vector<Keypoint> nms_detect(const Eigen::MatrixXd& attention,
                                 std::optional<std::size_t> max_features = std::nullopt);

// Keypoints whose window leaves the map are dropped. Throws for even `d`.
std::vector<Patch> extract_patch_descriptors(const DenseFeatureMap& dense, std::span<const Keypoint> keypoints,
                                             int d);

// `samples` holds one sample per row.
PcaModel pca_fit(const Eigen::MatrixXd& samples, std::size_t d_out);

PcaProjection pca_apply(const PcaModel& model, const Eigen::MatrixXd& rows);
Eigen::VectorXd pca_apply(const PcaModel& model, const Eigen::VectorXd& x, bool* zero = nullptr);

// Grid cell centre -> normalized [0, 100) coordinates.
Position grid_to_position(std::size_t y, std::size_t x, std::size_t height, std::size_t width);

// nms_detect -> extract_patch_descriptors -> pca_apply. Features whose PCA
// projection vanishes cannot be unit-normalized and are dropped.
ImageFeatureSet build_feature_set(const DenseFeatureMap& dense, const PcaModel& model, int d,
                                  std::optional<std::size_t> max_features = std::nullopt);

// Stacks the patch vectors of many maps into a sample matrix for pca_fit.
Eigen::MatrixXd collect_patch_samples(std::span<const DenseFeatureMap> maps, int d,
                                      std::optional<std::size_t> max_features = std::nullopt);

// VPRD: "VPRD" | version u32 = 1 | image_count u32 | per image: id (u16 + bytes)
//       | H u32 | W u32 | C u32 | H·W·C f32 (y, x, c) | H·W f32 attention
std::vector<std::uint8_t> encode_dense_maps(std::span<const DenseFeatureMap> maps);
std::vector<DenseFeatureMap> decode_dense_maps(std::span<const std::uint8_t> bytes);
void write_dense_maps(std::span<const DenseFeatureMap> maps, const std::filesystem::path& path);
std::vector<DenseFeatureMap> read_dense_maps(const std::filesystem::path& path);

// VPRP: "VPRP" | version u32 = 1 | d_in u32 | d_out u32 | mean | components row-major (all f32)
void write_pca_model(const PcaModel& model, const std::filesystem::path& path);
PcaModel read_pca_model(const std::filesystem::path& path);

}  // namespace hvpr
