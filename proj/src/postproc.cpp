#include "hvpr/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "hvpr/binary_io.hpp"
#include "hvpr/error.hpp"

namespace hvpr {

namespace {

constexpr std::uint32_t kDenseVersion = 1;
constexpr std::uint32_t kPcaVersion = 1;
constexpr double kZeroNorm = 1e-12;

// Largest-magnitude entry positive, first index on ties.
void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(best))) best = i;
  }
  if (v(best) < 0.0) v = -v;
}

}  // namespace

std::size_t PcaProjection::zero_count() const {
  return static_cast<std::size_t>(std::count(zero.begin(), zero.end(), true));
}

Eigen::MatrixXd softmax_normalize(const Eigen::MatrixXd& attention) {
  if (attention.size() == 0) {
    throw Error(ErrorCode::kEmptyInput, "softmax of an empty attention map");
  }
  if (!attention.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "attention map contains non-finite values");
  }
  // Shift by the maximum; the ratio is unchanged and exp cannot overflow.
  const Eigen::MatrixXd e = (attention.array() - attention.maxCoeff()).exp().matrix();
  return e / e.sum();
}

Eigen::VectorXd global_descriptor(const DenseFeatureMap& dense, const Eigen::MatrixXd& weights) {
  dense.validate();
  if (static_cast<std::size_t>(weights.rows()) != dense.height ||
      static_cast<std::size_t>(weights.cols()) != dense.width) {
    throw Error(ErrorCode::kDimensionMismatch, "weight map does not match the dense map grid");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dense.channels));
  for (std::size_t y = 0; y < dense.height; ++y) {
    for (std::size_t x = 0; x < dense.width; ++x) {
      const double s = weights(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x));
      const float* f = dense.values.data() + (y * dense.width + x) * dense.channels;
      for (std::size_t c = 0; c < dense.channels; ++c) {
        out(static_cast<Eigen::Index>(c)) += s * f[c];
      }
    }
  }
  return out;
}

std::vector<Keypoint> nms_detect(const Eigen::MatrixXd& attention, std::optional<std::size_t> max_features) {
  const Eigen::Index h = attention.rows();
  const Eigen::Index w = attention.cols();
  std::vector<Keypoint> peaks;
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      const double v = attention(y, x);
      bool peak = true;
      for (Eigen::Index dy = -1; dy <= 1 && peak; ++dy) {
        for (Eigen::Index dx = -1; dx <= 1; ++dx) {
          const Eigen::Index ny = y + dy;
          const Eigen::Index nx = x + dx;
          if ((dy == 0 && dx == 0) || ny < 0 || nx < 0 || ny >= h || nx >= w) continue;
          if (!(v > attention(ny, nx))) {
            peak = false;
            break;
          }
        }
      }
      if (peak) {
        peaks.push_back({static_cast<std::size_t>(y), static_cast<std::size_t>(x), v});
      }
    }
  }
  // Raster order is already the secondary key; stable_sort keeps it.
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const Keypoint& a, const Keypoint& b) { return a.attention > b.attention; });
  if (max_features && peaks.size() > *max_features) {
    peaks.resize(*max_features);
  }
  return peaks;
}

std::vector<Patch> extract_patch_descriptors(const DenseFeatureMap& dense, std::span<const Keypoint> keypoints,
                                             int d) {
  if (d <= 0 || d % 2 == 0) {
    throw Error(ErrorCode::kInvalidArgument, "patch size must be a positive odd integer, got " + std::to_string(d));
  }
  dense.validate();
  const auto r = static_cast<std::size_t>(d / 2);
  const auto len = static_cast<Eigen::Index>(static_cast<std::size_t>(d * d) * dense.channels);
  std::vector<Patch> patches;
  for (const auto& kp : keypoints) {
    if (kp.y < r || kp.x < r || kp.y + r >= dense.height || kp.x + r >= dense.width) {
      continue;
    }
    Patch p{kp, Eigen::VectorXd(len)};
    Eigen::Index k = 0;
    for (std::size_t y = kp.y - r; y <= kp.y + r; ++y) {
      for (std::size_t x = kp.x - r; x <= kp.x + r; ++x) {
        const float* f = dense.values.data() + (y * dense.width + x) * dense.channels;
        for (std::size_t c = 0; c < dense.channels; ++c) {
          p.values(k++) = f[c];
        }
      }
    }
    patches.push_back(std::move(p));
  }
  return patches;
}

PcaModel pca_fit(const Eigen::MatrixXd& samples, std::size_t d_out) {
  const auto n = static_cast<std::size_t>(samples.rows());
  const auto d_in = static_cast<std::size_t>(samples.cols());
  if (n < 2 || d_out == 0 || d_out > std::min(n - 1, d_in)) {
    throw Error(ErrorCode::kInvalidArgument, "pca_fit: d_out=" + std::to_string(d_out) + " must be in [1, min(" +
                                                 std::to_string(n) + " - 1, " + std::to_string(d_in) + ")]");
  }
  PcaModel model;
  model.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - model.mean.transpose();
  const double denom = static_cast<double>(n - 1);
  const auto k = static_cast<Eigen::Index>(d_out);
  model.components.resize(k, static_cast<Eigen::Index>(d_in));
  model.explained_variance.resize(k);

  if (d_in <= n) {
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::Index last = cov.rows() - 1;
    for (Eigen::Index i = 0; i < k; ++i) {
      model.components.row(i) = eig.eigenvectors().col(last - i).transpose();
      model.explained_variance(i) = std::max(0.0, eig.eigenvalues()(last - i));
    }
  } else {
    // Fewer samples than dimensions: diagonalize the n×n Gram matrix instead.
    const Eigen::MatrixXd gram = (centered * centered.transpose()) / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const Eigen::Index last = gram.rows() - 1;
    for (Eigen::Index i = 0; i < k; ++i) {
      Eigen::VectorXd dir = centered.transpose() * eig.eigenvectors().col(last - i);
      const double norm = dir.norm();
      if (norm < kZeroNorm) {
        throw Error(ErrorCode::kInvalidArgument, "pca_fit: sample matrix rank is below d_out");
      }
      model.components.row(i) = (dir / norm).transpose();
      model.explained_variance(i) = std::max(0.0, eig.eigenvalues()(last - i));
    }
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    Eigen::VectorXd row = model.components.row(i).transpose();
    fix_sign(row);
    model.components.row(i) = row.transpose();
  }
  return model;
}

Eigen::VectorXd pca_apply(const PcaModel& model, const Eigen::VectorXd& x, bool* zero) {
  if (static_cast<std::size_t>(x.size()) != model.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "pca_apply: input length " + std::to_string(x.size()) +
                                                   " != " + std::to_string(model.input_dim()));
  }
  Eigen::VectorXd y = model.components * (x - model.mean);
  const double norm = y.norm();
  const bool vanished = norm < kZeroNorm;
  if (zero) *zero = vanished;
  if (vanished) return Eigen::VectorXd::Zero(y.size());
  return y / norm;
}

PcaProjection pca_apply(const PcaModel& model, const Eigen::MatrixXd& rows) {
  if (static_cast<std::size_t>(rows.cols()) != model.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "pca_apply: input length " + std::to_string(rows.cols()) +
                                                   " != " + std::to_string(model.input_dim()));
  }
  PcaProjection out;
  out.rows = (rows.rowwise() - model.mean.transpose()) * model.components.transpose();
  out.zero.resize(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < out.rows.rows(); ++i) {
    const double norm = out.rows.row(i).norm();
    if (norm < kZeroNorm) {
      out.zero[static_cast<std::size_t>(i)] = true;
      out.rows.row(i).setZero();
    } else {
      out.rows.row(i) /= norm;
    }
  }
  return out;
}

Position grid_to_position(std::size_t y, std::size_t x, std::size_t height, std::size_t width) {
  return {(static_cast<double>(x) + 0.5) * kPositionRange / static_cast<double>(width),
          (static_cast<double>(y) + 0.5) * kPositionRange / static_cast<double>(height)};
}

ImageFeatureSet build_feature_set(const DenseFeatureMap& dense, const PcaModel& model, int d,
                                  std::optional<std::size_t> max_features) {
  dense.validate();
  if (model.input_dim() != static_cast<std::size_t>(d * d) * dense.channels) {
    throw Error(ErrorCode::kDimensionMismatch, "PCA input dimension " + std::to_string(model.input_dim()) +
                                                   " != d*d*C for '" + dense.image_id + "'");
  }
  const auto keypoints = nms_detect(dense.attention_map(), max_features);
  const auto patches = extract_patch_descriptors(dense, keypoints, d);
  ImageFeatureSet set(dense.image_id, model.output_dim());
  if (patches.empty()) {
    return set;
  }
  Eigen::MatrixXd stacked(static_cast<Eigen::Index>(patches.size()), static_cast<Eigen::Index>(model.input_dim()));
  for (std::size_t i = 0; i < patches.size(); ++i) {
    stacked.row(static_cast<Eigen::Index>(i)) = patches[i].values.transpose();
  }
  const auto projected = pca_apply(model, stacked);
  const std::size_t kept = patches.size() - projected.zero_count();
  set.descriptors.resize(static_cast<Eigen::Index>(kept), static_cast<Eigen::Index>(model.output_dim()));
  set.positions.reserve(kept);
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < patches.size(); ++i) {
    if (projected.zero[i]) continue;
    const auto& kp = patches[i].keypoint;
    set.positions.push_back(grid_to_position(kp.y, kp.x, dense.height, dense.width));
    set.descriptors.row(row++) = projected.rows.row(static_cast<Eigen::Index>(i)).cast<float>();
  }
  return set;
}

Eigen::MatrixXd collect_patch_samples(std::span<const DenseFeatureMap> maps, int d,
                                      std::optional<std::size_t> max_features) {
  std::vector<Eigen::VectorXd> all;
  for (const auto& m : maps) {
    const auto keypoints = nms_detect(m.attention_map(), max_features);
    for (auto& p : extract_patch_descriptors(m, keypoints, d)) {
      if (!all.empty() && all.front().size() != p.values.size()) {
        throw Error(ErrorCode::kDimensionMismatch, "dense maps disagree on channel count");
      }
      all.push_back(std::move(p.values));
    }
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(all.size()), all.empty() ? 0 : all.front().size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = all[i].transpose();
  }
  return out;
}

std::vector<std::uint8_t> encode_dense_maps(std::span<const DenseFeatureMap> maps) {
  ByteWriter out;
  out.magic("VPRD");
  out.u32(kDenseVersion);
  out.u32(static_cast<std::uint32_t>(maps.size()));
  for (const auto& m : maps) {
    m.validate();
    out.string16(m.image_id);
    out.u32(static_cast<std::uint32_t>(m.height));
    out.u32(static_cast<std::uint32_t>(m.width));
    out.u32(static_cast<std::uint32_t>(m.channels));
    for (float v : m.values) out.f32(v);
    for (float v : m.attention) out.f32(v);
  }
  return std::move(out).take();
}

std::vector<DenseFeatureMap> decode_dense_maps(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.expect_magic("VPRD");
  in.expect_version(kDenseVersion);
  const std::uint32_t count = in.u32();
  std::vector<DenseFeatureMap> maps;
  for (std::uint32_t n = 0; n < count; ++n) {
    DenseFeatureMap m;
    m.image_id = in.string16();
    m.height = in.u32();
    m.width = in.u32();
    m.channels = in.u32();
    const std::size_t cells = m.height * m.width;
    if ((cells * m.channels + cells) * 4 > in.remaining()) {
      throw Error(ErrorCode::kTruncated, "dense map '" + m.image_id + "' exceeds file size");
    }
    m.values.resize(cells * m.channels);
    m.attention.resize(cells);
    in.f32_array(m.values);
    in.f32_array(m.attention);
    m.validate();
    maps.push_back(std::move(m));
  }
  if (in.remaining() != 0) {
    throw Error(ErrorCode::kMalformed, "trailing bytes after dense-map payload");
  }
  return maps;
}

void write_dense_maps(std::span<const DenseFeatureMap> maps, const std::filesystem::path& path) {
  write_file_atomic(path, encode_dense_maps(maps));
}

std::vector<DenseFeatureMap> read_dense_maps(const std::filesystem::path& path) {
  return decode_dense_maps(read_file(path));
}

void write_pca_model(const PcaModel& model, const std::filesystem::path& path) {
  ByteWriter out;
  out.magic("VPRP");
  out.u32(kPcaVersion);
  out.u32(static_cast<std::uint32_t>(model.input_dim()));
  out.u32(static_cast<std::uint32_t>(model.output_dim()));
  for (Eigen::Index i = 0; i < model.mean.size(); ++i) out.f32(static_cast<float>(model.mean(i)));
  for (Eigen::Index r = 0; r < model.components.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.components.cols(); ++c) {
      out.f32(static_cast<float>(model.components(r, c)));
    }
  }
  write_file_atomic(path, out.buffer());
}

PcaModel read_pca_model(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  ByteReader in(bytes);
  in.expect_magic("VPRP");
  in.expect_version(kPcaVersion);
  const std::uint32_t d_in = in.u32();
  const std::uint32_t d_out = in.u32();
  if ((static_cast<std::size_t>(d_in) + static_cast<std::size_t>(d_in) * d_out) * 4 != in.remaining()) {
    throw Error(in.remaining() < (static_cast<std::size_t>(d_in) * (d_out + 1)) * 4 ? ErrorCode::kTruncated
                                                                                       : ErrorCode::kMalformed,
                "PCA payload size does not match its header");
  }
  std::vector<float> buf(static_cast<std::size_t>(d_in) * (d_out + 1));
  in.f32_array(buf);
  PcaModel model;
  model.mean = Eigen::Map<Eigen::VectorXf>(buf.data(), d_in).cast<double>();
  model.components =
      Eigen::Map<Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(buf.data() + d_in, d_out, d_in)
          .cast<double>();
  model.explained_variance = Eigen::VectorXd::Zero(d_out);
  return model;
}

}  // namespace hvpr
