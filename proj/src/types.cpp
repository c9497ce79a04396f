#include "hvpr/types.hpp"

#include "hvpr/error.hpp"

namespace hvpr {

ImageFeatureSet ImageFeatureSet::from_features(std::string id, std::span<const LocalFeature> features,
                                               std::size_t d_loc) {
  ImageFeatureSet set(std::move(id), d_loc);
  set.positions.reserve(features.size());
  set.descriptors.resize(static_cast<Eigen::Index>(features.size()), static_cast<Eigen::Index>(d_loc));
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& f = features[i];
    if (f.desc.size() != d_loc) {
      throw Error(ErrorCode::kDimensionMismatch, "descriptor length " + std::to_string(f.desc.size()) +
                                                     " != " + std::to_string(d_loc));
    }
    set.positions.push_back(f.pos);
    for (std::size_t c = 0; c < d_loc; ++c) {
      set.descriptors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = f.desc[c];
    }
  }
  return set;
}

LocalFeature ImageFeatureSet::feature(std::size_t i) const {
  auto d = descriptor(i);
  return {positions.at(i), std::vector<float>(d.begin(), d.end())};
}

bool operator==(const ImageFeatureSet& a, const ImageFeatureSet& b) {
  return a.image_id == b.image_id && a.positions == b.positions &&
         a.descriptors.rows() == b.descriptors.rows() && a.descriptors.cols() == b.descriptors.cols() &&
         a.descriptors == b.descriptors && a.holistic == b.holistic;
}

Eigen::MatrixXd DenseFeatureMap::attention_map() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(height), static_cast<Eigen::Index>(width));
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      m(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) = attention[y * width + x];
    }
  }
  return m;
}

void DenseFeatureMap::validate() const {
  if (height == 0 || width == 0 || channels == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "dense map '" + image_id + "' has a zero dimension");
  }
  if (values.size() != height * width * channels || attention.size() != height * width) {
    throw Error(ErrorCode::kDimensionMismatch, "dense map '" + image_id + "' tensor/attention size mismatch");
  }
}

}  // namespace hvpr
