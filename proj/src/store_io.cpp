#include "hvpr/store_io.hpp"

#include "json.hpp"
#include <unordered_set>

#include "hvpr/binary_io.hpp"
#include "hvpr/error.hpp"

namespace hvpr {

namespace {

constexpr std::string_view kMagic = "VPRF";

StoreHeader infer_header(std::span<const ImageFeatureSet> sets) {
  StoreHeader h;
  h.image_count = static_cast<std::uint32_t>(sets.size());
  bool have_dloc = false;
  for (const auto& s : sets) {
    if (s.empty() && s.descriptors.cols() == 0) {
      continue;
    }
    const auto d = static_cast<std::uint32_t>(s.descriptor_length());
    if (!have_dloc) {
      h.d_loc = d;
      have_dloc = true;
    } else if (d != h.d_loc) {
      throw Error(ErrorCode::kDimensionMismatch, "heterogeneous descriptor lengths: " + std::to_string(d) +
                                                     " vs " + std::to_string(h.d_loc) + " in '" +
                                                     s.image_id + "'");
    }
  }
  if (!sets.empty() && sets.front().holistic) {
    h.holistic_dim = static_cast<std::uint32_t>(sets.front().holistic->size());
  }
  for (const auto& s : sets) {
    const std::uint32_t dim = s.holistic ? static_cast<std::uint32_t>(s.holistic->size()) : 0;
    if (dim != h.holistic_dim || (h.holistic_dim > 0) != s.holistic.has_value()) {
      throw Error(ErrorCode::kDimensionMismatch, "heterogeneous holistic descriptors in '" + s.image_id + "'");
    }
  }
  return h;
}

StoreHeader read_header(ByteReader& in) {
  in.expect_magic(kMagic);
  in.expect_version(kStoreVersion);
  StoreHeader h;
  h.image_count = in.u32();
  h.d_loc = in.u32();
  h.holistic_dim = in.u32();
  return h;
}

}  // namespace

std::vector<std::uint8_t> encode_store(std::span<const ImageFeatureSet> sets) {
  const StoreHeader h = infer_header(sets);
  ByteWriter out;
  out.magic(kMagic);
  out.u32(kStoreVersion);
  out.u32(h.image_count);
  out.u32(h.d_loc);
  out.u32(h.holistic_dim);
  for (const auto& s : sets) {
    if (s.positions.size() != static_cast<std::size_t>(s.descriptors.rows())) {
      throw Error(ErrorCode::kDimensionMismatch, "position/descriptor count mismatch in '" + s.image_id + "'");
    }
    out.string16(s.image_id);
    out.u32(static_cast<std::uint32_t>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Position p = s.positions[i];
      const Position stored{static_cast<float>(p.x), static_cast<float>(p.y)};
      if (!in_range(p) || !in_range(stored)) {
        throw Error(ErrorCode::kOutOfRange, "position (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                                                ") out of range in '" + s.image_id + "'");
      }
      out.f32(static_cast<float>(p.x));
      out.f32(static_cast<float>(p.y));
      for (float v : s.descriptor(i)) {
        out.f32(v);
      }
    }
    if (s.holistic) {
      for (float v : *s.holistic) {
        out.f32(v);
      }
    }
  }
  return std::move(out).take();
}

StoreHeader decode_store_header(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  return read_header(in);
}

std::vector<ImageFeatureSet> decode_store(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  const StoreHeader h = read_header(in);
  std::vector<ImageFeatureSet> sets;
  // Every image needs at least id_length + feature_count; cap the reservation
  // so a corrupt count cannot trigger a huge allocation.
  sets.reserve(std::min<std::size_t>(h.image_count, in.remaining() / 6 + 1));
  std::vector<float> row(h.d_loc);
  for (std::uint32_t n = 0; n < h.image_count; ++n) {
    ImageFeatureSet s(in.string16(), h.d_loc);
    const std::uint32_t count = in.u32();
    const std::size_t per_feature = 4ull * (2 + h.d_loc);
    if (static_cast<std::size_t>(count) * per_feature > in.remaining()) {
      throw Error(ErrorCode::kTruncated, "feature payload of '" + s.image_id + "' exceeds file size");
    }
    s.positions.resize(count);
    s.descriptors.resize(count, h.d_loc);
    for (std::uint32_t i = 0; i < count; ++i) {
      const double x = in.f32();
      const double y = in.f32();
      s.positions[i] = {x, y};
      if (!in_range(s.positions[i])) {
        throw Error(ErrorCode::kMalformed, "position out of range in '" + s.image_id + "'");
      }
      in.f32_array(row);
      for (std::uint32_t c = 0; c < h.d_loc; ++c) {
        s.descriptors(i, c) = row[c];
      }
    }
    if (h.holistic_dim > 0) {
      std::vector<float> hol(h.holistic_dim);
      in.f32_array(hol);
      s.holistic = std::move(hol);
    }
    sets.push_back(std::move(s));
  }
  if (in.remaining() != 0) {
    throw Error(ErrorCode::kMalformed, std::to_string(in.remaining()) + " trailing bytes after store payload");
  }
  return sets;
}

std::uint64_t write_store(std::span<const ImageFeatureSet> sets, const std::filesystem::path& path) {
  const auto bytes = encode_store(sets);
  write_file_atomic(path, bytes);
  return bytes.size();
}

std::vector<ImageFeatureSet> read_store(const std::filesystem::path& path) {
  return decode_store(read_file(path));
}

GroundTruth parse_ground_truth(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformed, std::string("ground truth: ") + e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::kMalformed, "ground truth must be a JSON object");
  }
  GroundTruth gt;
  for (const auto& [query, ids] : doc.items()) {
    if (!ids.is_array()) {
      throw Error(ErrorCode::kMalformed, "ground truth entry '" + query + "' is not an array");
    }
    auto& bucket = gt[query];
    for (const auto& id : ids) {
      if (!id.is_string()) {
        throw Error(ErrorCode::kMalformed, "ground truth entry '" + query + "' holds a non-string id");
      }
      bucket.insert(id.get<std::string>());
    }
  }
  return gt;
}

std::string ground_truth_to_json(const GroundTruth& gt) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (const auto& [query, ids] : gt) {
    doc[query] = std::vector<std::string>(ids.begin(), ids.end());
  }
  return doc.dump(2) + "\n";
}

GroundTruth read_ground_truth(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_ground_truth(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void write_ground_truth(const GroundTruth& gt, const std::filesystem::path& path) {
  write_file_atomic(path, ground_truth_to_json(gt));
}

void validate_ground_truth(const GroundTruth& gt, std::span<const ImageFeatureSet> db,
                           std::span<const ImageFeatureSet> queries) {
  std::unordered_set<std::string> db_ids;
  std::unordered_set<std::string> query_ids;
  for (const auto& s : db) db_ids.insert(s.image_id);
  for (const auto& s : queries) query_ids.insert(s.image_id);
  for (const auto& [query, ids] : gt) {
    if (!query_ids.contains(query)) {
      throw Error(ErrorCode::kMalformed, "ground truth references unknown query '" + query + "'");
    }
    for (const auto& id : ids) {
      if (!db_ids.contains(id)) {
        throw Error(ErrorCode::kMalformed, "ground truth references unknown database image '" + id + "'");
      }
    }
  }
}

}  // namespace hvpr
