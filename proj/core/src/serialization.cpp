#include "hybridfm/serialization.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "hybridfm/errors.hpp"

namespace hybridfm {

namespace {

constexpr char kMagic[8] = {'H', 'Y', 'B', 'R', 'I', 'D', 'F', 'M'};
constexpr char kEndMarker[4] = {'D', 'O', 'N', 'E'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint32_t kMaxNameLength = 1u << 20;

void write_u32(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) {
    bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  }
  out.write(bytes, 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) {
    bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  }
  out.write(bytes, 8);
}

void write_f32(std::ostream& out, float v) {
  write_u32(out, std::bit_cast<std::uint32_t>(v));
}

void write_string(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void write_table(std::ostream& out, const std::vector<float>& table) {
  for (float v : table) {
    write_f32(out, v);
  }
}

std::uint32_t read_u32(std::istream& in, const char* section) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
    throw ParseError(std::string("model file truncated in section: ") + section);
  }
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  }
  return v;
}

std::uint64_t read_u64(std::istream& in, const char* section) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
    throw ParseError(std::string("model file truncated in section: ") + section);
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  }
  return v;
}

float read_f32(std::istream& in, const char* section) {
  return std::bit_cast<float>(read_u32(in, section));
}

std::string read_string(std::istream& in, const char* section) {
  const std::uint32_t len = read_u32(in, section);
  if (len > kMaxNameLength) {
    throw ParseError(std::string("implausible name length in section: ") +
                     section);
  }
  std::string s(len, '\0');
  if (!in.read(s.data(), len)) {
    throw ParseError(std::string("model file truncated in section: ") + section);
  }
  return s;
}

void read_table(std::istream& in, std::vector<float>& table, std::size_t count,
                const char* section) {
  table.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    table[i] = read_f32(in, section);
  }
}

void read_names(std::istream& in, FeatureDictionary& dict, std::uint64_t count,
                const char* section) {
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string name = read_string(in, section);
    const std::uint32_t id = dict.add(name);
    if (id != i) {
      throw ParseError(std::string("duplicate feature name in section: ") +
                       section);
    }
  }
}

void read_entity_sets(std::istream& in,
                      std::vector<std::vector<std::uint32_t>>& sets,
                      std::uint64_t count, std::uint64_t n_features,
                      const char* section) {
  sets.resize(count);
  for (std::uint64_t e = 0; e < count; ++e) {
    const std::uint32_t n = read_u32(in, section);
    sets[e].resize(n);
    for (std::uint32_t j = 0; j < n; ++j) {
      sets[e][j] = read_u32(in, section);
      if (sets[e][j] >= n_features) {
        throw ParseError(std::string("feature index out of range in section: ") +
                         section);
      }
    }
  }
}

}  // namespace

void save_model(const ModelState& model, const FeatureMapping& mapping,
                std::ostream& out) {
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kFormatVersion);
  write_u32(out, model.d);
  write_u64(out, model.user_feature_count());
  write_u64(out, model.item_feature_count());
  write_u64(out, mapping.user_count());
  write_u64(out, mapping.item_count());
  write_u64(out, model.epoch_counter);

  for (const auto& name : mapping.user_features.names()) {
    write_string(out, name);
  }
  for (const auto& name : mapping.item_features.names()) {
    write_string(out, name);
  }

  write_table(out, model.user_embeddings);
  write_table(out, model.item_embeddings);
  write_table(out, model.user_biases);
  write_table(out, model.item_biases);
  write_table(out, model.user_embedding_acc);
  write_table(out, model.item_embedding_acc);
  write_table(out, model.user_bias_acc);
  write_table(out, model.item_bias_acc);

  for (const auto& features : mapping.user_feature_sets) {
    write_u32(out, static_cast<std::uint32_t>(features.size()));
    for (auto f : features) {
      write_u32(out, f);
    }
  }
  for (const auto& features : mapping.item_feature_sets) {
    write_u32(out, static_cast<std::uint32_t>(features.size()));
    for (auto f : features) {
      write_u32(out, f);
    }
  }

  out.write(kEndMarker, sizeof(kEndMarker));
  if (!out) {
    throw ParseError("failed to write model file");
  }
}

void save_model(const ModelState& model, const FeatureMapping& mapping,
                const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ParseError("cannot open model file for writing: " + path);
  }
  save_model(model, mapping, out);
}

std::pair<ModelState, FeatureMapping> load_model(std::istream& in) {
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("bad magic in section: header");
  }
  const std::uint32_t version = read_u32(in, "header");
  if (version != kFormatVersion) {
    throw VersionError("unsupported model format version " +
                       std::to_string(version) + " (expected " +
                       std::to_string(kFormatVersion) + ")");
  }
  const std::uint32_t d = read_u32(in, "header");
  if (d == 0) {
    throw ParseError("zero dimensionality in section: header");
  }
  const std::uint64_t n_user_features = read_u64(in, "header");
  const std::uint64_t n_item_features = read_u64(in, "header");
  const std::uint64_t n_users = read_u64(in, "header");
  const std::uint64_t n_items = read_u64(in, "header");
  const std::uint64_t epoch_counter = read_u64(in, "header");

  FeatureMapping mapping;
  read_names(in, mapping.user_features, n_user_features, "user feature names");
  read_names(in, mapping.item_features, n_item_features, "item feature names");

  ModelState model(d, n_user_features, n_item_features);
  model.epoch_counter = epoch_counter;
  read_table(in, model.user_embeddings, n_user_features * d, "user embeddings");
  read_table(in, model.item_embeddings, n_item_features * d, "item embeddings");
  read_table(in, model.user_biases, n_user_features, "user biases");
  read_table(in, model.item_biases, n_item_features, "item biases");
  read_table(in, model.user_embedding_acc, n_user_features * d,
             "user embedding accumulators");
  read_table(in, model.item_embedding_acc, n_item_features * d,
             "item embedding accumulators");
  read_table(in, model.user_bias_acc, n_user_features,
             "user bias accumulators");
  read_table(in, model.item_bias_acc, n_item_features,
             "item bias accumulators");

  read_entity_sets(in, mapping.user_feature_sets, n_users, n_user_features,
                   "user feature sets");
  read_entity_sets(in, mapping.item_feature_sets, n_items, n_item_features,
                   "item feature sets");

  char marker[sizeof(kEndMarker)];
  if (!in.read(marker, sizeof(marker)) ||
      std::memcmp(marker, kEndMarker, sizeof(kEndMarker)) != 0) {
    throw ParseError("model file truncated in section: end marker");
  }
  return {std::move(model), std::move(mapping)};
}

std::pair<ModelState, FeatureMapping> load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open model file: " + path);
  }
  return load_model(in);
}

}  // namespace hybridfm
