#include "hybridfm/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "hybridfm/errors.hpp"

namespace hybridfm {

namespace {

constexpr const char* kUserIndicatorPrefix = "user_id:";
constexpr const char* kItemIndicatorPrefix = "item_id:";

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

}  // namespace

bool Dataset::has_user_metadata() const {
  return std::any_of(user_metadata.begin(), user_metadata.end(),
                     [](const auto& tokens) { return !tokens.empty(); });
}

ModelVariant parse_model_variant(const std::string& name) {
  if (name == "mf") return ModelVariant::kMf;
  if (name == "lsi-lr") return ModelVariant::kLsiLr;
  if (name == "lsi-up") return ModelVariant::kLsiUp;
  if (name == "lightfm-tags") return ModelVariant::kLightFmTags;
  if (name == "lightfm-tags-ids") return ModelVariant::kLightFmTagsIds;
  if (name == "lightfm-tags-about") return ModelVariant::kLightFmTagsAbout;
  throw ValidationError(
      "unknown model variant: " + name +
      " (expected mf, lsi-lr, lsi-up, lightfm-tags, lightfm-tags-ids or "
      "lightfm-tags-about)");
}

std::string model_variant_name(ModelVariant variant) {
  switch (variant) {
    case ModelVariant::kMf:
      return "mf";
    case ModelVariant::kLsiLr:
      return "lsi-lr";
    case ModelVariant::kLsiUp:
      return "lsi-up";
    case ModelVariant::kLightFmTags:
      return "lightfm-tags";
    case ModelVariant::kLightFmTagsIds:
      return "lightfm-tags-ids";
    case ModelVariant::kLightFmTagsAbout:
      return "lightfm-tags-about";
  }
  throw ValidationError("unknown model variant value");
}

bool is_core_model_variant(ModelVariant variant) {
  return variant != ModelVariant::kLsiLr && variant != ModelVariant::kLsiUp;
}

std::string user_indicator_name(const std::string& user_name) {
  return kUserIndicatorPrefix + user_name;
}

std::string item_indicator_name(const std::string& item_name) {
  return kItemIndicatorPrefix + item_name;
}

bool is_indicator_feature(const std::string& feature_name) {
  return feature_name.starts_with(kUserIndicatorPrefix) ||
         feature_name.starts_with(kItemIndicatorPrefix);
}

FeatureMapping build_feature_mapping(const Dataset& dataset,
                                     ModelVariant variant) {
  if (!is_core_model_variant(variant)) {
    throw ValidationError("variant " + model_variant_name(variant) +
                          " does not use the feature-embedding model");
  }
  const std::size_t n_users = dataset.user_names.size();
  const std::size_t n_items = dataset.item_names.size();
  if (dataset.item_metadata.size() != n_items) {
    throw ValidationError("item metadata size does not match item count");
  }
  const bool use_about = variant == ModelVariant::kLightFmTagsAbout;
  if (use_about && !dataset.has_user_metadata()) {
    throw ValidationError(
        "variant lightfm-tags-about requires user metadata");
  }
  if (use_about && dataset.user_metadata.size() != n_users) {
    throw ValidationError("user metadata size does not match user count");
  }

  FeatureMapping mapping;
  mapping.user_feature_sets.resize(n_users);
  mapping.item_feature_sets.resize(n_items);

  for (std::size_t u = 0; u < n_users; ++u) {
    auto& set = mapping.user_feature_sets[u];
    set.push_back(
        mapping.user_features.add(user_indicator_name(dataset.user_names[u])));
    if (use_about) {
      for (const auto& token : dataset.user_metadata[u]) {
        const auto id = mapping.user_features.add(token);
        if (std::find(set.begin(), set.end(), id) == set.end()) {
          set.push_back(id);
        }
      }
    }
  }

  const bool use_metadata = variant != ModelVariant::kMf;
  const bool use_item_ids =
      variant == ModelVariant::kMf || variant == ModelVariant::kLightFmTagsIds;
  for (std::size_t i = 0; i < n_items; ++i) {
    auto& set = mapping.item_feature_sets[i];
    if (use_item_ids) {
      set.push_back(mapping.item_features.add(
          item_indicator_name(dataset.item_names[i])));
    }
    if (use_metadata) {
      for (const auto& tag : dataset.item_metadata[i]) {
        const auto id = mapping.item_features.add(tag);
        if (std::find(set.begin(), set.end(), id) == set.end()) {
          set.push_back(id);
        }
      }
    }
    if (set.empty()) {
      // No metadata for this item: fall back to its indicator.
      set.push_back(mapping.item_features.add(
          item_indicator_name(dataset.item_names[i])));
    }
  }

  mapping.validate();
  return mapping;
}

ItemFeatureMatrix item_feature_matrix(const Dataset& dataset) {
  ItemFeatureMatrix out;
  std::vector<SparseEntry> entries;
  for (std::size_t i = 0; i < dataset.item_metadata.size(); ++i) {
    std::vector<std::uint32_t> cols;
    for (const auto& tag : dataset.item_metadata[i]) {
      cols.push_back(out.features.add(tag));
    }
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    for (auto c : cols) {
      entries.push_back({static_cast<std::uint32_t>(i), c, 1.0});
    }
  }
  out.matrix = SparseMatrix(dataset.item_metadata.size(), out.features.size(),
                            std::move(entries));
  return out;
}

void write_dataset(const Dataset& dataset, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  const fs::path dir(directory);

  {
    std::ofstream out(dir / "interactions.tsv");
    if (!out) {
      throw ParseError("cannot write " + (dir / "interactions.tsv").string());
    }
    for (const auto& t : dataset.interactions.all()) {
      out << dataset.user_names.at(t.user) << '\t'
          << dataset.item_names.at(t.item) << '\t' << (t.positive ? 1 : 0)
          << '\n';
    }
  }
  {
    std::ofstream out(dir / "item_features.tsv");
    if (!out) {
      throw ParseError("cannot write " + (dir / "item_features.tsv").string());
    }
    for (std::size_t i = 0; i < dataset.item_metadata.size(); ++i) {
      for (const auto& tag : dataset.item_metadata[i]) {
        out << dataset.item_names[i] << '\t' << tag << '\n';
      }
    }
  }
  if (dataset.has_user_metadata()) {
    std::ofstream out(dir / "user_features.tsv");
    if (!out) {
      throw ParseError("cannot write " + (dir / "user_features.tsv").string());
    }
    for (std::size_t u = 0; u < dataset.user_metadata.size(); ++u) {
      for (const auto& token : dataset.user_metadata[u]) {
        out << dataset.user_names[u] << '\t' << token << '\n';
      }
    }
  }
}

Dataset read_dataset(const std::string& directory) {
  namespace fs = std::filesystem;
  const fs::path dir(directory);

  Dataset dataset;
  dataset.name = dir.filename().string();
  std::unordered_map<std::string, std::uint32_t> user_ids;
  std::unordered_map<std::string, std::uint32_t> item_ids;
  const auto user_id = [&](const std::string& name) {
    const auto [it, inserted] =
        user_ids.try_emplace(name, static_cast<std::uint32_t>(user_ids.size()));
    if (inserted) {
      dataset.user_names.push_back(name);
    }
    return it->second;
  };
  const auto item_id = [&](const std::string& name) {
    const auto [it, inserted] =
        item_ids.try_emplace(name, static_cast<std::uint32_t>(item_ids.size()));
    if (inserted) {
      dataset.item_names.push_back(name);
    }
    return it->second;
  };

  {
    const auto path = dir / "interactions.tsv";
    std::ifstream in(path);
    if (!in) {
      throw ParseError("cannot open " + path.string());
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) {
        continue;
      }
      const auto fields = split_tabs(line);
      if (fields.size() != 3 || (fields[2] != "0" && fields[2] != "1")) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": expected user<TAB>item<TAB>label with label 0 or 1");
      }
      dataset.interactions.add(user_id(fields[0]), item_id(fields[1]),
                               fields[2] == "1");
    }
  }

  dataset.item_metadata.resize(dataset.item_names.size());
  {
    const auto path = dir / "item_features.tsv";
    std::ifstream in(path);
    if (in) {
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
          continue;
        }
        const auto fields = split_tabs(line);
        if (fields.size() != 2) {
          throw ParseError(path.string() + ":" + std::to_string(line_no) +
                           ": expected item<TAB>feature");
        }
        const auto id = item_id(fields[0]);
        dataset.item_metadata.resize(dataset.item_names.size());
        dataset.item_metadata[id].push_back(fields[1]);
      }
    }
  }

  dataset.user_metadata.resize(dataset.user_names.size());
  {
    const auto path = dir / "user_features.tsv";
    std::ifstream in(path);
    if (in) {
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
          continue;
        }
        const auto fields = split_tabs(line);
        if (fields.size() != 2) {
          throw ParseError(path.string() + ":" + std::to_string(line_no) +
                           ": expected user<TAB>feature");
        }
        const auto id = user_id(fields[0]);
        dataset.user_metadata.resize(dataset.user_names.size());
        dataset.user_metadata[id].push_back(fields[1]);
      }
    }
  }
  dataset.item_metadata.resize(dataset.item_names.size());
  dataset.user_metadata.resize(dataset.user_names.size());
  return dataset;
}

}  // namespace hybridfm
