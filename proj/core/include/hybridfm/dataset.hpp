#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hybridfm/feature_mapping.hpp"
#include "hybridfm/interactions.hpp"
#include "hybridfm/sparse.hpp"

namespace hybridfm {

// In-memory dataset: entity names, per-entity metadata features, and the
// labelled interactions. Entities are dense ids into the name vectors.
struct Dataset {
  std::string name;
  std::vector<std::string> user_names;
  std::vector<std::string> item_names;
  std::vector<std::vector<std::string>> item_metadata;  // tags/genres per item
  std::vector<std::vector<std::string>> user_metadata;  // about tokens per user
  InteractionSet interactions;

  bool has_user_metadata() const;
};

enum class ModelVariant {
  kMf,
  kLsiLr,
  kLsiUp,
  kLightFmTags,
  kLightFmTagsIds,
  kLightFmTagsAbout,
};

// Accepts mf, lsi-lr, lsi-up, lightfm-tags, lightfm-tags-ids,
// lightfm-tags-about. Throws ValidationError otherwise.
ModelVariant parse_model_variant(const std::string& name);
std::string model_variant_name(ModelVariant variant);

bool is_core_model_variant(ModelVariant variant);

// Prefix used for indicator feature names, so that metadata features (raw
// tag names) stay queryable by name.
std::string user_indicator_name(const std::string& user_name);
std::string item_indicator_name(const std::string& item_name);
bool is_indicator_feature(const std::string& feature_name);

// Builds the feature mapping for a core-model variant:
//   mf                  indicator features only,
//   lightfm-tags        item metadata, user indicators,
//   lightfm-tags-ids    item metadata + item indicators, user indicators,
//   lightfm-tags-about  item metadata, user indicators + about tokens.
// Items without any metadata fall back to their indicator feature so that
// feature sets stay non-empty. Throws ValidationError for lightfm-tags-about
// on a dataset without user metadata.
FeatureMapping build_feature_mapping(const Dataset& dataset,
                                     ModelVariant variant);

// Binary item x metadata-feature matrix for the LSI baselines, together with
// the metadata feature dictionary defining its columns.
struct ItemFeatureMatrix {
  SparseMatrix matrix;
  FeatureDictionary features;
};
ItemFeatureMatrix item_feature_matrix(const Dataset& dataset);

// Canonical on-disk layout inside a dataset directory:
//   interactions.tsv   user<TAB>item<TAB>label   (label 1 or 0)
//   item_features.tsv  item<TAB>feature
//   user_features.tsv  user<TAB>feature          (optional)
void write_dataset(const Dataset& dataset, const std::string& directory);
Dataset read_dataset(const std::string& directory);

}  // namespace hybridfm
