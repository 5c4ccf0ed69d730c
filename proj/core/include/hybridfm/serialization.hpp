#pragma once

#include <iosfwd>
#include <string>
#include <utility>

#include "hybridfm/feature_mapping.hpp"
#include "hybridfm/model.hpp"

namespace hybridfm {

// Versioned binary container: header (magic, version, d, |F_U|, |F_I|),
// feature-name dictionaries, parameter and accumulator tables as
// little-endian float32 in row-major order, then the per-entity feature
// lists. load(save(m)) is bit-exact, including accumulators and the epoch
// counter, so training can resume from a restored state.
void save_model(const ModelState& model, const FeatureMapping& mapping,
                std::ostream& out);
void save_model(const ModelState& model, const FeatureMapping& mapping,
                const std::string& path);

// Throws ParseError (naming the offending section) on malformed input and
// VersionError on a format-version mismatch.
std::pair<ModelState, FeatureMapping> load_model(std::istream& in);
std::pair<ModelState, FeatureMapping> load_model(const std::string& path);

}  // namespace hybridfm
