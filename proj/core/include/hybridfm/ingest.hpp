#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "hybridfm/interactions.hpp"

namespace hybridfm {

struct RawRating {
  std::string user;
  std::string item;
  double rating = 0.0;   // 0.5 .. 5.0
  std::int64_t timestamp = 0;
};

struct TagAssignment {
  std::string item;
  std::string tag;
  double relevance = 0.0;  // 0 .. 1
};

// Lines formatted `user::item::rating::timestamp`. Throws ParseError with
// the line number on malformed input.
std::vector<RawRating> parse_ratings(std::istream& in);
std::vector<RawRating> parse_ratings_file(const std::string& path);

struct LabelledPair {
  std::string user;
  std::string item;
  bool positive = false;
};

// Ratings >= 4.0 are positive, everything below negative.
std::vector<LabelledPair> binarize(const std::vector<RawRating>& ratings);

// Tab- or comma-delimited rows (item, tag, relevance). Keeps assignments
// with relevance >= threshold; relevance outside [0,1] is a ValidationError.
std::vector<TagAssignment> parse_tag_genome(std::istream& in,
                                            double threshold = 0.8);
std::vector<TagAssignment> parse_tag_genome_file(const std::string& path,
                                                 double threshold = 0.8);

// MovieLens movies file `id::title::genre|genre|...`; genre features are
// always kept regardless of the tag relevance threshold.
std::unordered_map<std::string, std::vector<std::string>> parse_movie_genres(
    std::istream& in);
std::unordered_map<std::string, std::vector<std::string>>
parse_movie_genres_file(const std::string& path);

struct StackExchangeData {
  // One positive per answer: (answerer, parent question).
  std::vector<LabelledPair> positives;
  // Question id -> tag names.
  std::unordered_map<std::string, std::vector<std::string>> question_tags;
  // User id -> raw AboutMe text.
  std::unordered_map<std::string, std::string> about_texts;
  // Answers whose parent question was never seen.
  std::size_t skipped_orphan_answers = 0;
};

// StackExchange dump rows: Posts.xml (Id, PostTypeId, ParentId, OwnerUserId,
// Tags) and Users.xml (Id, AboutMe). Only answers (PostTypeId 2) produce
// interactions; other row types are ignored.
StackExchangeData parse_stackexchange(std::istream& posts, std::istream& users);
StackExchangeData parse_stackexchange_files(const std::string& posts_path,
                                            const std::string& users_path);

// Strips HTML tags, replaces non-alphabetic characters with spaces,
// lowercases, splits on whitespace.
std::vector<std::string> tokenize_about(const std::string& text);

// For each positive (u, i), draws `ratio` items uniformly without
// replacement from the items u has no positive interaction with; the samples
// for one user never repeat. Returns the positives merged with the sampled
// negatives. Deterministic per seed. Throws ValidationError when a user has
// answered every item (or the pool runs out).
InteractionSet sample_negatives(const InteractionSet& positives,
                                std::uint32_t n_items, std::uint32_t ratio,
                                std::uint64_t seed);

// Most frequent tokens first; ties broken by lexicographic order.
std::vector<std::string> top_tokens(
    const std::unordered_map<std::string, std::size_t>& counts,
    std::size_t limit);

}  // namespace hybridfm
