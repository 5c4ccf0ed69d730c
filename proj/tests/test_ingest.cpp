#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "hybridfm/dataset.hpp"
#include "hybridfm/errors.hpp"
#include "hybridfm/ingest.hpp"

using namespace hybridfm;

namespace {

std::filesystem::path fresh_dir(const std::string& leaf) {
  const auto dir = std::filesystem::temp_directory_path() / leaf;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::set<std::tuple<std::uint32_t, std::uint32_t, bool>> triples(
    const InteractionSet& set) {
  std::set<std::tuple<std::uint32_t, std::uint32_t, bool>> out;
  for (const auto& t : set.all()) {
    out.insert({t.user, t.item, t.positive});
  }
  return out;
}

}  // namespace

TEST_CASE("rating lines parse and reject malformed input") {
  std::istringstream in(
      "1::10::4.5::978300760\n"
      "\n"
      "2::20::3::978302109\n");
  const auto ratings = parse_ratings(in);
  REQUIRE(ratings.size() == 2);
  CHECK(ratings[0].user == "1");
  CHECK(ratings[0].item == "10");
  CHECK(ratings[0].rating == 4.5);
  CHECK(ratings[0].timestamp == 978300760);
  CHECK(ratings[1].rating == 3.0);

  std::istringstream missing("1::10::4.5\n");
  CHECK_THROWS_AS(parse_ratings(missing), ParseError);

  std::istringstream bad_rating("ok::ok::5::1\nu::i::x::978\n");
  try {
    parse_ratings(bad_rating);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  std::istringstream bad_ts("u::i::4.0::12.5\n");
  CHECK_THROWS_AS(parse_ratings(bad_ts), ParseError);
}

TEST_CASE("binarize uses the four-star boundary") {
  const std::vector<RawRating> ratings = {{"u", "a", 4.0, 0},
                                          {"u", "b", 3.9999, 0},
                                          {"u", "c", 0.5, 0},
                                          {"u", "d", 5.0, 0}};
  const auto pairs = binarize(ratings);
  REQUIRE(pairs.size() == 4);
  CHECK(pairs[0].positive);
  CHECK_FALSE(pairs[1].positive);
  CHECK_FALSE(pairs[2].positive);
  CHECK(pairs[3].positive);
}

TEST_CASE("tag assignments honor the relevance threshold") {
  std::istringstream tabbed(
      "5\tcyberpunk\t0.80\n"
      "5\twestern\t0.79\n"
      "7\tnoir\t1.0\n");
  const auto kept = parse_tag_genome(tabbed);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].item == "5");
  CHECK(kept[0].tag == "cyberpunk");
  CHECK(kept[0].relevance == 0.80);
  CHECK(kept[1].tag == "noir");

  std::istringstream comma("5,dystopia,0.9\n");
  const auto from_comma = parse_tag_genome(comma);
  REQUIRE(from_comma.size() == 1);
  CHECK(from_comma[0].tag == "dystopia");

  std::istringstream custom("5\trare\t0.31\n");
  CHECK(parse_tag_genome(custom, 0.3).size() == 1);

  std::istringstream above("5\tt\t1.5\n");
  CHECK_THROWS_AS(parse_tag_genome(above), ValidationError);
  std::istringstream below("5\tt\t-0.1\n");
  CHECK_THROWS_AS(parse_tag_genome(below), ValidationError);
  std::istringstream short_row("5\tt\n");
  CHECK_THROWS_AS(parse_tag_genome(short_row), ParseError);
}

TEST_CASE("movie genre lists split on pipes") {
  std::istringstream in(
      "1::Toy Story (1995)::Adventure|Animation|Children\n"
      "2::Dull Film (2001)::(no genres listed)\n"
      "3::Odd::Title::Drama\n");
  const auto genres = parse_movie_genres(in);
  REQUIRE(genres.size() == 3);
  CHECK(genres.at("1") ==
        std::vector<std::string>{"Adventure", "Animation", "Children"});
  CHECK(genres.at("2").empty());
  CHECK(genres.at("3") == std::vector<std::string>{"Drama"});
}

TEST_CASE("posts and users resolve into positives, tags and profiles") {
  // The answer for question 30 arrives before the question itself; the
  // answer for question 99 has no question at all.
  std::istringstream posts(
      "<?xml version=\"1.0\"?>\n"
      "<posts>\n"
      "  <row Id=\"2\" PostTypeId=\"2\" ParentId=\"30\" OwnerUserId=\"7\" />\n"
      "  <row Id=\"3\" PostTypeId=\"2\" ParentId=\"99\" OwnerUserId=\"7\" />\n"
      "  <row Id=\"30\" PostTypeId=\"1\" OwnerUserId=\"5\" "
      "Tags=\"&lt;bayesian&gt;&lt;prior&gt;\" />\n"
      "  <row Id=\"31\" PostTypeId=\"1\" />\n"
      "  <row Id=\"40\" PostTypeId=\"4\" />\n"
      "  <row Id=\"41\" PostTypeId=\"2\" ParentId=\"30\" />\n"
      "  <row Id=\"42\" PostTypeId=\"2\" ParentId=\"31\" OwnerUserId=\"9\" />\n"
      "</posts>\n");
  std::istringstream users(
      "<users>\n"
      "  <row Id=\"7\" AboutMe=\"&lt;p&gt;R &amp; stats&lt;/p&gt;\" />\n"
      "  <row Id=\"9\" />\n"
      "</users>\n");
  const auto data = parse_stackexchange(posts, users);

  REQUIRE(data.positives.size() == 2);
  CHECK(data.positives[0].user == "7");
  CHECK(data.positives[0].item == "30");
  CHECK(data.positives[0].positive);
  CHECK(data.positives[1].user == "9");
  CHECK(data.positives[1].item == "31");
  CHECK(data.skipped_orphan_answers == 1);

  CHECK(data.question_tags.at("30") ==
        std::vector<std::string>{"bayesian", "prior"});
  CHECK(data.question_tags.at("31").empty());

  CHECK(data.about_texts.at("7") == "<p>R & stats</p>");
  CHECK_FALSE(data.about_texts.contains("9"));
}

TEST_CASE("about text tokenization") {
  CHECK(tokenize_about("<p>I love R &amp; stats!</p>") ==
        std::vector<std::string>{"i", "love", "r", "amp", "stats"});
  // After XML unescaping the entity is a bare ampersand and drops out.
  CHECK(tokenize_about("<p>R & stats</p>") ==
        std::vector<std::string>{"r", "stats"});
  CHECK(tokenize_about("py3.11 user, ML/NLP") ==
        std::vector<std::string>{"py", "user", "ml", "nlp"});
  CHECK(tokenize_about("<a href=\"x\">link</a> text") ==
        std::vector<std::string>{"link", "text"});
  // An unterminated tag swallows the rest of the text.
  CHECK(tokenize_about("before <unclosed after") ==
        std::vector<std::string>{"before"});
  CHECK(tokenize_about("").empty());
  CHECK(tokenize_about("1234 ...").empty());
}

TEST_CASE("negative sampling is exact-count, disjoint and seeded") {
  InteractionSet positives;
  positives.add(0, 1, true);
  positives.add(0, 4, true);
  positives.add(2, 0, true);
  positives.add(2, 5, true);
  positives.add(2, 9, true);
  positives.add(7, 3, true);

  const auto sampled = sample_negatives(positives, 10, 2, 99);
  CHECK(sampled.positive_count() == 6);
  CHECK(sampled.negative_count() == 12);

  std::map<std::uint32_t, std::size_t> neg_per_user;
  for (const auto& t : sampled.all()) {
    if (!t.positive) {
      neg_per_user[t.user]++;
      CHECK_FALSE(positives.contains(t.user, t.item));
      CHECK(t.item < 10);
    }
  }
  CHECK(neg_per_user[0] == 4);
  CHECK(neg_per_user[2] == 6);
  CHECK(neg_per_user[7] == 2);

  const auto again = sample_negatives(positives, 10, 2, 99);
  CHECK(triples(again) == triples(sampled));
  const auto other_seed = sample_negatives(positives, 10, 2, 100);
  CHECK(triples(other_seed) != triples(sampled));
}

TEST_CASE("negative sampling rejects impossible requests") {
  InteractionSet positives;
  for (std::uint32_t i = 0; i < 5; ++i) {
    positives.add(0, i, true);
  }
  // 5 unanswered items cannot supply 10 negatives.
  CHECK_THROWS_AS(sample_negatives(positives, 10, 2, 1), ValidationError);

  InteractionSet mixed;
  mixed.add(0, 0, true);
  mixed.add(0, 1, false);
  CHECK_THROWS_AS(sample_negatives(mixed, 10, 1, 1), ValidationError);

  InteractionSet beyond;
  beyond.add(0, 12, true);
  CHECK_THROWS_AS(sample_negatives(beyond, 10, 1, 1), ValidationError);
}

TEST_CASE("top tokens rank by count then name") {
  std::unordered_map<std::string, std::size_t> counts = {
      {"b", 3}, {"a", 3}, {"c", 5}, {"d", 1}};
  CHECK(top_tokens(counts, 3) == std::vector<std::string>{"c", "a", "b"});
  CHECK(top_tokens(counts, 10) ==
        std::vector<std::string>{"c", "a", "b", "d"});
  CHECK(top_tokens({}, 3).empty());
}

TEST_CASE("dataset directory round trip") {
  Dataset dataset;
  dataset.name = "toy";
  dataset.user_names = {"alice", "bob"};
  dataset.item_names = {"m1", "m2", "m3"};
  dataset.item_metadata = {{"scifi", "classic"}, {}, {"scifi"}};
  dataset.user_metadata = {{"stats", "r"}, {}};
  dataset.interactions.add(0, 0, true);
  dataset.interactions.add(0, 1, false);
  dataset.interactions.add(1, 2, true);
  dataset.interactions.add(1, 0, false);

  const auto dir = fresh_dir("hybridfm_test_dataset");
  write_dataset(dataset, (dir / "toy").string());
  const auto loaded = read_dataset((dir / "toy").string());

  CHECK(loaded.name == "toy");
  CHECK(loaded.user_names == dataset.user_names);
  CHECK(loaded.item_names == dataset.item_names);
  CHECK(loaded.item_metadata == dataset.item_metadata);
  CHECK(loaded.user_metadata == dataset.user_metadata);
  CHECK(triples(loaded.interactions) == triples(dataset.interactions));

  CHECK_THROWS_AS(read_dataset((dir / "missing").string()), ParseError);

  std::filesystem::create_directories(dir / "bad");
  std::ofstream(dir / "bad" / "interactions.tsv") << "alice\tm1\t2\n";
  CHECK_THROWS_AS(read_dataset((dir / "bad").string()), ParseError);
}

TEST_CASE("feature mappings per variant") {
  Dataset dataset;
  dataset.user_names = {"u1", "u2"};
  dataset.item_names = {"i1", "i2", "i3"};
  dataset.item_metadata = {{"rock", "indie"}, {"rock"}, {}};
  dataset.user_metadata = {{"guitar"}, {"guitar", "drums"}};

  SUBCASE("indicator-only variant") {
    const auto mapping = build_feature_mapping(dataset, ModelVariant::kMf);
    CHECK(mapping.user_features.size() == 2);
    CHECK(mapping.item_features.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      REQUIRE(mapping.item_feature_sets[i].size() == 1);
      CHECK(is_indicator_feature(
          mapping.item_features.name(mapping.item_feature_sets[i][0])));
    }
  }

  SUBCASE("metadata variant shares tag features across items") {
    const auto mapping =
        build_feature_mapping(dataset, ModelVariant::kLightFmTags);
    CHECK(mapping.item_features.contains("rock"));
    CHECK(mapping.item_features.contains("indie"));
    const auto rock = mapping.item_features.at("rock");
    CHECK(std::count(mapping.item_feature_sets[0].begin(),
                     mapping.item_feature_sets[0].end(), rock) == 1);
    CHECK(std::count(mapping.item_feature_sets[1].begin(),
                     mapping.item_feature_sets[1].end(), rock) == 1);
    // The metadata-free item falls back to its indicator.
    REQUIRE(mapping.item_feature_sets[2].size() == 1);
    CHECK(mapping.item_features.name(mapping.item_feature_sets[2][0]) ==
          item_indicator_name("i3"));
    // Users are indicators only.
    CHECK(mapping.user_features.size() == 2);
  }

  SUBCASE("metadata plus indicators") {
    const auto mapping =
        build_feature_mapping(dataset, ModelVariant::kLightFmTagsIds);
    CHECK(mapping.item_feature_sets[0].size() == 3);  // indicator + 2 tags
    CHECK(mapping.item_feature_sets[2].size() == 1);  // indicator only
  }

  SUBCASE("about tokens extend the user side") {
    const auto mapping =
        build_feature_mapping(dataset, ModelVariant::kLightFmTagsAbout);
    const auto guitar = mapping.user_features.at("guitar");
    CHECK(std::count(mapping.user_feature_sets[0].begin(),
                     mapping.user_feature_sets[0].end(), guitar) == 1);
    CHECK(std::count(mapping.user_feature_sets[1].begin(),
                     mapping.user_feature_sets[1].end(), guitar) == 1);
    CHECK(mapping.user_features.contains("drums"));

    Dataset no_about = dataset;
    no_about.user_metadata = {{}, {}};
    CHECK_THROWS_AS(
        build_feature_mapping(no_about, ModelVariant::kLightFmTagsAbout),
        ValidationError);
  }

  SUBCASE("baseline variants have no feature mapping") {
    CHECK_THROWS_AS(build_feature_mapping(dataset, ModelVariant::kLsiLr),
                    ValidationError);
  }
}

TEST_CASE("item feature matrix is binary with deduped columns") {
  Dataset dataset;
  dataset.user_names = {"u"};
  dataset.item_names = {"a", "b", "c"};
  dataset.item_metadata = {{"rock", "rock", "indie"}, {"indie"}, {}};
  const auto out = item_feature_matrix(dataset);
  CHECK(out.matrix.rows() == 3);
  CHECK(out.matrix.cols() == 2);
  CHECK(out.matrix.nonzeros() == 3);
  const auto rock = out.features.at("rock");
  const auto row0 = out.matrix.row_indices(0);
  CHECK(std::count(row0.begin(), row0.end(), rock) == 1);
  for (auto v : out.matrix.row_values(0)) {
    CHECK(v == 1.0);
  }
  CHECK(out.matrix.row_indices(2).empty());
}

TEST_CASE("model variant names round trip") {
  for (const auto& name : {"mf", "lsi-lr", "lsi-up", "lightfm-tags",
                           "lightfm-tags-ids", "lightfm-tags-about"}) {
    CHECK(model_variant_name(parse_model_variant(name)) == name);
  }
  CHECK_THROWS_AS(parse_model_variant("bpr"), ValidationError);
  CHECK(is_core_model_variant(ModelVariant::kMf));
  CHECK_FALSE(is_core_model_variant(ModelVariant::kLsiUp));
}
