#include "hybridfm/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <unordered_set>

#include "hybridfm/errors.hpp"
#include "hybridfm/rng.hpp"

namespace hybridfm {

namespace {

std::vector<std::string> split_on(const std::string& line,
                                  const std::string& delim) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + delim.size();
  }
}

double parse_double(const std::string& text, std::size_t line_no,
                    const char* what) {
  try {
    std::size_t consumed = 0;
    const double v = std::stod(text, &consumed);
    if (consumed != text.size()) {
      throw ParseError("");
    }
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": bad " + what +
                     " value: " + text);
  }
}

std::int64_t parse_int(const std::string& text, std::size_t line_no,
                       const char* what) {
  std::int64_t v = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": bad " + what +
                     " value: " + text);
  }
  return v;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open " + path);
  }
  return in;
}

std::string xml_unescape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '&') {
      out.push_back(text[i++]);
      continue;
    }
    const std::size_t semi = text.find(';', i);
    if (semi == std::string::npos) {
      out.push_back(text[i++]);
      continue;
    }
    const std::string entity = text.substr(i + 1, semi - i - 1);
    if (entity == "lt") {
      out.push_back('<');
    } else if (entity == "gt") {
      out.push_back('>');
    } else if (entity == "amp") {
      out.push_back('&');
    } else if (entity == "quot") {
      out.push_back('"');
    } else if (entity == "apos") {
      out.push_back('\'');
    } else if (entity.size() > 1 && entity[0] == '#') {
      const bool hex = entity[1] == 'x' || entity[1] == 'X';
      const std::string digits = entity.substr(hex ? 2 : 1);
      unsigned code = 0;
      const auto [ptr, ec] = std::from_chars(
          digits.data(), digits.data() + digits.size(), code, hex ? 16 : 10);
      if (ec == std::errc() && ptr == digits.data() + digits.size() &&
          code > 0 && code < 128) {
        out.push_back(static_cast<char>(code));
      }
    } else {
      out.append(text, i, semi - i + 1);
    }
    i = semi + 1;
  }
  return out;
}

// Value of `name="..."` within one <row .../> line, XML-unescaped.
std::optional<std::string> xml_attr(const std::string& line,
                                    const std::string& name) {
  const std::string needle = " " + name + "=\"";
  const std::size_t pos = line.find(needle);
  if (pos == std::string::npos) {
    return std::nullopt;
  }
  const std::size_t start = pos + needle.size();
  const std::size_t end = line.find('"', start);
  if (end == std::string::npos) {
    return std::nullopt;
  }
  return xml_unescape(line.substr(start, end - start));
}

// "<tag-a><tag-b>" -> {"tag-a", "tag-b"}.
std::vector<std::string> split_tag_list(const std::string& tags) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < tags.size()) {
    if (tags[i] != '<') {
      ++i;
      continue;
    }
    const std::size_t close = tags.find('>', i);
    if (close == std::string::npos) {
      break;
    }
    if (close > i + 1) {
      out.push_back(tags.substr(i + 1, close - i - 1));
    }
    i = close + 1;
  }
  return out;
}

}  // namespace

std::vector<RawRating> parse_ratings(std::istream& in) {
  std::vector<RawRating> ratings;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const auto fields = split_on(line, "::");
    if (fields.size() != 4 || fields[0].empty() || fields[1].empty()) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected user::item::rating::timestamp");
    }
    RawRating r;
    r.user = fields[0];
    r.item = fields[1];
    r.rating = parse_double(fields[2], line_no, "rating");
    r.timestamp = parse_int(fields[3], line_no, "timestamp");
    ratings.push_back(std::move(r));
  }
  return ratings;
}

std::vector<RawRating> parse_ratings_file(const std::string& path) {
  auto in = open_or_throw(path);
  return parse_ratings(in);
}

std::vector<LabelledPair> binarize(const std::vector<RawRating>& ratings) {
  std::vector<LabelledPair> pairs;
  pairs.reserve(ratings.size());
  for (const auto& r : ratings) {
    pairs.push_back({r.user, r.item, r.rating >= 4.0});
  }
  return pairs;
}

std::vector<TagAssignment> parse_tag_genome(std::istream& in,
                                            double threshold) {
  std::vector<TagAssignment> kept;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    auto fields = split_on(line, "\t");
    if (fields.size() != 3) {
      fields = split_on(line, ",");
    }
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected item, tag, relevance");
    }
    const double relevance = parse_double(fields[2], line_no, "relevance");
    if (relevance < 0.0 || relevance > 1.0) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": relevance outside [0, 1]: " + fields[2]);
    }
    if (relevance >= threshold) {
      kept.push_back({fields[0], fields[1], relevance});
    }
  }
  return kept;
}

std::vector<TagAssignment> parse_tag_genome_file(const std::string& path,
                                                 double threshold) {
  auto in = open_or_throw(path);
  return parse_tag_genome(in, threshold);
}

std::unordered_map<std::string, std::vector<std::string>> parse_movie_genres(
    std::istream& in) {
  std::unordered_map<std::string, std::vector<std::string>> genres;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const auto fields = split_on(line, "::");
    if (fields.size() < 3 || fields[0].empty()) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected id::title::genres");
    }
    auto& list = genres[fields[0]];
    for (const auto& g : split_on(fields.back(), "|")) {
      if (!g.empty() && g != "(no genres listed)") {
        list.push_back(g);
      }
    }
  }
  return genres;
}

std::unordered_map<std::string, std::vector<std::string>>
parse_movie_genres_file(const std::string& path) {
  auto in = open_or_throw(path);
  return parse_movie_genres(in);
}

StackExchangeData parse_stackexchange(std::istream& posts,
                                      std::istream& users) {
  StackExchangeData data;
  struct Answer {
    std::string owner;
    std::string parent;
  };
  std::vector<Answer> answers;

  std::string line;
  while (std::getline(posts, line)) {
    if (line.find("<row") == std::string::npos) {
      continue;
    }
    const auto type = xml_attr(line, "PostTypeId");
    if (!type) {
      continue;
    }
    if (*type == "1") {
      const auto id = xml_attr(line, "Id");
      if (!id) {
        continue;
      }
      const auto tags = xml_attr(line, "Tags");
      data.question_tags[*id] = tags ? split_tag_list(*tags)
                                     : std::vector<std::string>{};
    } else if (*type == "2") {
      const auto owner = xml_attr(line, "OwnerUserId");
      const auto parent = xml_attr(line, "ParentId");
      if (owner && parent && !owner->empty() && !parent->empty()) {
        answers.push_back({*owner, *parent});
      }
    }
  }

  // Resolve after the full pass so answers may precede their questions.
  for (const auto& a : answers) {
    if (data.question_tags.contains(a.parent)) {
      data.positives.push_back({a.owner, a.parent, true});
    } else {
      ++data.skipped_orphan_answers;
    }
  }

  while (std::getline(users, line)) {
    if (line.find("<row") == std::string::npos) {
      continue;
    }
    const auto id = xml_attr(line, "Id");
    if (!id || id->empty()) {
      continue;
    }
    const auto about = xml_attr(line, "AboutMe");
    if (about && !about->empty()) {
      data.about_texts[*id] = *about;
    }
  }
  return data;
}

StackExchangeData parse_stackexchange_files(const std::string& posts_path,
                                            const std::string& users_path) {
  auto posts = open_or_throw(posts_path);
  auto users = open_or_throw(users_path);
  return parse_stackexchange(posts, users);
}

std::vector<std::string> tokenize_about(const std::string& text) {
  // Drop <...> spans first, then keep only letters.
  std::string plain;
  plain.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '<') {
      const std::size_t close = text.find('>', i);
      if (close == std::string::npos) {
        break;
      }
      i = close + 1;
      plain.push_back(' ');
      continue;
    }
    plain.push_back(text[i++]);
  }

  std::vector<std::string> tokens;
  std::string current;
  for (char c : plain) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalpha(uc)) {
      current.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) {
    tokens.push_back(std::move(current));
  }
  return tokens;
}

InteractionSet sample_negatives(const InteractionSet& positives,
                                std::uint32_t n_items, std::uint32_t ratio,
                                std::uint64_t seed) {
  if (positives.negative_count() > 0) {
    throw ValidationError("input to negative sampling must be all-positive");
  }

  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> items_of;
  for (const auto& t : positives.all()) {
    if (t.item >= n_items) {
      throw ValidationError("positive interaction references item beyond "
                            "n_items");
    }
    items_of[t.user].push_back(t.item);
  }
  std::vector<std::uint32_t> users;
  users.reserve(items_of.size());
  for (const auto& [user, items] : items_of) {
    users.push_back(user);
  }
  std::sort(users.begin(), users.end());

  InteractionSet out;
  for (const auto& t : positives.all()) {
    out.add(t.user, t.item, true);
  }

  Rng rng(seed);
  for (auto user : users) {
    const auto& answered = items_of[user];
    const std::unordered_set<std::uint32_t> answered_set(answered.begin(),
                                                         answered.end());
    std::vector<std::uint32_t> pool;
    pool.reserve(n_items - answered_set.size());
    for (std::uint32_t i = 0; i < n_items; ++i) {
      if (!answered_set.contains(i)) {
        pool.push_back(i);
      }
    }
    const std::size_t needed =
        static_cast<std::size_t>(answered.size()) * ratio;
    if (pool.size() < needed) {
      throw ValidationError(
          "user " + std::to_string(user) +
          " has too few unanswered items for the requested negative ratio");
    }
    // Partial Fisher-Yates: the first `needed` slots become the sample.
    for (std::size_t i = 0; i < needed; ++i) {
      const std::size_t j = i + rng.below(pool.size() - i);
      std::swap(pool[i], pool[j]);
      out.add(user, pool[i], false);
    }
  }
  return out;
}

std::vector<std::string> top_tokens(
    const std::unordered_map<std::string, std::size_t>& counts,
    std::size_t limit) {
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(),
                                                          counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > limit) {
    ranked.resize(limit);
  }
  std::vector<std::string> tokens;
  tokens.reserve(ranked.size());
  for (auto& [token, count] : ranked) {
    tokens.push_back(std::move(token));
  }
  return tokens;
}

}  // namespace hybridfm
