#include "embspace/corpus.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "embspace/errors.hpp"

namespace embspace::corpus {

namespace {

using nlohmann::json;

MentionSpan read_span(const json& arr, const char* field) {
  if (!arr.is_array() || arr.size() != 2 || !arr[0].is_number_integer() ||
      !arr[1].is_number_integer()) {
    throw ValidationError(std::string(field) +
                          " must be a two-integer array [start,end)");
  }
  const auto start = arr[0].get<long long>();
  const auto end = arr[1].get<long long>();
  if (start < 0 || end < 0) {
    throw ValidationError(std::string(field) + " has a negative index");
  }
  return MentionSpan{static_cast<std::size_t>(start),
                     static_cast<std::size_t>(end)};
}

std::vector<std::string> read_tokens(const json& arr) {
  if (!arr.is_array()) {
    throw ValidationError("tokens must be an array of strings");
  }
  std::vector<std::string> tokens;
  tokens.reserve(arr.size());
  for (const auto& t : arr) {
    if (!t.is_string()) {
      throw ValidationError("tokens must be an array of strings");
    }
    tokens.push_back(t.get<std::string>());
  }
  return tokens;
}

TokenizedSentence parse_record(const std::string& line) {
  json rec = json::parse(line);  // json::exception on malformed input
  if (!rec.is_object()) throw ValidationError("record is not an object");
  TokenizedSentence s;
  if (!rec.contains("id") || !rec["id"].is_string()) {
    throw ValidationError("missing string field `id`");
  }
  s.id = rec["id"].get<std::string>();
  if (!rec.contains("tokens")) throw ValidationError("missing field `tokens`");
  s.tokens = read_tokens(rec["tokens"]);
  if (s.tokens.empty()) {
    throw ValidationError("sentence " + s.id + " has no tokens");
  }
  if (!rec.contains("m1") || !rec.contains("m2")) {
    throw ValidationError("sentence " + s.id + " is missing m1/m2");
  }
  s.mention1 = read_span(rec["m1"], "m1");
  s.mention2 = read_span(rec["m2"], "m2");
  if (!rec.contains("relation") || !rec["relation"].is_string()) {
    throw ValidationError("sentence " + s.id + " is missing `relation`");
  }
  s.relation = rec["relation"].get<std::string>();

  const std::size_t len = s.tokens.size();
  for (const MentionSpan* m : {&s.mention1, &s.mention2}) {
    if (!(m->start < m->end) || m->end > len) {
      throw ValidationError("sentence " + s.id + ": mention [" +
                            std::to_string(m->start) + "," +
                            std::to_string(m->end) + ") out of bounds for " +
                            std::to_string(len) + " tokens");
    }
  }
  // Table-style "first mention" is positional: store in textual order.
  if (s.mention2.start < s.mention1.start ||
      (s.mention2.start == s.mention1.start &&
       s.mention2.end < s.mention1.end)) {
    std::swap(s.mention1, s.mention2);
  }
  return s;
}

}  // namespace

ParseResult parse_corpus(std::istream& in, bool strict) {
  ParseResult out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.sentences.push_back(parse_record(line));
    } catch (const std::exception& e) {
      if (strict) {
        throw ValidationError("line " + std::to_string(line_no) + ": " +
                              e.what());
      }
      out.issues.push_back({line_no, e.what()});
    }
  }
  return out;
}

TokenRecordResult parse_token_records(std::istream& in, bool strict) {
  TokenRecordResult out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json rec = json::parse(line);
      if (!rec.is_object()) throw ValidationError("record is not an object");
      TokenRecord r;
      if (!rec.contains("id") || !rec["id"].is_string()) {
        throw ValidationError("missing string field `id`");
      }
      r.id = rec["id"].get<std::string>();
      if (!rec.contains("tokens")) {
        throw ValidationError("missing field `tokens`");
      }
      r.tokens = read_tokens(rec["tokens"]);
      if (r.tokens.empty()) {
        throw ValidationError("record " + r.id + " has no tokens");
      }
      if (rec.contains("relation") && rec["relation"].is_string()) {
        r.relation = rec["relation"].get<std::string>();
      }
      out.records.push_back(std::move(r));
    } catch (const std::exception& e) {
      if (strict) {
        throw ValidationError("line " + std::to_string(line_no) + ": " +
                              e.what());
      }
      out.issues.push_back({line_no, e.what()});
    }
  }
  return out;
}

namespace {

std::size_t span_end(const TokenizedSentence& s) {
  return std::max(s.mention1.end, s.mention2.end);
}

std::vector<std::string> slice(const std::vector<std::string>& tokens,
                               std::size_t lo, std::size_t hi) {
  return std::vector<std::string>(tokens.begin() + lo, tokens.begin() + hi);
}

void check_width(std::size_t w, const char* name) {
  if (w < 1 || w > 20) {
    throw ParameterError(std::string(name) + " width must be in [1, 20], got " +
                         std::to_string(w));
  }
}

}  // namespace

SubSentence extract_span(const TokenizedSentence& s) {
  return SubSentence{s.id, "span",
                     slice(s.tokens, s.mention1.start, span_end(s)),
                     s.relation};
}

SubSentence extract_span_ba(const TokenizedSentence& s, std::size_t i) {
  check_width(i, "spanBA");
  const std::size_t len = s.tokens.size();
  const std::size_t lo = s.mention1.start >= i ? s.mention1.start - i : 0;
  const std::size_t hi = std::min(len, span_end(s) + i);
  return SubSentence{s.id, "spanBA" + std::to_string(i), slice(s.tokens, lo, hi),
                     s.relation};
}

SubSentence extract_surroundings(const TokenizedSentence& s, std::size_t j) {
  check_width(j, "surroundings");
  const std::size_t len = s.tokens.size();
  const auto window = [&](const MentionSpan& m) {
    return MentionSpan{m.start >= j ? m.start - j : 0, std::min(len, m.end + j)};
  };
  MentionSpan w1 = window(s.mention1);
  MentionSpan w2 = window(s.mention2);
  if (w2.start < w1.start) std::swap(w1, w2);

  std::vector<std::string> tokens;
  if (w2.start <= w1.end) {
    // Overlapping or touching windows collapse into one chunk so no token
    // is duplicated.
    tokens = slice(s.tokens, w1.start, std::max(w1.end, w2.end));
  } else {
    tokens = slice(s.tokens, w1.start, w1.end);
    const auto chunk2 = slice(s.tokens, w2.start, w2.end);
    tokens.insert(tokens.end(), chunk2.begin(), chunk2.end());
  }
  return SubSentence{s.id, "surroundings" + std::to_string(j),
                     std::move(tokens), s.relation};
}

ExtractionTag ExtractionTag::parse(std::string_view text) {
  if (text == "original") return {Kind::original, 0};
  if (text == "span") return {Kind::span, 0};
  const auto number = [&](std::string_view prefix) -> std::size_t {
    std::string_view digits = text.substr(prefix.size());
    if (digits.empty() || digits.size() > 2) {
      throw ParameterError("bad extraction tag: " + std::string(text));
    }
    std::size_t value = 0;
    for (char c : digits) {
      if (c < '0' || c > '9') {
        throw ParameterError("bad extraction tag: " + std::string(text));
      }
      value = value * 10 + static_cast<std::size_t>(c - '0');
    }
    if (value < 1 || value > 20) {
      throw ParameterError("extraction tag width out of [1,20]: " +
                           std::string(text));
    }
    return value;
  };
  if (text.starts_with("spanBA")) return {Kind::span_ba, number("spanBA")};
  if (text.starts_with("surroundings")) {
    return {Kind::surroundings, number("surroundings")};
  }
  throw ParameterError("unknown extraction tag: " + std::string(text));
}

std::vector<ExtractionTag> ExtractionTag::all() {
  std::vector<ExtractionTag> tags;
  tags.push_back({Kind::original, 0});
  tags.push_back({Kind::span, 0});
  for (std::size_t i = 1; i <= 20; ++i) tags.push_back({Kind::span_ba, i});
  for (std::size_t j = 1; j <= 20; ++j) tags.push_back({Kind::surroundings, j});
  return tags;
}

std::string ExtractionTag::str() const {
  switch (kind) {
    case Kind::original:
      return "original";
    case Kind::span:
      return "span";
    case Kind::span_ba:
      return "spanBA" + std::to_string(width);
    case Kind::surroundings:
      return "surroundings" + std::to_string(width);
  }
  return "";
}

SubSentence extract(const TokenizedSentence& s, const ExtractionTag& tag) {
  switch (tag.kind) {
    case ExtractionTag::Kind::original:
      return SubSentence{s.id, "original", s.tokens, s.relation};
    case ExtractionTag::Kind::span:
      return extract_span(s);
    case ExtractionTag::Kind::span_ba:
      return extract_span_ba(s, tag.width);
    case ExtractionTag::Kind::surroundings:
      return extract_surroundings(s, tag.width);
  }
  throw ParameterError("unhandled extraction tag");
}

void write_sub_sentences(const std::vector<SubSentence>& subs,
                         std::ostream& out) {
  for (const auto& sub : subs) {
    json rec;
    rec["id"] = sub.source_id + "|" + sub.method;
    rec["source_id"] = sub.source_id;
    rec["method"] = sub.method;
    rec["tokens"] = sub.tokens;
    rec["relation"] = sub.relation;
    out << rec.dump() << "\n";
  }
}

}  // namespace embspace::corpus
