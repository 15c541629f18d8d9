#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace embspace::corpus {

// Token span [start, end) inside a sentence.
struct MentionSpan {
  std::size_t start = 0;
  std::size_t end = 0;
};

// A labeled sentence with its two entity-mention anchors. Mentions are kept
// in textual order: mention1.start <= mention2.start.
struct TokenizedSentence {
  std::string id;
  std::vector<std::string> tokens;
  MentionSpan mention1;
  MentionSpan mention2;
  std::string relation;
};

struct SubSentence {
  std::string source_id;
  std::string method;  // span | spanBA<i> | surroundings<j> | original
  std::vector<std::string> tokens;
  std::string relation;
};

struct ParseIssue {
  std::size_t line = 0;
  std::string message;
};

struct ParseResult {
  std::vector<TokenizedSentence> sentences;
  std::vector<ParseIssue> issues;  // skipped lines, in input order
};

// Reads line-delimited records with fields `id`, `tokens`, `m1`, `m2`,
// `relation`. Malformed lines are collected as issues and skipped; with
// strict = true the first bad line raises ValidationError instead.
ParseResult parse_corpus(std::istream& in, bool strict = false);

// Lighter variant for sub-sentence and embedding-input files: only `id` and
// `tokens` are required, `relation` defaults to empty, mentions are ignored.
struct TokenRecord {
  std::string id;
  std::vector<std::string> tokens;
  std::string relation;
};
struct TokenRecordResult {
  std::vector<TokenRecord> records;
  std::vector<ParseIssue> issues;
};
TokenRecordResult parse_token_records(std::istream& in, bool strict = false);

// Tokens from the first mention through the second (covering interval when
// mentions nest).
SubSentence extract_span(const TokenizedSentence& s);

// Span widened by i tokens on each side, clamped at the sentence bounds.
// i must be in [1, 20].
SubSentence extract_span_ba(const TokenizedSentence& s, std::size_t i);

// Windows of j tokens around each mention, merged when they overlap or
// touch, concatenated in textual order. j must be in [1, 20].
SubSentence extract_surroundings(const TokenizedSentence& s, std::size_t j);

// One of the 42 extraction tags driven from configuration.
struct ExtractionTag {
  enum class Kind { original, span, span_ba, surroundings };
  Kind kind = Kind::original;
  std::size_t width = 0;  // i or j for the widened kinds

  static ExtractionTag parse(std::string_view text);  // throws ParameterError
  static std::vector<ExtractionTag> all();            // all 42, fixed order
  std::string str() const;
};

SubSentence extract(const TokenizedSentence& s, const ExtractionTag& tag);

void write_sub_sentences(const std::vector<SubSentence>& subs,
                         std::ostream& out);

}  // namespace embspace::corpus
