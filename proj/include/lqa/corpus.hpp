#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <span>
#include <vector>

namespace lqa {

/// A statute article as it appears in the civil-code file.
struct Article {
  std::string id;
  std::vector<std::string> paragraphs;  // empty for an empty article
  std::string raw_text;

  /// Paragraph texts joined by single spaces.
  std::string text() const;

  bool operator==(const Article&) const = default;
};

/// A retrieval document: one paragraph of an article, or a whole article
/// when splitting is disabled.
struct ParagraphUnit {
  std::string id;         // "233(2)", or the article id for single-paragraph articles
  std::string parent_id;  // source article id
  int index = 1;          // 1-based paragraph ordinal
  std::string text;

  bool operator==(const ParagraphUnit&) const = default;
};

enum class Label { Yes, No };

std::string_view to_string(Label label);
Label parse_label(std::string_view s);  // Y, N, YES, NO (any case)

struct QueryCase {
  std::string id;
  std::string question;
  std::vector<std::string> relevant_ids;  // sorted, unique article ids
  Label label = Label::No;
  std::string source;  // file stem the case came from, e.g. "H18"

  bool operator==(const QueryCase&) const = default;
};

struct SplitResult {
  std::vector<ParagraphUnit> units;
  std::vector<std::string> skipped_ids;  // empty articles
};

/// Parses the plain-text civil code. An "Article <id>" token at line start
/// opens an article; "(<n>)" at token start opens paragraph n. Lines that
/// are structural headings (Part/Chapter/Section/...) or whole-line
/// parenthesised captions are ignored.
/// Throws ParseError for a heading without an id and DataError for a
/// duplicate id.
std::vector<Article> parse_civil_code(std::string_view text);

/// One unit per paragraph; single-paragraph articles keep their id.
SplitResult split_articles(std::span<const Article> articles);

/// Non-splitting baseline: one unit per non-empty article, holding the
/// article's full text.
SplitResult whole_articles(std::span<const Article> articles);

/// Parses a query file: `pair` elements with `id` and `label` attributes,
/// a first child citing the relevant articles (see cited_articles) and a
/// second child holding the question. `source` is copied into every case.
std::vector<QueryCase> parse_query_file(std::string_view xml, std::string_view source = {});

/// Article ids mentioned as "Article <id>" in `text`, in order of first
/// appearance, without duplicates.
std::vector<std::string> find_article_references(std::string_view text);

/// Articles cited by a query's reference text: the ids of lines that start
/// with "Article <id>", or every mention when no line does.
std::vector<std::string> cited_articles(std::string_view text);

/// Articles keyed by id.
class ArticleIndex {
 public:
  ArticleIndex() = default;
  explicit ArticleIndex(std::span<const Article> articles);

  const Article* find(std::string_view id) const;
  std::size_t size() const noexcept { return articles_.size(); }

 private:
  std::map<std::string, Article, std::less<>> articles_;
};

/// Copy of `article` where each paragraph is extended with the full text
/// of every other article it cites. Depth 1: cited articles are not
/// expanded themselves. Ids missing from `corpus` are skipped with a
/// warning.
Article expand_references(const Article& article, const ArticleIndex& corpus);

/// Units plus the lookup tables that map gold article ids onto them.
class UnitIndex {
 public:
  UnitIndex() = default;
  explicit UnitIndex(SplitResult split);

  std::span<const ParagraphUnit> units() const noexcept { return units_; }
  std::span<const std::string> skipped_ids() const noexcept { return skipped_; }
  std::size_t size() const noexcept { return units_.size(); }
  const ParagraphUnit& operator[](std::size_t i) const { return units_[i]; }

  /// Positions of all units produced from article `parent_id`.
  std::span<const std::size_t> units_of(std::string_view parent_id) const;
  std::optional<std::size_t> position(std::string_view unit_id) const;
  bool is_skipped(std::string_view article_id) const;

  /// Text of paragraph `index` of article `parent_id`, if present.
  std::optional<std::string_view> lookup(std::string_view parent_id, int index) const;

  /// Positions of units belonging to any of `article_ids`; every unit of a
  /// relevant multi-paragraph article is relevant. Sorted ascending.
  std::vector<std::size_t> relevant_units(std::span<const std::string> article_ids) const;

 private:
  std::vector<ParagraphUnit> units_;
  std::vector<std::string> skipped_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_parent_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
};

}  // namespace lqa
