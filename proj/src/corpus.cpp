#include "lqa/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <spdlog/spdlog.h>

#include "lqa/error.hpp"
#include "lqa/strings.hpp"

namespace lqa {

namespace {

bool is_article_id(std::string_view tok) {
  // 233, 398-2, 398-22-3
  if (tok.empty() || !std::isdigit(static_cast<unsigned char>(tok.front()))) return false;
  bool prev_dash = false;
  for (char c : tok) {
    if (c == '-') {
      if (prev_dash) return false;
      prev_dash = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      prev_dash = false;
    } else {
      return false;
    }
  }
  return !prev_dash;
}

bool is_structural_heading(std::string_view line) {
  static constexpr std::string_view kHeads[] = {"Part ", "Chapter ", "Section ", "Subsection ",
                                                "Division ", "Book "};
  for (auto head : kHeads) {
    if (!line.starts_with(head)) continue;
    auto rest = trim(line.substr(head.size()));
    if (rest.empty()) return false;
    const char c = rest.front();
    return std::isdigit(static_cast<unsigned char>(c)) || c == 'I' || c == 'V' || c == 'X' ||
           c == 'L';
  }
  return false;
}

// "(Fundamental Principles)" on a line of its own.
bool is_caption(std::string_view line) {
  if (line.size() < 3 || line.front() != '(' || line.back() != ')') return false;
  auto inner = line.substr(1, line.size() - 2);
  if (inner.find_first_of("()") != std::string_view::npos) return false;
  return std::any_of(inner.begin(), inner.end(),
                     [](char c) { return std::isalpha(static_cast<unsigned char>(c)); }) &&
         !std::isdigit(static_cast<unsigned char>(inner.front()));
}

// Accumulates the body of one article and cuts it into paragraphs.
class ArticleBuilder {
 public:
  ArticleBuilder(std::string id, std::size_t line) : line_(line) { article_.id = std::move(id); }

  std::size_t line() const { return line_; }
  const std::string& id() const { return article_.id; }

  void add_raw_line(std::string_view line) {
    if (!article_.raw_text.empty()) article_.raw_text += '\n';
    article_.raw_text += line;
  }

  void add_body(std::string_view text) {
    std::size_t pos = 0;
    while (pos < text.size()) {
      const auto open = find_marker(text, pos);
      if (!open) {
        append(text.substr(pos));
        break;
      }
      append(text.substr(pos, open->begin - pos));
      if (accept(open->number)) {
        if (marker_seen_ || open->number != 1) flush();
        marker_seen_ = true;
        last_marker_ = open->number;
      } else {
        append(text.substr(open->begin, open->end - open->begin));
      }
      pos = open->end;
    }
    current_ += ' ';
  }

  Article finish() {
    flush();
    return std::move(article_);
  }

 private:
  struct Marker {
    std::size_t begin, end;
    int number;
  };

  static std::optional<Marker> find_marker(std::string_view text, std::size_t from) {
    for (std::size_t p = text.find('(', from); p != std::string_view::npos;
         p = text.find('(', p + 1)) {
      if (p > 0 && !std::isspace(static_cast<unsigned char>(text[p - 1]))) continue;
      std::size_t q = p + 1;
      while (q < text.size() && std::isdigit(static_cast<unsigned char>(text[q]))) ++q;
      if (q == p + 1 || q >= text.size() || text[q] != ')' || q - p > 4) continue;
      const std::size_t end = q + 1;
      if (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) continue;
      return Marker{p, end, std::stoi(std::string(text.substr(p + 1, q - p - 1)))};
    }
    return std::nullopt;
  }

  // Markers must count up from 1. A leading unmarked paragraph followed by
  // "(2)" is treated as an implicit paragraph 1.
  bool accept(int n) const {
    if (marker_seen_) return n == last_marker_ + 1;
    if (n == 1) return true;
    return n == 2 && !trim(current_).empty();
  }

  void append(std::string_view s) { current_ += s; }

  void flush() {
    auto text = collapse_whitespace(current_);
    current_.clear();
    if (!text.empty()) article_.paragraphs.push_back(std::move(text));
  }

  Article article_;
  std::string current_;
  std::size_t line_;
  bool marker_seen_ = false;
  int last_marker_ = 0;
};

}  // namespace

std::string Article::text() const {
  std::string out;
  for (const auto& p : paragraphs) {
    if (!out.empty()) out += ' ';
    out += p;
  }
  return out;
}

std::string_view to_string(Label label) { return label == Label::Yes ? "YES" : "NO"; }

Label parse_label(std::string_view s) {
  const auto up = to_upper(trim(s));
  if (up == "Y" || up == "YES") return Label::Yes;
  if (up == "N" || up == "NO") return Label::No;
  throw DataError("invalid label '" + std::string(s) + "'");
}

std::vector<Article> parse_civil_code(std::string_view text) {
  std::vector<Article> out;
  std::set<std::string, std::less<>> seen;
  std::optional<ArticleBuilder> current;

  auto finish = [&] {
    if (!current) return;
    if (!seen.insert(current->id()).second) {
      throw DataError("duplicate article id '" + current->id() + "' (line " +
                      std::to_string(current->line()) + ")");
    }
    out.push_back(current->finish());
    current.reset();
  };

  std::size_t line_no = 0;
  for (std::string_view raw : split_lines(text)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;

    if (first_token(line) == "Article") {
      auto rest = trim(line.substr(7));
      const auto id = first_token(rest);
      if (!is_article_id(id)) throw ParseError("article heading without an id", line_no);
      finish();
      current.emplace(std::string(id), line_no);
      current->add_raw_line(line);
      current->add_body(trim(rest.substr(id.size())));
      continue;
    }
    if (is_structural_heading(line) || is_caption(line)) continue;
    if (!current) continue;  // preamble before the first article
    current->add_raw_line(line);
    current->add_body(line);
  }
  finish();
  return out;
}

SplitResult split_articles(std::span<const Article> articles) {
  SplitResult out;
  for (const auto& a : articles) {
    if (a.paragraphs.empty()) {
      out.skipped_ids.push_back(a.id);
      continue;
    }
    if (a.paragraphs.size() == 1) {
      out.units.push_back({a.id, a.id, 1, a.paragraphs.front()});
      continue;
    }
    for (std::size_t i = 0; i < a.paragraphs.size(); ++i) {
      const int index = static_cast<int>(i + 1);
      out.units.push_back(
          {a.id + "(" + std::to_string(index) + ")", a.id, index, a.paragraphs[i]});
    }
  }
  return out;
}

SplitResult whole_articles(std::span<const Article> articles) {
  SplitResult out;
  for (const auto& a : articles) {
    if (a.paragraphs.empty()) {
      out.skipped_ids.push_back(a.id);
    } else {
      out.units.push_back({a.id, a.id, 1, a.text()});
    }
  }
  return out;
}

std::vector<std::string> find_article_references(std::string_view text) {
  static const std::regex kRef(R"(\bArticle\s+([0-9]+(?:-[0-9]+)*))");
  std::vector<std::string> out;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kRef); it != std::sregex_iterator();
       ++it) {
    auto id = (*it)[1].str();
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(std::move(id));
  }
  return out;
}

std::vector<std::string> cited_articles(std::string_view text) {
  std::vector<std::string> headed;
  for (const auto& line : split_lines(text)) {
    const auto t = trim(line);
    if (!t.starts_with("Article")) continue;
    const auto refs = find_article_references(t);
    if (!refs.empty() && t.find(refs.front()) < t.find_first_of(".,;")) {
      if (std::find(headed.begin(), headed.end(), refs.front()) == headed.end()) {
        headed.push_back(refs.front());
      }
    }
  }
  return headed.empty() ? find_article_references(text) : headed;
}

std::vector<QueryCase> parse_query_file(std::string_view xml, std::string_view source) {
  namespace pt = boost::property_tree;
  if (trim(xml).empty()) return {};

  pt::ptree tree;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, tree, pt::xml_parser::no_comments);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError("unreadable XML: " + e.message(), e.line());
  }

  std::vector<QueryCase> out;
  auto visit = [&](auto&& self, const pt::ptree& node) -> void {
    for (const auto& [name, child] : node) {
      if (name != "pair") {
        if (name != "<xmlattr>") self(self, child);
        continue;
      }
      const auto id = child.template get_optional<std::string>("<xmlattr>.id");
      if (!id || trim(*id).empty()) throw DataError("pair element without an id");
      const auto label = child.template get_optional<std::string>("<xmlattr>.label");
      if (!label || trim(*label).empty()) throw DataError("pair '" + *id + "' has no label");

      std::vector<const pt::ptree*> texts;
      for (const auto& [cname, c] : child) {
        if (cname != "<xmlattr>" && cname != "<xmlcomment>") texts.push_back(&c);
      }
      if (texts.size() < 2 || trim(texts[1]->data()).empty()) {
        throw DataError("pair '" + *id + "' has no question");
      }

      QueryCase qc;
      qc.id = std::string(trim(*id));
      try {
        qc.label = parse_label(*label);
      } catch (const DataError& e) {
        throw DataError("pair '" + qc.id + "': " + e.what());
      }
      qc.question = collapse_whitespace(texts[1]->data());
      qc.relevant_ids = cited_articles(texts[0]->data());
      std::sort(qc.relevant_ids.begin(), qc.relevant_ids.end());
      qc.source = std::string(source);
      out.push_back(std::move(qc));
    }
  };
  visit(visit, tree);
  return out;
}

ArticleIndex::ArticleIndex(std::span<const Article> articles) {
  for (const auto& a : articles) articles_.emplace(a.id, a);
}

const Article* ArticleIndex::find(std::string_view id) const {
  auto it = articles_.find(id);
  return it == articles_.end() ? nullptr : &it->second;
}

Article expand_references(const Article& article, const ArticleIndex& corpus) {
  Article out = article;
  for (auto& paragraph : out.paragraphs) {
    std::string extra;
    for (const auto& ref : find_article_references(paragraph)) {
      if (ref == article.id) continue;
      const Article* target = corpus.find(ref);
      if (!target) {
        spdlog::warn("article {} cites unknown article {}; reference skipped", article.id, ref);
        continue;
      }
      const auto text = target->text();
      if (!text.empty()) extra += ' ' + text;
    }
    paragraph += extra;
  }
  return out;
}

UnitIndex::UnitIndex(SplitResult split)
    : units_(std::move(split.units)), skipped_(std::move(split.skipped_ids)) {
  for (std::size_t i = 0; i < units_.size(); ++i) {
    by_parent_[units_[i].parent_id].push_back(i);
    if (!by_id_.emplace(units_[i].id, i).second) {
      throw DataError("duplicate unit id '" + units_[i].id + "'");
    }
  }
  std::sort(skipped_.begin(), skipped_.end());
}

std::span<const std::size_t> UnitIndex::units_of(std::string_view parent_id) const {
  auto it = by_parent_.find(parent_id);
  if (it == by_parent_.end()) return {};
  return it->second;
}

std::optional<std::size_t> UnitIndex::position(std::string_view unit_id) const {
  auto it = by_id_.find(unit_id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

bool UnitIndex::is_skipped(std::string_view article_id) const {
  return std::binary_search(skipped_.begin(), skipped_.end(), article_id);
}

std::optional<std::string_view> UnitIndex::lookup(std::string_view parent_id, int index) const {
  for (auto i : units_of(parent_id)) {
    if (units_[i].index == index) return std::string_view(units_[i].text);
  }
  return std::nullopt;
}

std::vector<std::size_t> UnitIndex::relevant_units(std::span<const std::string> article_ids) const {
  std::vector<std::size_t> out;
  for (const auto& id : article_ids) {
    auto units = units_of(id);
    out.insert(out.end(), units.begin(), units.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace lqa
