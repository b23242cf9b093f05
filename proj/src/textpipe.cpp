#include "lqa/textpipe.hpp"

#include <cctype>
#include <sstream>

#include "lqa/error.hpp"
#include "lqa/strings.hpp"

namespace lqa {

namespace {

constexpr std::pair<std::string_view, std::string_view> kLemmas[] = {
    {"am", "be"},         {"is", "be"},          {"are", "be"},         {"was", "be"},
    {"were", "be"},       {"been", "be"},        {"being", "be"},       {"has", "have"},
    {"had", "have"},      {"having", "have"},    {"does", "do"},        {"did", "do"},
    {"done", "do"},       {"doing", "do"},       {"made", "make"},      {"making", "make"},
    {"paid", "pay"},      {"given", "give"},     {"gave", "give"},      {"taken", "take"},
    {"took", "take"},     {"held", "hold"},      {"sold", "sell"},      {"bought", "buy"},
    {"lent", "lend"},     {"became", "become"},  {"died", "die"},       {"children", "child"},
    {"men", "man"},       {"women", "woman"},    {"persons", "person"},
    {"parties", "party"}, {"rights", "right"},   {"means", "means"},    {"ceases", "cease"},
    {"uses", "use"},      {"causes", "cause"},   {"cases", "case"},     {"purposes", "purpose"},
    {"houses", "house"},  {"leases", "lease"},   {"losses", "loss"},    {"premises", "premises"},
};

constexpr std::pair<std::string_view, std::string_view> kSuffixRules[] = {
    {"sses", "ss"}, {"ies", "y"}, {"ches", "ch"}, {"shes", "sh"}, {"xes", "x"},
    {"ss", "ss"},   {"us", "us"}, {"is", "is"},   {"s", ""},
};

constexpr std::string_view kStopwords[] = {
    "a",        "about",   "above",   "after",   "again",   "against", "all",    "also",
    "an",       "and",     "any",     "as",      "at",      "be",      "because", "before",
    "below",    "between", "both",    "but",     "by",      "can",     "could",  "do",
    "down",     "during",  "each",    "either",  "few",     "for",     "from",   "further",
    "have",     "he",      "her",     "here",    "herself", "him",     "himself", "his",
    "how",      "i",       "if",      "in",      "into",    "it",      "itself", "just",
    "may",      "me",      "might",   "more",    "most",    "must",    "my",     "myself",
    "no",       "nor",     "not",     "now",     "of",      "off",     "on",     "once",
    "only",     "or",      "other",   "our",     "ourselves", "out",   "over",   "own",
    "same",     "shall",   "she",     "should",  "so",      "some",    "such",   "than",
    "that",     "the",     "their",   "them",    "themselves", "then", "there",  "these",
    "they",     "this",    "those",   "through", "to",      "too",     "under",  "until",
    "up",       "upon",    "very",    "we",      "what",    "when",    "where",  "whether",
    "which",    "while",   "who",     "whom",    "why",     "will",    "with",   "would",
    "you",      "your",    "yourself", "one",    "its",     "hers",    "theirs", "ours",
};

}  // namespace

NormalizerConfig NormalizerConfig::english() {
  NormalizerConfig c;
  for (auto [w, l] : kLemmas) c.lemma_map.emplace(w, l);
  for (auto [s, r] : kSuffixRules) c.suffix_rules.push_back({std::string(s), std::string(r)});
  for (auto w : kStopwords) c.stopwords.emplace(w);
  return c;
}

std::unordered_map<std::string, std::string> load_lemma_map(const std::string& path) {
  std::unordered_map<std::string, std::string> out;
  const auto text = read_file(path);
  std::size_t line_no = 0;
  for (auto line : split_lines(text)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::istringstream in{std::string(line)};
    std::string word, lemma, extra;
    if (!(in >> word >> lemma) || (in >> extra)) {
      throw ParseError(path + ": expected 'word lemma'", line_no);
    }
    out[to_lower(word)] = to_lower(lemma);
  }
  return out;
}

std::unordered_set<std::string> load_stopwords(const std::string& path) {
  std::unordered_set<std::string> out;
  const auto text = read_file(path);
  for (auto line : split_lines(text)) {
    line = trim(line);
    if (!line.empty() && line.front() != '#') out.insert(to_lower(line));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c >= 0x80) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string normalize_word(std::string_view token, const NormalizerConfig& config) {
  std::string word(token);
  if (auto it = config.lemma_map.find(word); it != config.lemma_map.end()) return it->second;
  for (const auto& rule : config.suffix_rules) {
    if (!word.ends_with(rule.suffix)) continue;
    if (rule.replacement == rule.suffix) break;  // guard
    if (word.size() < rule.suffix.size() + config.min_stem) continue;
    word.replace(word.size() - rule.suffix.size(), rule.suffix.size(), rule.replacement);
    break;
  }
  return word;
}

std::vector<std::string> normalize(std::vector<std::string> tokens,
                                   const NormalizerConfig& config) {
  for (auto& t : tokens) t = normalize_word(t, config);
  return tokens;
}

TermSequence remove_stopwords(std::vector<std::string> lemmas, const NormalizerConfig& config) {
  std::erase_if(lemmas, [&](const std::string& t) {
    return t.empty() || config.stopwords.contains(t);
  });
  return lemmas;
}

TermSequence preprocess(std::string_view text, const NormalizerConfig& config) {
  return remove_stopwords(normalize(tokenize(text), config), config);
}

}  // namespace lqa
