#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace lqa {

/// Normalized terms of one text, stopwords removed.
using TermSequence = std::vector<std::string>;

struct SuffixRule {
  std::string suffix;
  std::string replacement;  // equal to suffix for a guard rule that stops matching
};

struct NormalizerConfig {
  std::unordered_map<std::string, std::string> lemma_map;
  std::vector<SuffixRule> suffix_rules;  // first match wins
  std::unordered_set<std::string> stopwords;
  /// A rule only fires when the word keeps at least this many characters
  /// in front of the suffix.
  std::size_t min_stem = 2;

  /// Built-in English lemma table, suffix rules and stopword list.
  static NormalizerConfig english();
};

/// Two whitespace-separated columns per line: word lemma.
std::unordered_map<std::string, std::string> load_lemma_map(const std::string& path);
/// One term per line; blank lines and lines starting with '#' ignored.
std::unordered_set<std::string> load_stopwords(const std::string& path);

/// Lowercased alphanumeric runs; everything else separates tokens.
/// Bytes >= 0x80 count as word characters so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);

std::string normalize_word(std::string_view token, const NormalizerConfig& config);
std::vector<std::string> normalize(std::vector<std::string> tokens, const NormalizerConfig& config);

TermSequence remove_stopwords(std::vector<std::string> lemmas, const NormalizerConfig& config);

/// tokenize, then normalize, then remove stopwords. Stopwords are matched
/// against lemmas, so inflected forms of function words are removed too.
TermSequence preprocess(std::string_view text, const NormalizerConfig& config);

}  // namespace lqa
