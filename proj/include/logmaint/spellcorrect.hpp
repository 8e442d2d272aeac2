#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logmaint/corpus_io.hpp"
#include "logmaint/detail/strings.hpp"
#include "logmaint/error.hpp"

namespace logmaint {

/// Minimum number of single-character insertions, deletions and
/// substitutions turning `a` into `b`. Two-row dynamic program, O(|a||b|).
inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// Valid domain words with corpus frequencies used for tie-breaking.
struct DomainDictionary {
  std::set<std::string, std::less<>> words;
  std::map<std::string, std::size_t, std::less<>> frequency;  // every word has count >= 1

  void add(std::string_view word, std::size_t count = 1) {
    if (word.empty()) return;
    auto [it, inserted] = words.emplace(word);
    auto& f = frequency[*it];
    f += std::max<std::size_t>(count, 1);
  }

  bool contains(std::string_view w) const { return words.find(w) != words.end(); }

  std::size_t frequency_of(std::string_view w) const {
    const auto it = frequency.find(w);
    return it == frequency.end() ? 0 : it->second;
  }

  std::size_t size() const noexcept { return words.size(); }
};

/// `word` or `word<TAB>count` per line; blank lines and `#` comments ignored.
inline DomainDictionary parse_wordlist(std::string_view text, const std::string& path) {
  DomainDictionary dict;
  std::size_t ln = 0;
  for (auto line : detail::lines(text)) {
    ++ln;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = detail::split(t, '\t');
    if (f.size() > 2) throw ParseError(path, ln, "expected 'word' or 'word<TAB>count'");
    const auto word = detail::to_lower(detail::trim(f[0]));
    if (word.empty() || detail::has_whitespace(word)) throw ParseError(path, ln, "invalid word");
    std::size_t count = 1;
    if (f.size() == 2) {
      const auto c = detail::trim(f[1]);
      if (!detail::all_digits(c)) throw ParseError(path, ln, "count must be a positive integer");
      count = std::stoul(std::string(c));
      if (count == 0) throw ParseError(path, ln, "count must be a positive integer");
    }
    dict.add(word, count);
  }
  return dict;
}

inline DomainDictionary load_wordlist(const std::string& path) {
  return parse_wordlist(detail::read_file(path), path);
}

/// Lexicon tokens, every word of every term-bank term, and an optional
/// explicit word list, merged. Frequencies add up across sources.
inline DomainDictionary build_dictionary(const MorphLexicon& lexicon, const TermBank& termbank,
                                         const DomainDictionary& extra = {}) {
  DomainDictionary dict;
  for (const auto& [token, entry] : lexicon.entries) dict.add(token);
  for (const auto& e : termbank.entries)
    for (const auto& w : detail::split_whitespace(e.term)) dict.add(w);
  for (const auto& [w, c] : extra.frequency) dict.add(w, c);
  return dict;
}

enum class CorrectionSource { abbreviation, spelling, unchanged };

inline std::string_view to_string(CorrectionSource s) {
  switch (s) {
    case CorrectionSource::abbreviation: return "abbreviation";
    case CorrectionSource::spelling: return "spelling";
    case CorrectionSource::unchanged: return "unchanged";
  }
  return "unchanged";
}

struct Correction {
  std::string original;
  std::string replacement;
  std::size_t distance = 0;  // 0 for abbreviation hits and unchanged tokens
  CorrectionSource source = CorrectionSource::unchanged;
  bool unresolvable = false;  // nearest word was farther than the allowed distance

  bool operator==(const Correction&) const = default;
};

/// Exact lookup, never fuzzy.
inline std::optional<std::string> expand_abbreviation(std::string_view token, const AbbreviationDictionary& abbrevs) {
  const auto it = abbrevs.entries.find(token);
  if (it == abbrevs.entries.end()) return std::nullopt;
  return it->second;
}

/// Tokens this short are never spell-corrected.
inline constexpr std::size_t kMinCorrectableLength = 3;
inline constexpr std::size_t kDefaultMaxDistance = 2;

namespace detail {

inline bool all_letters(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

}  // namespace detail

/// Nearest dictionary word by edit distance. Ties go to the more frequent
/// word, then the lexicographically smaller one. Tokens shorter than three
/// letters or containing non-letters are left alone.
inline Correction correct_token(std::string_view token, const DomainDictionary& dict,
                                std::size_t max_distance = kDefaultMaxDistance) {
  if (max_distance < 1) throw Error("max_distance must be at least 1");
  Correction c{std::string(token), std::string(token), 0, CorrectionSource::unchanged, false};
  if (token.empty() || dict.contains(token)) return c;
  if (token.size() < kMinCorrectableLength || !detail::all_letters(token)) return c;

  const std::string* best = nullptr;
  std::size_t best_dist = 0;
  std::size_t best_freq = 0;
  for (const auto& w : dict.words) {
    const std::size_t len_gap = w.size() > token.size() ? w.size() - token.size() : token.size() - w.size();
    if (best && len_gap > best_dist) continue;
    const std::size_t d = levenshtein(token, w);
    const std::size_t f = dict.frequency_of(w);
    // dict.words iterates in lexicographic order, so strict comparisons keep the smallest word on full ties.
    if (!best || d < best_dist || (d == best_dist && f > best_freq)) {
      best = &w;
      best_dist = d;
      best_freq = f;
    }
  }
  if (!best || best_dist > max_distance) {
    c.unresolvable = true;
    return c;
  }
  c.replacement = *best;
  c.distance = best_dist;
  c.source = CorrectionSource::spelling;
  return c;
}

/// Abbreviation expansion first, spelling correction second.
inline Correction correct(std::string_view token, const AbbreviationDictionary& abbrevs, const DomainDictionary& dict,
                          std::size_t max_distance = kDefaultMaxDistance) {
  if (auto exp = expand_abbreviation(token, abbrevs))
    return Correction{std::string(token), std::move(*exp), 0, CorrectionSource::abbreviation, false};
  return correct_token(token, dict, max_distance);
}

// ---------------------------------------------------------------------------
// Corrector scoring

struct EvalPair {
  std::string nonstandard;
  std::string gold;
  std::optional<std::string> document;  // source document id, when known
};

struct CorrectorEvaluation {
  std::size_t total_documents = 0;      // distinct document ids among the pairs
  std::size_t total_unique_tokens = 0;  // distinct non-standard tokens
  std::size_t total_nonstandard = 0;    // pairs scored
  std::size_t corrected_correctly = 0;
  double success_rate = 0.0;  // corrected_correctly / total_nonstandard
};

using Corrector = std::function<std::string(std::string_view)>;

/// Applies `corrector` to every non-standard token; a pair succeeds when the
/// output equals the gold token.
inline CorrectorEvaluation evaluate_corrector(std::span<const EvalPair> pairs, const Corrector& corrector) {
  if (pairs.empty()) throw Error("evaluate_corrector: empty pair list");
  CorrectorEvaluation ev;
  std::set<std::string, std::less<>> tokens, docs;
  for (const auto& p : pairs) {
    tokens.insert(p.nonstandard);
    if (p.document) docs.insert(*p.document);
    if (corrector(p.nonstandard) == p.gold) ++ev.corrected_correctly;
  }
  ev.total_documents = docs.size();
  ev.total_unique_tokens = tokens.size();
  ev.total_nonstandard = pairs.size();
  ev.success_rate = static_cast<double>(ev.corrected_correctly) / static_cast<double>(ev.total_nonstandard);
  return ev;
}

/// `nonstandard<TAB>gold[<TAB>document_id]` per line.
inline std::vector<EvalPair> parse_eval_pairs(std::string_view text, const std::string& path) {
  std::vector<EvalPair> pairs;
  detail::for_each_tsv_line(text, [&](std::size_t ln, const std::vector<std::string_view>& f) {
    if (f.size() != 2 && f.size() != 3) throw ParseError(path, ln, "expected 'nonstandard<TAB>gold[<TAB>doc]'");
    EvalPair p{detail::checked_field(f[0], path, ln, "token"), detail::checked_field(f[1], path, ln, "gold token"),
               std::nullopt};
    if (f.size() == 3) p.document = std::string(detail::trim(f[2]));
    pairs.push_back(std::move(p));
  });
  return pairs;
}

}  // namespace logmaint
