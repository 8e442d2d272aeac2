#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "logmaint/corpus_io.hpp"
#include "logmaint/detail/json_io.hpp"
#include "logmaint/detail/parallel.hpp"
#include "logmaint/detail/strings.hpp"
#include "logmaint/porter2.hpp"
#include "logmaint/spellcorrect.hpp"

namespace logmaint {

namespace detail {

inline bool is_token_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '/' || c == '#' || c == '\'' || c >= 0x80;
}

inline bool is_alnum_or_high(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c >= 0x80; }

inline bool is_vowel_letter(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

inline bool is_consonant_letter(char c) { return c >= 'a' && c <= 'z' && !is_vowel_letter(c); }

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace detail

/// Lowercases and splits on every character other than letters, digits and
/// the intra-token marks `/ # '`. Leading `/ '` and trailing `/ ' #` are
/// trimmed and tokens without a letter or digit are dropped, so "l/h" and
/// "#4" survive while a lone "#" does not. Bytes >= 0x80 are kept as letters.
inline std::vector<std::string> normalize_tokenize(std::string_view raw) {
  std::vector<std::string> tokens;
  std::string cur;
  const auto flush = [&] {
    std::size_t b = 0, e = cur.size();
    while (b < e && (cur[b] == '/' || cur[b] == '\'')) ++b;
    while (e > b && (cur[e - 1] == '/' || cur[e - 1] == '\'' || cur[e - 1] == '#')) --e;
    std::string_view tok(cur.data() + b, e - b);
    if (std::any_of(tok.begin(), tok.end(), [](char c) { return detail::is_alnum_or_high(static_cast<unsigned char>(c)); }))
      tokens.emplace_back(tok);
    cur.clear();
  };
  for (char ch : raw) {
    const char c = detail::ascii_lower(ch);
    if (detail::is_token_char(static_cast<unsigned char>(c))) {
      cur += c;
    } else if (!cur.empty()) {
      flush();
    }
  }
  if (!cur.empty()) flush();
  return tokens;
}

struct StopwordFilterResult {
  std::vector<std::string> tokens;
  std::size_t removed = 0;
};

inline StopwordFilterResult remove_stopwords(const std::vector<std::string>& tokens, const StopWordList& stopwords) {
  StopwordFilterResult r;
  r.tokens.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (stopwords.contains(t))
      ++r.removed;
    else
      r.tokens.push_back(t);
  }
  return r;
}

/// Porter2 stem, unless the lexicon supplies one.
inline std::string stem(std::string_view token, const MorphLexicon* lexicon = nullptr) {
  if (lexicon)
    if (const auto* e = lexicon->find(token)) return e->stem;
  return porter2::stem(token);
}

/// Lexicon POS when known; otherwise -ed/-ing suggest VERB, -ly ADV, and
/// everything else defaults to NOUN.
inline Pos tag_token(std::string_view token, const MorphLexicon& lexicon) {
  if (const auto* e = lexicon.find(token)) return e->pos;
  if ((detail::ends_with(token, "ing") && token.size() > 4) || (detail::ends_with(token, "ed") && token.size() > 3))
    return Pos::verb;
  if (detail::ends_with(token, "ly") && token.size() > 3) return Pos::adv;
  return Pos::noun;
}

inline std::vector<std::pair<std::string, Pos>> pos_tag(const std::vector<std::string>& tokens,
                                                        const MorphLexicon& lexicon) {
  std::vector<std::pair<std::string, Pos>> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.emplace_back(t, tag_token(t, lexicon));
  return out;
}

namespace detail {

inline std::string noun_lemma(std::string_view t) {
  const std::size_t n = t.size();
  if (n > 4 && ends_with(t, "ies")) return std::string(t.substr(0, n - 3)) + "y";
  if (ends_with(t, "sses") || ends_with(t, "shes") || ends_with(t, "ches") || ends_with(t, "xes") ||
      ends_with(t, "zes"))
    return std::string(t.substr(0, n - 2));
  if (ends_with(t, "ss") || ends_with(t, "us") || ends_with(t, "is")) return std::string(t);
  if (n > 3 && t.back() == 's') return std::string(t.substr(0, n - 1));
  return std::string(t);
}

/// Rebuilds a verb base from what is left after cutting -ed/-ing.
inline std::string restore_verb_base(std::string s) {
  const std::size_t n = s.size();
  const char last = s.back();
  // dy(ing) -> die
  if (n == 2 && last == 'y' && is_consonant_letter(s[0])) return s.substr(0, 1) + "ie";
  if (n >= 2 && last == s[n - 2] && is_consonant_letter(last)) {
    // stopp -> stop; install, miss, buzz, stuff and add keep their double.
    if (last == 'l' || last == 's' || last == 'z' || last == 'f' || (n == 3 && is_vowel_letter(s[0]))) return s;
    s.pop_back();
    return s;
  }
  const auto plus_e = [&] { return s + "e"; };
  if (n >= 4 && ends_with(s, "at") && is_consonant_letter(s[n - 3])) return plus_e();
  if (ends_with(s, "iz") || ends_with(s, "qu") || last == 'v') return plus_e();
  if (n >= 3 && last == 'l' && (s[n - 2] == 'b' || s[n - 2] == 'c' || s[n - 2] == 'd' || s[n - 2] == 'f' ||
                                s[n - 2] == 'g' || s[n - 2] == 'k' || s[n - 2] == 'p' || s[n - 2] == 't' ||
                                s[n - 2] == 'z'))
    return plus_e();
  if (last == 'c' && n >= 3) return plus_e();
  if (last == 'g' && n >= 3 && is_vowel_letter(s[n - 2])) return plus_e();
  if (last == 'z') return plus_e();
  if (s == "us" || ends_with(s, "aus") || ends_with(s, "eus")) return plus_e();
  if (n >= 3 && last == 's' && (s[n - 2] == 'a' || s[n - 2] == 'i' || s[n - 2] == 'o') &&
      is_consonant_letter(s[n - 3]))
    return plus_e();
  if (n >= 3 && last == 'r' && (s[n - 2] == 'a' || s[n - 2] == 'i' || s[n - 2] == 'u') &&
      (is_consonant_letter(s[n - 3]) || (n >= 4 && s[n - 3] == 'u' && s[n - 4] == 'q')))
    return plus_e();
  // Short consonant-vowel-consonant stems: hop -> hope, tak -> take.
  const bool cvc_tail = n >= 3 && is_consonant_letter(s[n - 3]) && is_vowel_letter(s[n - 2]) &&
                        is_consonant_letter(last) && last != 'w' && last != 'x' && last != 'y';
  if (cvc_tail && (n == 3 || (n == 4 && is_consonant_letter(s[0])))) return plus_e();
  return s;
}

inline bool viable_verb_stem(std::string_view s) {
  return s.size() >= 2 && std::any_of(s.begin(), s.end(), [](char c) { return is_vowel_letter(c) || c == 'y'; });
}

inline std::string verb_lemma(std::string_view t) {
  const std::size_t n = t.size();
  if (n > 4 && (ends_with(t, "ies") || ends_with(t, "ied"))) return std::string(t.substr(0, n - 3)) + "y";
  if (n == 4 && ends_with(t, "ied")) return std::string(t.substr(0, 3));
  if (ends_with(t, "sses") || ends_with(t, "shes") || ends_with(t, "ches") || ends_with(t, "xes") ||
      ends_with(t, "zes"))
    return std::string(t.substr(0, n - 2));
  if (ends_with(t, "eed")) return std::string(t);
  if (ends_with(t, "ed") && viable_verb_stem(t.substr(0, n - 2))) return restore_verb_base(std::string(t.substr(0, n - 2)));
  if (ends_with(t, "ing") && viable_verb_stem(t.substr(0, n - 3)))
    return restore_verb_base(std::string(t.substr(0, n - 3)));
  if (ends_with(t, "ss") || ends_with(t, "us") || ends_with(t, "is")) return std::string(t);
  if (n > 3 && t.back() == 's') return std::string(t.substr(0, n - 1));
  return std::string(t);
}

}  // namespace detail

/// Exception-flagged tokens are returned untouched for every POS, so "left"
/// never becomes "leave". Otherwise the lexicon lemma wins, then suffix rules
/// for verbs and nouns; other categories are identity.
inline std::string lemmatize(std::string_view token, Pos pos, const MorphLexicon& lexicon) {
  if (const auto* e = lexicon.find(token)) return e->is_exception ? std::string(token) : e->lemma;
  std::string lemma;
  switch (pos) {
    case Pos::verb: lemma = detail::verb_lemma(token); break;
    case Pos::noun: lemma = detail::noun_lemma(token); break;
    default: lemma = std::string(token);
  }
  return lemma.empty() ? std::string(token) : lemma;
}

// ---------------------------------------------------------------------------
// Corpus preprocessing

struct TokenAnnotation {
  std::string surface;    // token as produced by normalization
  std::string corrected;  // after abbreviation expansion / spelling correction
  CorrectionSource source = CorrectionSource::unchanged;
  Pos pos = Pos::noun;
  std::string lemma;
  std::string stem;

  bool operator==(const TokenAnnotation&) const = default;
};

struct ProcessedDocument {
  std::string record_id;
  std::vector<TokenAnnotation> tokens;
  std::size_t dropped_stopwords = 0;
  bool empty = false;  // nothing survived preprocessing; kept for row alignment

  bool operator==(const ProcessedDocument&) const = default;
};

/// Which annotation feeds term counting and string similarity.
enum class TokenField { lemma, stem, surface, corrected };

inline std::string_view to_string(TokenField f) {
  switch (f) {
    case TokenField::lemma: return "lemma";
    case TokenField::stem: return "stem";
    case TokenField::surface: return "surface";
    case TokenField::corrected: return "corrected";
  }
  return "lemma";
}

inline TokenField parse_token_field(std::string_view s) {
  if (s == "lemma") return TokenField::lemma;
  if (s == "stem") return TokenField::stem;
  if (s == "surface") return TokenField::surface;
  if (s == "corrected") return TokenField::corrected;
  throw Error("unknown token field '" + std::string(s) + "' (expected lemma|stem|surface|corrected)");
}

inline const std::string& field_of(const TokenAnnotation& t, TokenField f) {
  switch (f) {
    case TokenField::lemma: return t.lemma;
    case TokenField::stem: return t.stem;
    case TokenField::surface: return t.surface;
    case TokenField::corrected: return t.corrected;
  }
  return t.lemma;
}

inline std::vector<std::string> terms_of(const ProcessedDocument& doc, TokenField f) {
  std::vector<std::string> out;
  out.reserve(doc.tokens.size());
  for (const auto& t : doc.tokens) out.push_back(field_of(t, f));
  return out;
}

struct PreprocessOptions {
  std::size_t max_distance = kDefaultMaxDistance;
  bool correct_spelling = true;
  unsigned threads = 1;
};

/// Domain dictionary for a corpus: lexicon, term bank and extra words, with
/// each word's frequency raised by its occurrences in the corpus (after
/// normalization and abbreviation expansion).
inline DomainDictionary build_domain_dictionary(const Corpus& corpus, const ResourceBundle& resources,
                                                const DomainDictionary& extra = {}) {
  auto dict = build_dictionary(resources.lexicon, resources.termbank, extra);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (const auto& tok : normalize_tokenize(corpus.text(i))) {
      if (auto exp = expand_abbreviation(tok, resources.abbreviations)) {
        for (const auto& e : normalize_tokenize(*exp))
          if (dict.contains(e)) dict.add(e);
      } else if (dict.contains(tok)) {
        dict.add(tok);
      }
    }
  }
  return dict;
}

/// Runs normalize -> expand -> correct -> filter -> tag -> lemmatize -> stem on one text.
inline ProcessedDocument preprocess_text(std::string record_id, std::string_view text, const ResourceBundle& resources,
                                         const DomainDictionary& dictionary, const PreprocessOptions& options = {}) {
  ProcessedDocument doc;
  doc.record_id = std::move(record_id);
  std::vector<TokenAnnotation> staged;
  for (const auto& surface : normalize_tokenize(text)) {
    if (auto exp = expand_abbreviation(surface, resources.abbreviations)) {
      for (auto& part : normalize_tokenize(*exp))
        staged.push_back({surface, std::move(part), CorrectionSource::abbreviation, Pos::noun, {}, {}});
      continue;
    }
    TokenAnnotation a{surface, surface, CorrectionSource::unchanged, Pos::noun, {}, {}};
    if (options.correct_spelling) {
      auto c = correct_token(surface, dictionary, options.max_distance);
      a.corrected = std::move(c.replacement);
      a.source = c.source;
    }
    staged.push_back(std::move(a));
  }
  for (auto& a : staged) {
    if (resources.stopwords.contains(a.corrected)) {
      ++doc.dropped_stopwords;
      continue;
    }
    a.pos = tag_token(a.corrected, resources.lexicon);
    a.lemma = lemmatize(a.corrected, a.pos, resources.lexicon);
    a.stem = stem(a.corrected, &resources.lexicon);
    doc.tokens.push_back(std::move(a));
  }
  doc.empty = doc.tokens.empty();
  return doc;
}

/// One document per record, in corpus order regardless of thread count.
inline std::vector<ProcessedDocument> preprocess_corpus(const Corpus& corpus, const ResourceBundle& resources,
                                                        const DomainDictionary& dictionary,
                                                        const PreprocessOptions& options = {}) {
  std::vector<ProcessedDocument> docs(corpus.size());
  detail::parallel_for(corpus.size(), options.threads, [&](std::size_t i) {
    docs[i] = preprocess_text(corpus.records[i].id, corpus.text(i), resources, dictionary, options);
  });
  return docs;
}

inline std::vector<ProcessedDocument> preprocess_corpus(const Corpus& corpus, const ResourceBundle& resources,
                                                        const PreprocessOptions& options = {}) {
  return preprocess_corpus(corpus, resources, build_domain_dictionary(corpus, resources), options);
}

// ---------------------------------------------------------------------------
// JSON Lines: one object per document, keys in fixed order.

inline Json to_json(const ProcessedDocument& doc) {
  Json tokens = Json::array();
  for (const auto& t : doc.tokens) {
    Json j;
    j["surface"] = t.surface;
    j["corrected"] = t.corrected;
    j["source"] = std::string(to_string(t.source));
    j["pos"] = std::string(to_string(t.pos));
    j["lemma"] = t.lemma;
    j["stem"] = t.stem;
    tokens.push_back(std::move(j));
  }
  Json j;
  j["record_id"] = doc.record_id;
  j["tokens"] = std::move(tokens);
  j["dropped_stopwords"] = doc.dropped_stopwords;
  j["empty"] = doc.empty;
  return j;
}

inline std::string to_jsonl(const std::vector<ProcessedDocument>& docs) {
  std::string out;
  for (const auto& d : docs) {
    out += to_json_text(to_json(d));
    out += '\n';
  }
  return out;
}

namespace detail {

inline CorrectionSource parse_source(std::string_view s) {
  for (auto c : {CorrectionSource::abbreviation, CorrectionSource::spelling, CorrectionSource::unchanged})
    if (to_string(c) == s) return c;
  throw Error("unknown correction source '" + std::string(s) + "'");
}

}  // namespace detail

inline std::vector<ProcessedDocument> parse_jsonl(std::string_view text, const std::string& path) {
  std::vector<ProcessedDocument> docs;
  std::size_t ln = 0;
  for (auto line : detail::lines(text)) {
    ++ln;
    if (detail::trim(line).empty()) continue;
    try {
      const auto j = Json::parse(line);
      ProcessedDocument d;
      d.record_id = j.at("record_id").get<std::string>();
      d.dropped_stopwords = j.at("dropped_stopwords").get<std::size_t>();
      for (const auto& t : j.at("tokens")) {
        TokenAnnotation a;
        a.surface = t.at("surface").get<std::string>();
        a.corrected = t.at("corrected").get<std::string>();
        a.source = detail::parse_source(t.at("source").get<std::string>());
        const auto pos = parse_pos(t.at("pos").get<std::string>());
        if (!pos) throw Error("unknown POS tag");
        a.pos = *pos;
        a.lemma = t.at("lemma").get<std::string>();
        a.stem = t.at("stem").get<std::string>();
        d.tokens.push_back(std::move(a));
      }
      d.empty = d.tokens.empty();
      docs.push_back(std::move(d));
    } catch (const Json::exception& e) {
      throw ParseError(path, ln, e.what());
    } catch (const Error& e) {
      throw ParseError(path, ln, e.what());
    }
  }
  return docs;
}

inline std::vector<ProcessedDocument> load_jsonl(const std::string& path) {
  return parse_jsonl(detail::read_file(path), path);
}

}  // namespace logmaint
