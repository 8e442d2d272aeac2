#pragma once

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "logmaint/detail/csv.hpp"
#include "logmaint/detail/strings.hpp"
#include "logmaint/error.hpp"

namespace logmaint {

// ---------------------------------------------------------------------------
// Logbook corpus

/// Which record text feeds the pipeline.
enum class TextField { issue, action, both };

inline std::string_view to_string(TextField f) {
  switch (f) {
    case TextField::issue: return "issue";
    case TextField::action: return "action";
    case TextField::both: return "both";
  }
  return "both";
}

inline TextField parse_text_field(std::string_view s) {
  if (s == "issue") return TextField::issue;
  if (s == "action") return TextField::action;
  if (s == "both") return TextField::both;
  throw Error("unknown text field '" + std::string(s) + "' (expected issue|action|both)");
}

/// One logbook entry.
struct Record {
  std::string id;
  std::string issue_text;
  std::optional<std::string> date;  // ISO-8601 YYYY-MM-DD
  std::optional<std::string> action_text;

  std::string text(TextField field) const {
    switch (field) {
      case TextField::issue: return issue_text;
      case TextField::action: return action_text.value_or("");
      case TextField::both:
        if (action_text && !action_text->empty()) return issue_text + " " + *action_text;
        return issue_text;
    }
    return issue_text;
  }

  bool operator==(const Record&) const = default;
};

struct Corpus {
  std::vector<Record> records;  // load order, never reordered
  TextField text_field = TextField::both;
  std::size_t skipped_rows = 0;  // rows dropped for empty issue text

  std::size_t size() const noexcept { return records.size(); }
  std::string text(std::size_t i) const { return records.at(i).text(text_field); }

  bool operator==(const Corpus&) const = default;
};

/// Header names of the corpus columns. Date and action are optional.
struct ColumnMapping {
  std::string id = "ID";
  std::string issue = "Issue/Problem";
  std::optional<std::string> date = "Date";
  std::optional<std::string> action = "Action";
};

namespace detail {

inline bool valid_ymd(int y, int m, int d) {
  if (y < 1 || m < 1 || m > 12 || d < 1) return false;
  static constexpr int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  return d <= days[m - 1] + (m == 2 && leap ? 1 : 0);
}

inline bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

/// Accepts YYYY-MM-DD and the US logbook form M/D/YYYY; returns YYYY-MM-DD.
inline std::optional<std::string> normalize_date(std::string_view s) {
  int y = 0, m = 0, d = 0;
  const auto iso = split(s, '-');
  const auto us = split(s, '/');
  if (iso.size() == 3 && iso[0].size() == 4 && iso[1].size() == 2 && iso[2].size() == 2 && all_digits(iso[0]) &&
      all_digits(iso[1]) && all_digits(iso[2])) {
    y = std::stoi(std::string(iso[0]));
    m = std::stoi(std::string(iso[1]));
    d = std::stoi(std::string(iso[2]));
  } else if (us.size() == 3 && us[0].size() <= 2 && us[1].size() <= 2 && us[2].size() == 4 && all_digits(us[0]) &&
             all_digits(us[1]) && all_digits(us[2])) {
    m = std::stoi(std::string(us[0]));
    d = std::stoi(std::string(us[1]));
    y = std::stoi(std::string(us[2]));
  } else {
    return std::nullopt;
  }
  if (!valid_ymd(y, m, d)) return std::nullopt;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
  return std::string(buf);
}

}  // namespace detail

/// Parses a CSV logbook into a Corpus. Rows with blank issue text are skipped
/// and counted; duplicate ids and a corpus with no usable rows are errors.
inline Corpus parse_corpus(std::string_view text, const std::string& path, const ColumnMapping& mapping,
                           TextField text_field) {
  const auto rows = detail::parse_csv(text, path);
  if (rows.empty()) throw Error(path + ": missing header row");
  const auto& header = rows.front().fields;

  const auto column = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (detail::trim(header[i]) == name) return i;
    throw Error(path + ": missing mapped column '" + name + "'");
  };
  const std::size_t id_col = column(mapping.id);
  const std::size_t issue_col = column(mapping.issue);
  const std::optional<std::size_t> date_col =
      mapping.date ? std::optional<std::size_t>(column(*mapping.date)) : std::nullopt;
  const std::optional<std::size_t> action_col =
      mapping.action ? std::optional<std::size_t>(column(*mapping.action)) : std::nullopt;

  Corpus corpus;
  corpus.text_field = text_field;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const auto cell = [&](std::size_t col) -> std::string {
      return col < row.fields.size() ? std::string(detail::trim(row.fields[col])) : std::string{};
    };
    Record rec;
    rec.id = cell(id_col);
    rec.issue_text = cell(issue_col);
    if (rec.issue_text.empty()) {
      ++corpus.skipped_rows;
      continue;
    }
    if (rec.id.empty()) throw ParseError(path, row.line, "empty record id");
    if (auto [it, inserted] = seen.emplace(rec.id, row.line); !inserted)
      throw ParseError(path, row.line,
                       "duplicate record id " + rec.id + " (first seen on line " + std::to_string(it->second) + ")");
    if (date_col) {
      const auto raw = cell(*date_col);
      if (!raw.empty()) {
        rec.date = detail::normalize_date(raw);
        if (!rec.date) throw ParseError(path, row.line, "unparseable date '" + raw + "'");
      }
    }
    if (action_col) {
      auto action = cell(*action_col);
      if (!action.empty()) rec.action_text = std::move(action);
    }
    corpus.records.push_back(std::move(rec));
  }
  if (corpus.records.empty()) throw Error(path + ": zero usable rows");
  return corpus;
}

inline Corpus load_corpus(const std::string& path, const ColumnMapping& mapping = {},
                          TextField text_field = TextField::both) {
  return parse_corpus(detail::read_file(path), path, mapping, text_field);
}

/// Canonical CSV rendering (ID,Issue/Problem,Date,Action); stable for equal corpora.
inline std::string serialize_corpus(const Corpus& corpus) {
  std::string out = "ID,Issue/Problem,Date,Action\n";
  for (const auto& r : corpus.records) {
    out += detail::csv_escape(r.id) + ',' + detail::csv_escape(r.issue_text) + ',' + r.date.value_or("") + ',' +
           detail::csv_escape(r.action_text.value_or("")) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Language resources

/// Closed part-of-speech tagset.
enum class Pos { noun, verb, adj, adv, other };

inline std::string_view to_string(Pos p) {
  switch (p) {
    case Pos::noun: return "NOUN";
    case Pos::verb: return "VERB";
    case Pos::adj: return "ADJ";
    case Pos::adv: return "ADV";
    case Pos::other: return "OTHER";
  }
  return "OTHER";
}

inline std::optional<Pos> parse_pos(std::string_view s) {
  const auto up = [&](std::string_view tag) {
    if (s.size() != tag.size()) return false;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (detail::ascii_lower(s[i]) != detail::ascii_lower(tag[i])) return false;
    return true;
  };
  for (Pos p : {Pos::noun, Pos::verb, Pos::adj, Pos::adv, Pos::other})
    if (up(to_string(p))) return p;
  return std::nullopt;
}

/// Exact-match map from abbreviation to (possibly multi-word) expansion.
struct AbbreviationDictionary {
  std::map<std::string, std::string, std::less<>> entries;

  bool operator==(const AbbreviationDictionary&) const = default;
};

struct LexiconEntry {
  Pos pos = Pos::noun;
  std::string lemma;
  std::string stem;
  bool is_exception = false;  // never lemmatize this token

  bool operator==(const LexiconEntry&) const = default;
};

struct MorphLexicon {
  std::map<std::string, LexiconEntry, std::less<>> entries;

  const LexiconEntry* find(std::string_view token) const {
    const auto it = entries.find(token);
    return it == entries.end() ? nullptr : &it->second;
  }

  bool operator==(const MorphLexicon&) const = default;
};

struct StopWordList {
  std::set<std::string, std::less<>> words;

  bool contains(std::string_view w) const { return words.find(w) != words.end(); }

  bool operator==(const StopWordList&) const = default;
};

struct TermEntry {
  std::string term;
  std::string sample_usage;

  bool operator==(const TermEntry&) const = default;
};

struct TermBank {
  std::vector<TermEntry> entries;

  bool operator==(const TermBank&) const = default;
};

struct ResourceBundle {
  AbbreviationDictionary abbreviations;
  MorphLexicon lexicon;
  StopWordList stopwords;
  TermBank termbank;

  bool operator==(const ResourceBundle&) const = default;
};

/// Any omitted path yields an empty resource.
struct ResourcePaths {
  std::optional<std::string> abbreviations;
  std::optional<std::string> lexicon;
  std::optional<std::string> stopwords;
  std::optional<std::string> termbank;
};

namespace detail {

/// Calls fn(line_no, fields) for every non-blank line split on tabs.
template <class Fn>
void for_each_tsv_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  for (auto line : lines(text)) {
    ++line_no;
    if (trim(line).empty()) continue;
    fn(line_no, split(line, '\t'));
  }
}

inline std::string checked_field(std::string_view raw, const std::string& path, std::size_t line,
                                 const char* what) {
  auto v = to_lower(trim(raw));
  if (v.empty()) throw ParseError(path, line, std::string("empty ") + what);
  return v;
}

inline bool has_whitespace(std::string_view s) {
  return s.find_first_of(" \t\r\n") != std::string_view::npos;
}

}  // namespace detail

inline AbbreviationDictionary parse_abbreviations(std::string_view text, const std::string& path) {
  AbbreviationDictionary dict;
  detail::for_each_tsv_line(text, [&](std::size_t ln, const std::vector<std::string_view>& f) {
    if (f.size() != 2) throw ParseError(path, ln, "expected 'abbreviation<TAB>expansion'");
    auto key = detail::checked_field(f[0], path, ln, "abbreviation");
    if (detail::has_whitespace(key)) throw ParseError(path, ln, "abbreviation contains whitespace");
    auto value = detail::join(detail::split_whitespace(detail::checked_field(f[1], path, ln, "expansion")), " ");
    if (!dict.entries.emplace(key, std::move(value)).second)
      throw ParseError(path, ln, "duplicate abbreviation '" + key + "'");
  });
  return dict;
}

inline MorphLexicon parse_lexicon(std::string_view text, const std::string& path) {
  MorphLexicon lex;
  detail::for_each_tsv_line(text, [&](std::size_t ln, const std::vector<std::string_view>& f) {
    if (f.size() != 5) throw ParseError(path, ln, "expected 'token<TAB>pos<TAB>lemma<TAB>stem<TAB>exception'");
    auto token = detail::checked_field(f[0], path, ln, "token");
    const auto pos = parse_pos(detail::trim(f[1]));
    if (!pos) throw ParseError(path, ln, "unknown POS tag '" + std::string(detail::trim(f[1])) + "'");
    LexiconEntry e;
    e.pos = *pos;
    e.lemma = detail::checked_field(f[2], path, ln, "lemma");
    e.stem = detail::checked_field(f[3], path, ln, "stem");
    const auto flag = detail::trim(f[4]);
    if (flag != "0" && flag != "1") throw ParseError(path, ln, "exception flag must be 0 or 1");
    e.is_exception = flag == "1";
    if (!lex.entries.emplace(token, std::move(e)).second)
      throw ParseError(path, ln, "duplicate lexicon token '" + token + "'");
  });
  return lex;
}

inline StopWordList parse_stopwords(std::string_view text, const std::string& path) {
  StopWordList list;
  std::size_t ln = 0;
  for (auto line : detail::lines(text)) {
    ++ln;
    const auto word = detail::trim(line);
    if (word.empty() || word.front() == '#') continue;
    if (detail::has_whitespace(word)) throw ParseError(path, ln, "stop word contains whitespace");
    if (!list.words.insert(detail::to_lower(word)).second)
      throw ParseError(path, ln, "duplicate stop word '" + detail::to_lower(word) + "'");
  }
  return list;
}

inline TermBank parse_termbank(std::string_view text, const std::string& path) {
  TermBank bank;
  std::set<std::string, std::less<>> seen;
  detail::for_each_tsv_line(text, [&](std::size_t ln, const std::vector<std::string_view>& f) {
    if (f.size() != 2) throw ParseError(path, ln, "expected 'term<TAB>sample_usage'");
    auto term = detail::join(detail::split_whitespace(detail::checked_field(f[0], path, ln, "term")), " ");
    if (!seen.insert(term).second) throw ParseError(path, ln, "duplicate term '" + term + "'");
    bank.entries.push_back({std::move(term), detail::to_lower(detail::trim(f[1]))});
  });
  return bank;
}

inline AbbreviationDictionary load_abbreviations(const std::string& path) {
  return parse_abbreviations(detail::read_file(path), path);
}
inline MorphLexicon load_lexicon(const std::string& path) { return parse_lexicon(detail::read_file(path), path); }
inline StopWordList load_stopwords(const std::string& path) {
  return parse_stopwords(detail::read_file(path), path);
}
inline TermBank load_termbank(const std::string& path) { return parse_termbank(detail::read_file(path), path); }

inline ResourceBundle load_resources(const ResourcePaths& paths) {
  ResourceBundle b;
  if (paths.abbreviations) b.abbreviations = load_abbreviations(*paths.abbreviations);
  if (paths.lexicon) b.lexicon = load_lexicon(*paths.lexicon);
  if (paths.stopwords) b.stopwords = load_stopwords(*paths.stopwords);
  if (paths.termbank) b.termbank = load_termbank(*paths.termbank);
  return b;
}

inline std::string serialize(const AbbreviationDictionary& d) {
  std::string out;
  for (const auto& [k, v] : d.entries) out += k + '\t' + v + '\n';
  return out;
}

inline std::string serialize(const MorphLexicon& lex) {
  std::string out;
  for (const auto& [token, e] : lex.entries)
    out += token + '\t' + std::string(to_string(e.pos)) + '\t' + e.lemma + '\t' + e.stem + '\t' +
           (e.is_exception ? "1" : "0") + '\n';
  return out;
}

inline std::string serialize(const StopWordList& s) {
  std::string out;
  for (const auto& w : s.words) out += w + '\n';
  return out;
}

inline std::string serialize(const TermBank& t) {
  std::string out;
  for (const auto& e : t.entries) out += e.term + '\t' + e.sample_usage + '\n';
  return out;
}

}  // namespace logmaint
