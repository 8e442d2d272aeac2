#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <string_view>
#include <utility>

// English Snowball (Porter2) stemmer over lowercase ASCII words.

namespace logmaint::porter2 {

namespace detail {

inline bool is_vowel(char c) noexcept {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

inline bool ends_with(std::string_view w, std::string_view suffix) noexcept {
  return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

/// Longest entry of `suffixes` that ends `w`, or an empty view.
template <std::size_t N>
std::string_view longest_suffix(std::string_view w, const std::array<std::string_view, N>& suffixes) {
  std::string_view best;
  for (auto s : suffixes)
    if (s.size() > best.size() && ends_with(w, s)) best = s;
  return best;
}

/// Position just after the first non-vowel that follows a vowel, at or after `from`.
inline std::size_t region_after(std::string_view w, std::size_t from) {
  for (std::size_t i = std::max<std::size_t>(from, 1); i < w.size(); ++i)
    if (!is_vowel(w[i]) && is_vowel(w[i - 1])) return i + 1;
  return w.size();
}

inline bool short_syllable_at_end(std::string_view w) {
  const std::size_t n = w.size();
  if (n == 2) return is_vowel(w[0]) && !is_vowel(w[1]);
  if (n >= 3) {
    const char c = w[n - 1];
    return !is_vowel(w[n - 3]) && is_vowel(w[n - 2]) && !is_vowel(c) && c != 'w' && c != 'x' && c != 'Y';
  }
  return false;
}

inline bool is_double(std::string_view w) {
  if (w.size() < 2) return false;
  const char c = w.back();
  return c == w[w.size() - 2] &&
         (c == 'b' || c == 'd' || c == 'f' || c == 'g' || c == 'm' || c == 'n' || c == 'p' || c == 'r' || c == 't');
}

inline bool valid_li(char c) {
  return c == 'c' || c == 'd' || c == 'e' || c == 'g' || c == 'h' || c == 'k' || c == 'm' || c == 'n' || c == 'r' ||
         c == 't';
}

inline bool contains_vowel(std::string_view w) { return std::any_of(w.begin(), w.end(), is_vowel); }

inline void replace_suffix(std::string& w, std::size_t suffix_len, std::string_view with) {
  w.resize(w.size() - suffix_len);
  w += with;
}

class Stemmer {
 public:
  explicit Stemmer(std::string word) : w_(std::move(word)) {}

  std::string run() {
    if (auto ex = exceptional(w_)) return std::string(*ex);
    if (w_.size() < 3) return w_;

    if (w_.front() == '\'') w_.erase(0, 1);
    mark_y();
    mark_regions();

    step1a();
    step1b();
    step1c();
    step2();
    step3();
    step4();
    step5();
    std::replace(w_.begin(), w_.end(), 'Y', 'y');
    return w_;
  }

 private:
  std::string w_;
  std::size_t r1_ = 0;
  std::size_t r2_ = 0;

  static const std::string_view* exceptional(std::string_view w) {
    static constexpr std::array<std::pair<std::string_view, std::string_view>, 15> table{{
        {"skis", "ski"},    {"skies", "sky"},   {"idly", "idl"},     {"gently", "gentl"}, {"ugly", "ugli"},
        {"early", "earli"}, {"only", "onli"},   {"singly", "singl"}, {"sky", "sky"},      {"news", "news"},
        {"howe", "howe"},   {"atlas", "atlas"}, {"cosmos", "cosmos"}, {"bias", "bias"},   {"andes", "andes"},
    }};
    for (const auto& [from, to] : table)
      if (w == from) return &to;
    return nullptr;
  }

  void mark_y() {
    if (w_.empty()) return;
    if (w_[0] == 'y') w_[0] = 'Y';
    for (std::size_t i = 1; i < w_.size(); ++i)
      if (w_[i] == 'y' && is_vowel(w_[i - 1])) w_[i] = 'Y';
  }

  void mark_regions() {
    static constexpr std::array<std::string_view, 9> prefixes{"arsen", "commun", "emerg",   "gener", "inter",
                                                              "later", "organ",  "univers", "past"};
    r1_ = w_.size();
    bool special = false;
    for (auto p : prefixes) {
      if (std::string_view(w_).substr(0, p.size()) == p) {
        r1_ = p.size();
        special = true;
        break;
      }
    }
    if (!special) r1_ = region_after(w_, 1);
    r2_ = r1_ >= w_.size() ? w_.size() : region_after(w_, r1_ + 1);
  }

  bool in_r1(std::size_t suffix_len) const { return w_.size() >= suffix_len && w_.size() - suffix_len >= r1_; }
  bool in_r2(std::size_t suffix_len) const { return w_.size() >= suffix_len && w_.size() - suffix_len >= r2_; }

  /// Short syllable at the end of w_[0, end), or a stem ending in "past".
  bool ends_short(std::size_t end) const {
    const std::string_view w = std::string_view(w_).substr(0, end);
    return short_syllable_at_end(w) || ends_with(w, "past");
  }

  std::string_view before(std::size_t suffix_len) const {
    return std::string_view(w_).substr(0, w_.size() - suffix_len);
  }

  void step1a() {
    static constexpr std::array<std::string_view, 3> apostrophe{"'s'", "'s", "'"};
    if (auto s = longest_suffix(w_, apostrophe); !s.empty()) replace_suffix(w_, s.size(), "");

    static constexpr std::array<std::string_view, 6> sfx{"sses", "ied", "ies", "us", "ss", "s"};
    const auto s = longest_suffix(w_, sfx);
    if (s == "sses") {
      replace_suffix(w_, 4, "ss");
    } else if (s == "ied" || s == "ies") {
      replace_suffix(w_, 3, w_.size() > 4 ? "i" : "ie");
    } else if (s == "s") {
      // Delete if a vowel occurs before the letter immediately preceding the s.
      if (w_.size() >= 3 && contains_vowel(before(2))) w_.pop_back();
    }
  }

  void step1b() {
    static constexpr std::array<std::string_view, 6> sfx{"eed", "eedly", "ed", "edly", "ing", "ingly"};
    const auto s = longest_suffix(w_, sfx);
    if (s.empty()) return;
    if (s == "eed" || s == "eedly") {
      const auto stem = before(s.size());
      if (in_r1(s.size()) && stem != "succ" && stem != "proc" && stem != "exc") replace_suffix(w_, s.size(), "ee");
      return;
    }
    if (s == "ing") {
      const auto stem = before(3);
      // dying -> die, but not when a vowel precedes the y.
      if (stem.size() == 2 && stem[1] == 'y' && !is_vowel(stem[0])) {
        replace_suffix(w_, 4, "ie");
        return;
      }
      if (stem == "inn" || stem == "out" || stem == "cann" || stem == "herr" || stem == "earr" || stem == "even")
        return;
    }
    if (!contains_vowel(before(s.size()))) return;
    replace_suffix(w_, s.size(), "");
    if (ends_with(w_, "at") || ends_with(w_, "bl") || ends_with(w_, "iz")) {
      w_ += 'e';
    } else if (is_double(w_)) {
      // A single leading a/e/o keeps its double (adding -> add).
      if (!(w_.size() == 3 && (w_[0] == 'a' || w_[0] == 'e' || w_[0] == 'o'))) w_.pop_back();
    } else if (r1_ == w_.size() && ends_short(w_.size())) {
      w_ += 'e';
    }
  }

  void step1c() {
    const std::size_t n = w_.size();
    if (n > 2 && (w_[n - 1] == 'y' || w_[n - 1] == 'Y') && !is_vowel(w_[n - 2])) w_[n - 1] = 'i';
  }

  void step2() {
    static constexpr std::array<std::pair<std::string_view, std::string_view>, 25> rules{{
        {"tional", "tion"}, {"enci", "ence"},    {"anci", "ance"},   {"abli", "able"},   {"entli", "ent"},
        {"izer", "ize"},    {"ization", "ize"},  {"ational", "ate"}, {"ation", "ate"},   {"ator", "ate"},
        {"alism", "al"},    {"aliti", "al"},     {"alli", "al"},     {"fulness", "ful"}, {"ousli", "ous"},
        {"ousness", "ous"}, {"iveness", "ive"},  {"iviti", "ive"},   {"biliti", "ble"},  {"bli", "ble"},
        {"ogi", "og"},      {"fulli", "ful"},    {"lessli", "less"}, {"li", ""},         {"ogist", "og"},
    }};
    const auto* rule = longest_rule(rules);
    if (!rule || !in_r1(rule->first.size())) return;
    const std::size_t len = rule->first.size();
    if (rule->first == "ogi") {
      if (w_.size() > 3 && w_[w_.size() - 4] == 'l') replace_suffix(w_, len, "og");
    } else if (rule->first == "li") {
      if (w_.size() > 2 && valid_li(w_[w_.size() - 3])) replace_suffix(w_, len, "");
    } else {
      replace_suffix(w_, len, rule->second);
    }
  }

  void step3() {
    static constexpr std::array<std::pair<std::string_view, std::string_view>, 9> rules{{
        {"tional", "tion"},
        {"ational", "ate"},
        {"alize", "al"},
        {"icate", "ic"},
        {"iciti", "ic"},
        {"ical", "ic"},
        {"ful", ""},
        {"ness", ""},
        {"ative", ""},
    }};
    const auto* rule = longest_rule(rules);
    if (!rule || !in_r1(rule->first.size())) return;
    if (rule->first == "ative" && !in_r2(rule->first.size())) return;
    replace_suffix(w_, rule->first.size(), rule->second);
  }

  void step4() {
    static constexpr std::array<std::string_view, 18> sfx{"al",   "ance", "ence",  "er",   "ic",  "able",
                                                          "ible", "ant",  "ement", "ment", "ent", "ism",
                                                          "ate",  "iti",  "ous",   "ive",  "ize", "ion"};
    const auto s = longest_suffix(w_, sfx);
    if (s.empty() || !in_r2(s.size())) return;
    if (s == "ion") {
      const char prev = w_.size() > 3 ? w_[w_.size() - 4] : '\0';
      if (prev == 's' || prev == 't') replace_suffix(w_, 3, "");
      return;
    }
    replace_suffix(w_, s.size(), "");
  }

  void step5() {
    if (w_.empty()) return;
    if (w_.back() == 'e') {
      if (in_r2(1) || (in_r1(1) && !ends_short(w_.size() - 1))) w_.pop_back();
    } else if (w_.back() == 'l') {
      if (in_r2(1) && w_.size() >= 2 && w_[w_.size() - 2] == 'l') w_.pop_back();
    }
  }

  template <std::size_t N>
  const std::pair<std::string_view, std::string_view>* longest_rule(
      const std::array<std::pair<std::string_view, std::string_view>, N>& rules) const {
    const std::pair<std::string_view, std::string_view>* best = nullptr;
    for (const auto& r : rules)
      if ((!best || r.first.size() > best->first.size()) && ends_with(w_, r.first)) best = &r;
    return best;
  }
};

}  // namespace detail

/// Stems a lowercase word. Words shorter than three letters are returned unchanged.
inline std::string stem(std::string_view word) { return detail::Stemmer(std::string(word)).run(); }

}  // namespace logmaint::porter2
