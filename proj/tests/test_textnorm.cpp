#include <gtest/gtest.h>

#include <fstream>

#include "logmaint/corpus_io.hpp"
#include "logmaint/porter2.hpp"
#include "logmaint/textnorm.hpp"
#include "test_support.hpp"

using namespace logmaint;
using Tokens = std::vector<std::string>;

namespace {

const std::string kData = LOGMAINT_DATA_DIR;

ResourceBundle bundled() {
  const auto r = [](const char* n) { return kData + "/resources/" + n; };
  return load_resources({r("abbrev.tsv"), r("lexicon.tsv"), r("stopwords.txt"), r("termbank.tsv")});
}

StopWordList stoplist(std::initializer_list<const char*> words) {
  StopWordList s;
  for (auto w : words) s.words.insert(w);
  return s;
}

}  // namespace

TEST(NormalizeTokenize, LogbookRecord) {
  EXPECT_EQ(normalize_tokenize("CAP SCREWE MISSING, L/H ENG #4 BAFLE"),
            (Tokens{"cap", "screwe", "missing", "l/h", "eng", "#4", "bafle"}));
}

TEST(NormalizeTokenize, EmptyAndSeparatorRuns) {
  EXPECT_TRUE(normalize_tokenize("").empty());
  EXPECT_EQ(normalize_tokenize("A--B  c"), (Tokens{"a", "b", "c"}));
}

TEST(NormalizeTokenize, IntraTokenCharactersSurviveEdgesDoNot) {
  EXPECT_EQ(normalize_tokenize("R/H FWD BAF SEEAL."), (Tokens{"r/h", "fwd", "baf", "seeal"}));
  EXPECT_EQ(normalize_tokenize("#3 PUSH ROD @ EGNINE"), (Tokens{"#3", "push", "rod", "egnine"}));
  EXPECT_EQ(normalize_tokenize("'quoted' /slash/ # & pilot's"), (Tokens{"quoted", "slash", "pilot's"}));
  EXPECT_EQ(normalize_tokenize("P/N 123-456"), (Tokens{"p/n", "123", "456"}));
}

TEST(NormalizeTokenize, PropertiesOnRandomText) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const auto raw = gen::random_string(rng, 30, "aZ9 /#'.,-&@\t");
    for (const auto& t : normalize_tokenize(raw)) {
      ASSERT_FALSE(t.empty());
      for (char c : t) {
        ASSERT_FALSE(c >= 'A' && c <= 'Z') << raw;
        ASSERT_TRUE((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '/' || c == '#' || c == '\'') << raw;
      }
    }
  }
}

TEST(RemoveStopwords, Examples) {
  const auto r = remove_stopwords({"needs", "to", "be", "resecured"}, stoplist({"to", "be"}));
  EXPECT_EQ(r.tokens, (Tokens{"needs", "resecured"}));
  EXPECT_EQ(r.removed, 2u);
  EXPECT_TRUE(remove_stopwords({}, stoplist({"to"})).tokens.empty());
  EXPECT_EQ(remove_stopwords({"seal"}, {}).tokens, (Tokens{"seal"}));
}

TEST(Stem, Examples) {
  EXPECT_EQ(stem("leaking"), "leak");
  EXPECT_EQ(stem("installed"), "instal");
  EXPECT_EQ(stem("seal"), "seal");
}

TEST(Stem, LexiconStemOverridesAlgorithm) {
  const auto lex = parse_lexicon("leaking\tVERB\tleak\tleaking\t0\n", "l");
  EXPECT_EQ(stem("leaking", &lex), "leaking");
  EXPECT_EQ(stem("leaked", &lex), "leak");
}

TEST(Stem, MatchesFrozenReferenceVocabulary) {
  std::ifstream in(std::string(LOGMAINT_TEST_DATA) + "/porter2_reference.tsv");
  ASSERT_TRUE(in) << "reference table missing";
  std::string line;
  std::size_t checked = 0, wrong = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    const auto word = line.substr(0, tab), want = line.substr(tab + 1);
    ++checked;
    if (porter2::stem(word) != want) {
      ++wrong;
      ADD_FAILURE() << word << ": got " << porter2::stem(word) << ", want " << want;
      if (wrong > 20) break;
    }
  }
  EXPECT_GT(checked, 4000u);
  EXPECT_EQ(wrong, 0u);
}

TEST(Stem, NonEmptyOnRandomWords) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 5000; ++i) {
    auto w = gen::random_string(rng, 12, "aeiouybcdlnrstgy'");
    if (w.empty()) w = "a";
    EXPECT_FALSE(porter2::stem(w).empty()) << w;
  }
}

TEST(PosTag, Examples) {
  MorphLexicon empty;
  EXPECT_EQ(tag_token("cracked", empty), Pos::verb);
  const auto lex = parse_lexicon("left\tNOUN\tleft\tleft\t1\n", "l");
  EXPECT_EQ(tag_token("left", lex), Pos::noun);
  EXPECT_EQ(tag_token("zzqq", empty), Pos::noun);
  EXPECT_EQ(tag_token("leaking", empty), Pos::verb);
  EXPECT_EQ(tag_token("quickly", empty), Pos::adv);
  const auto tagged = pos_tag({"cracked", "left"}, lex);
  EXPECT_EQ(tagged[1].second, Pos::noun);
}

TEST(Lemmatize, Examples) {
  const auto lex = parse_lexicon("left\tNOUN\tleft\tleft\t1\nground\tNOUN\tground\tground\t1\n", "l");
  EXPECT_EQ(lemmatize("left", Pos::verb, lex), "left");
  EXPECT_EQ(lemmatize("ground", Pos::verb, lex), "ground");
  MorphLexicon empty;
  EXPECT_EQ(lemmatize("installed", Pos::verb, empty), "install");
  EXPECT_EQ(lemmatize("seal", Pos::noun, empty), "seal");
}

TEST(Lemmatize, SuffixRules) {
  MorphLexicon empty;
  const std::vector<std::tuple<const char*, Pos, const char*>> cases{
      {"resecured", Pos::verb, "resecure"}, {"riveted", Pos::verb, "rivet"},     {"leaking", Pos::verb, "leak"},
      {"replaced", Pos::verb, "replace"},   {"removed", Pos::verb, "remove"},    {"fabricated", Pos::verb, "fabricate"},
      {"stopped", Pos::verb, "stop"},       {"installing", Pos::verb, "install"}, {"needs", Pos::verb, "need"},
      {"patches", Pos::noun, "patch"},      {"seals", Pos::noun, "seal"},        {"assemblies", Pos::noun, "assembly"},
      {"glass", Pos::noun, "glass"},        {"quickly", Pos::adv, "quickly"},   {"worn", Pos::adj, "worn"},
  };
  for (const auto& [tok, pos, want] : cases) EXPECT_EQ(lemmatize(tok, pos, empty), want) << tok;
}

TEST(Lemmatize, ExceptionsAreFixedPointsForEveryPos) {
  const auto b = bundled();
  for (const auto& [token, e] : b.lexicon.entries) {
    if (!e.is_exception) continue;
    for (Pos p : {Pos::noun, Pos::verb, Pos::adj, Pos::adv, Pos::other}) EXPECT_EQ(lemmatize(token, p, b.lexicon), token);
  }
}

TEST(Lemmatize, NonEmptyOnRandomTokens) {
  MorphLexicon empty;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 5000; ++i) {
    auto w = gen::random_string(rng, 10, "abeidnsg");
    if (w.empty()) w = "s";
    for (Pos p : {Pos::noun, Pos::verb, Pos::adj}) EXPECT_FALSE(lemmatize(w, p, empty).empty()) << w;
  }
}

TEST(Preprocess, SampleCorrectionsAndExpansions) {
  const auto b = bundled();
  const auto corpus = load_corpus(kData + "/fixture/logbook_sample.csv");
  const auto docs = preprocess_corpus(corpus, b);
  ASSERT_EQ(docs.size(), 4u);
  std::map<std::string, std::string> seen;
  for (const auto& d : docs)
    for (const auto& t : d.tokens) seen[t.surface] = t.corrected;
  EXPECT_EQ(seen["seeal"], "seal");
  EXPECT_EQ(seen["bafl"], "baffle");
  EXPECT_EQ(seen["bafle"], "baffle");
  EXPECT_EQ(seen["egnine"], "engine");
  EXPECT_EQ(seen["screwe"], "screw");
  EXPECT_EQ(seen["fwd"], "forward");
  EXPECT_EQ(seen["eng"], "engine");
  EXPECT_EQ(docs[0].record_id, "111552");
}

TEST(Preprocess, OrderLengthAndStopwords) {
  const auto b = bundled();
  const auto corpus = load_corpus(kData + "/fixture/logbook_sample.csv");
  const auto docs = preprocess_corpus(corpus, b);
  for (std::size_t i = 0; i < docs.size(); ++i) EXPECT_EQ(docs[i].record_id, corpus.records[i].id);
  EXPECT_EQ(docs[0].dropped_stopwords, 3u);  // to, be, to
  EXPECT_EQ(docs[0].tokens[0].surface, "r/h");
  EXPECT_EQ(docs[0].tokens[0].corrected, "right");
  EXPECT_EQ(docs[0].tokens[1].corrected, "hand");
  for (const auto& d : docs)
    for (const auto& t : d.tokens) EXPECT_FALSE(b.stopwords.contains(t.corrected));
}

TEST(Preprocess, AbbreviationWinsOverSpellingCorrection) {
  ResourceBundle b;
  b.abbreviations = parse_abbreviations("fwd\tforward\n", "a");
  DomainDictionary dict;
  dict.add("fed", 100);
  dict.add("forward");
  const auto d = preprocess_text("1", "FWD", b, dict);
  ASSERT_EQ(d.tokens.size(), 1u);
  EXPECT_EQ(d.tokens[0].corrected, "forward");
  EXPECT_EQ(d.tokens[0].source, CorrectionSource::abbreviation);
  ResourceBundle none;
  EXPECT_EQ(preprocess_text("1", "FWD", none, dict).tokens[0].corrected, "fed");
}

TEST(Preprocess, EmptyDocumentsAreKeptAndFlagged) {
  ResourceBundle b;
  b.stopwords = stoplist({"to", "be"});
  Corpus c;
  c.records = {{"a", "to be", {}, {}}, {"b", "seal", {}, {}}};
  const auto docs = preprocess_corpus(c, b);
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_TRUE(docs[0].empty);
  EXPECT_TRUE(docs[0].tokens.empty());
  EXPECT_FALSE(docs[1].empty);
}

TEST(Preprocess, ThreadCountDoesNotChangeOutput) {
  const auto b = bundled();
  Corpus c;
  std::mt19937_64 rng(9);
  for (int i = 0; i < 200; ++i)
    c.records.push_back({std::to_string(i), "FWD " + gen::random_string(rng, 40, "abcdel rsw#/") + " BAFL SEEAL", {}, {}});
  const auto one = to_jsonl(preprocess_corpus(c, b, {2, true, 1}));
  const auto four = to_jsonl(preprocess_corpus(c, b, {2, true, 4}));
  EXPECT_EQ(one, four);
}

TEST(Preprocess, JsonlRoundTrip) {
  const auto b = bundled();
  const auto docs = preprocess_corpus(load_corpus(kData + "/fixture/logbook_sample.csv"), b);
  const auto text = to_jsonl(docs);
  const auto back = parse_jsonl(text, "p.jsonl");
  EXPECT_EQ(to_jsonl(back), text);
  EXPECT_EQ(text.rfind("{\"record_id\":\"111552\",\"tokens\":[{\"surface\"", 0), 0u);
}
