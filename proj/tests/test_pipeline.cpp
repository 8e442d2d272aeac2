#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "logmaint/logmaint.hpp"
#include "test_support.hpp"

using namespace logmaint;
namespace fs = std::filesystem;

namespace {

const std::string kData = LOGMAINT_DATA_DIR;
const std::string kConf = kData + "/fixture/pipeline.conf";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

PipelineConfig fixture_config(const fs::path& out, unsigned threads = 1) {
  PipelineConfig c;
  apply_config_file(c, kConf);
  c.out_dir = out.string();
  c.threads = threads;
  return c;
}

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + LOGMAINT_CLI + "\" " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Pipeline, FixtureWritesEveryArtifact) {
  const auto out = gen::temp_dir("pipe-all");
  std::vector<std::string> lines;
  const auto r = run_pipeline(fixture_config(out), [&](const std::string& s) { lines.push_back(s); });
  for (const auto& name : artifact_names()) {
    EXPECT_TRUE(fs::exists(out / name)) << name;
    EXPECT_EQ(slurp(out / name), r.artifacts.at(name)) << name;
  }
  for (const auto& stage : stage_order()) {
    const bool logged = std::any_of(lines.begin(), lines.end(), [&](const std::string& l) { return l.rfind("[" + stage + "]", 0) == 0; });
    EXPECT_TRUE(logged) << stage;
  }
  const auto manifest = Json::parse(r.artifacts.at("manifest.json"));
  EXPECT_EQ(manifest["version"], kVersion);
  EXPECT_EQ(manifest["config"]["seed"], 42);
  EXPECT_EQ(manifest["stages"].size(), stage_order().size());
  EXPECT_EQ(manifest["artifacts_fnv1a64"].size(), artifact_names().size() - 1);

  const auto processed = parse_jsonl(r.artifacts.at("processed.jsonl"), "processed.jsonl");
  ASSERT_EQ(processed.size(), 4u);
  EXPECT_EQ(processed[0].record_id, "111552");
  const auto csv = r.artifacts.at("clusters.csv");
  EXPECT_EQ(csv.rfind("record_id,label\n111552,", 0), 0u) << csv;
}

TEST(Pipeline, MissingResourceNamesPathAndLeavesNoArtifacts) {
  const auto out = gen::temp_dir("pipe-missing");
  auto c = fixture_config(out);
  c.lexicon = (out / "no-such-lexicon.tsv").string();
  try {
    run_pipeline(c);
    FAIL() << "expected failure";
  } catch (const StageError& e) {
    EXPECT_NE(std::string(e.what()).find("no-such-lexicon.tsv"), std::string::npos) << e.what();
    EXPECT_EQ(e.stage(), "config");
  }
  for (const auto& name : artifact_names()) EXPECT_FALSE(fs::exists(out / name)) << name;
}

TEST(Pipeline, LaterStageFailureRemovesEarlierFiles) {
  const auto out = gen::temp_dir("pipe-late");
  auto c = fixture_config(out);
  c.cluster.k = 50;  // more clusters than documents
  EXPECT_THROW(run_pipeline(c), StageError);
  for (const auto& name : artifact_names()) EXPECT_FALSE(fs::exists(out / name)) << name;
}

TEST(Pipeline, DeterministicAcrossRunsAndThreadCounts) {
  const auto a = run_pipeline(fixture_config(gen::temp_dir("pipe-a"), 1));
  const auto b = run_pipeline(fixture_config(gen::temp_dir("pipe-b"), 1));
  const auto c = run_pipeline(fixture_config(gen::temp_dir("pipe-c"), 4));
  for (const auto& name : artifact_names()) {
    if (name == "manifest.json") continue;  // carries absolute output paths
    EXPECT_EQ(a.artifacts.at(name), b.artifacts.at(name)) << name;
    EXPECT_EQ(a.artifacts.at(name), c.artifacts.at(name)) << name;
  }
  EXPECT_EQ(portable_manifest(a.artifacts.at("manifest.json")), portable_manifest(c.artifacts.at("manifest.json")));
}

TEST(Pipeline, EveryClusteringMethodRuns) {
  for (const auto* method : {"kmeans", "dbscan", "hier", "lda"}) {
    const auto out = gen::temp_dir(std::string("pipe-") + method);
    auto c = fixture_config(out);
    set_config_value(c, "method", method);
    set_config_value(c, "eps", "0.8");
    set_config_value(c, "min_pts", "1");
    set_config_value(c, "iters", "50");
    set_config_value(c, "metrics", "silhouette,inertia,perplexity,coherence,intra-inter:cosine");
    set_config_value(c, "coherence_top_n", "3");
    const auto r = run_pipeline(c);
    const auto report = Json::parse(r.artifacts.at("report.json"));
    EXPECT_EQ(report["documents"], 4) << method;
    EXPECT_FALSE(report["metrics"].empty()) << method;
    if (std::string(method) == "lda") EXPECT_FALSE(report["coherence"].is_null());
    else EXPECT_FALSE(report["skipped"].empty()) << method;  // perplexity/coherence do not apply
  }
}

TEST(Pipeline, DbscanWithoutEpsIsAConfigError) {
  auto c = fixture_config(gen::temp_dir("pipe-dbscan"));
  set_config_value(c, "method", "dbscan");
  EXPECT_THROW(run_pipeline(c), StageError);
}

TEST(Config, ParseErrorsCarryLineNumbers) {
  const auto dir = gen::temp_dir("conf");
  detail::write_file((dir / "bad.conf").string(), "# header\nseed = 7\nk = many\n");
  PipelineConfig c;
  try {
    apply_config_file(c, (dir / "bad.conf").string());
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  detail::write_file((dir / "unknown.conf").string(), "colour = blue\n");
  EXPECT_THROW(apply_config_file(c, (dir / "unknown.conf").string()), ParseError);
  detail::write_file((dir / "noeq.conf").string(), "seed 7\n");
  EXPECT_THROW(apply_config_file(c, (dir / "noeq.conf").string()), ParseError);
}

TEST(Config, RelativePathsResolveAgainstTheFile) {
  PipelineConfig c;
  apply_config_file(c, kConf);
  EXPECT_TRUE(fs::exists(c.input));
  EXPECT_TRUE(fs::is_directory(c.resources));
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.cluster.k, 2);
}

TEST(Config, ManifestReplayReproducesArtifacts) {
  const auto first = gen::temp_dir("replay-1");
  const auto a = run_pipeline(fixture_config(first));
  PipelineConfig c;
  apply_config_file(c, (first / "manifest.json").string());
  c.out_dir = gen::temp_dir("replay-2").string();
  const auto b = run_pipeline(c);
  for (const auto& name : artifact_names()) {
    if (name == "manifest.json") continue;
    EXPECT_EQ(a.artifacts.at(name), b.artifacts.at(name)) << name;
  }
}

TEST(Selftest, PassesAgainstCommittedArtifacts) {
  const auto r = selftest(kData, gen::temp_dir("selftest").string());
  for (const auto& l : r.lines) EXPECT_EQ(l.rfind("PASS", 0), 0u) << l;
  EXPECT_TRUE(r.passed);
}

TEST(Cli, PipelineAndSelftestExitZero) {
  const auto out = gen::temp_dir("cli-pipe");
  EXPECT_EQ(cli("--quiet --config \"" + kConf + "\" --out-dir \"" + out.string() + "\" pipeline"), 0);
  EXPECT_TRUE(fs::exists(out / "report.json"));
  EXPECT_EQ(cli("--quiet --out-dir \"" + gen::temp_dir("cli-self").string() + "\" selftest"), 0);
}

TEST(Cli, ErrorsExitNonZero) {
  EXPECT_NE(cli("--quiet --out-dir /tmp pipeline --input /no/such/file.csv"), 0);
  EXPECT_NE(cli("frobnicate"), 0);
  EXPECT_NE(cli("--quiet --config \"" + kConf + "\" --out-dir /tmp pipeline --method dbscan"), 0);
}

TEST(Cli, ChainedSubcommandsMatchPipeline) {
  const auto ref = gen::temp_dir("cli-ref");
  const auto r = run_pipeline(fixture_config(ref));
  const auto d = gen::temp_dir("cli-chain");
  const std::string base = "--quiet --config \"" + kConf + "\" --out-dir \"" + d.string() + "\" ";
  ASSERT_EQ(cli(base + "preprocess --input \"" + kData + "/fixture/logbook_sample.csv\""), 0);
  ASSERT_EQ(cli(base + "vectorize --input \"" + (d / "processed.jsonl").string() + "\""), 0);
  ASSERT_EQ(cli(base + "cluster --matrix \"" + (d / "matrix.json").string() + "\""), 0);
  ASSERT_EQ(cli(base + "evaluate --clusters \"" + (d / "clusters.csv").string() + "\" --matrix \"" +
                (d / "matrix.json").string() + "\" --processed \"" + (d / "processed.jsonl").string() + "\" --out \"" +
                (d / "report.json").string() + "\""),
            0);
  for (const auto* name : {"processed.jsonl", "matrix.json", "clusters.csv", "clusters.json", "report.json"})
    EXPECT_EQ(slurp(d / name), r.artifacts.at(name)) << name;
}

TEST(Cli, CorrectSubcommand) {
  const auto d = gen::temp_dir("cli-correct");
  detail::write_file((d / "dict.txt").string(), "seal\t5\nbaffle\t3\nengine\n");
  detail::write_file((d / "tokens.txt").string(), "seeal bafl egnine\n");
  detail::write_file((d / "pairs.tsv").string(), "seeal\tseal\nbafl\tbaffle\n");
  ASSERT_EQ(cli("correct --dict \"" + (d / "dict.txt").string() + "\" --input \"" + (d / "tokens.txt").string() +
                "\" --out \"" + (d / "out.tsv").string() + "\""),
            0);
  const auto text = slurp(d / "out.tsv");
  EXPECT_NE(text.find("seeal\tseal\t1\tspelling"), std::string::npos) << text;
  EXPECT_NE(text.find("egnine\tengine\t2\tspelling"), std::string::npos) << text;
  ASSERT_EQ(cli("correct --dict \"" + (d / "dict.txt").string() + "\" --pairs \"" + (d / "pairs.tsv").string() +
                "\" --out \"" + (d / "eval.json").string() + "\""),
            0);
  const auto ev = Json::parse(slurp(d / "eval.json"));
  EXPECT_EQ(ev["success_rate"], 1.0);
  EXPECT_NE(cli("correct --dict \"" + (d / "dict.txt").string() + "\""), 0);  // needs --input or --pairs
}
