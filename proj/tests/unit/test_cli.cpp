#include <doctest.h>

#include <nlohmann/json.hpp>

#include "cli_harness.hpp"

using testcli::read_text;
using testcli::run;
using testcli::ScratchDir;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Small synthetic corpus shared by the command tests.
struct Fixture {
  ScratchDir dir{"cli"};
  std::string corpus = dir / "synth/corpus.json";
  std::string vectors = dir / "synth/vectors.txt";

  Fixture() {
    const auto r = run({"synth", "--seed", "4", "--questions", "24", "--candidates", "8",
                        "--marked", "3", "--dim", "6", "--mixed-types", "--run-dir", dir / "synth"});
    REQUIRE(r.code == 0);
  }
};

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"no-such-command"}).code == 2);
  CHECK(run({"train", "--corpus", "x.json"}).code == 2);
  CHECK(run({"rouge", "--candidate", "a b"}).code == 2);
  CHECK(run({"crossval", "--corpus", "x.json", "--k", "1", "--seed", "1"}).code == 2);
  const auto help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("crossval") != std::string::npos);
}

TEST_CASE("missing or malformed input exits with 3") {
  ScratchDir dir("cli-data");
  CHECK(run({"ingest", "--input", dir / "absent.json", "--run-dir", dir / "out"}).code == 3);
  testcli::write_text(dir / "bad.json", "{\"questions\": [");
  const auto r = run({"ingest", "--input", dir / "bad.json", "--run-dir", dir / "out"});
  CHECK(r.code == 3);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("rouge prints precision, recall and F1") {
  ScratchDir dir("cli-rouge");
  testcli::write_text(dir / "a.txt", "The cat sat.");
  testcli::write_text(dir / "b.txt", "the cat sat");
  testcli::write_text(dir / "c.txt", "alpha");
  const auto r = run({"rouge", "--candidate", dir / "a.txt", "--reference", dir / "b.txt"});
  CHECK(r.code == 0);
  CHECK(r.out == "P=1.0000 R=1.0000 F1=1.0000\n");
  const auto none = run({"rouge", "--candidate", dir / "c.txt", "--reference", dir / "a.txt",
                         "--reference", dir / "b.txt"});
  CHECK(none.out == "P=0.0000 R=0.0000 F1=0.0000\n");
  CHECK(run({"rouge", "--candidate", dir / "missing.txt", "--reference", dir / "a.txt"}).code == 3);
}

TEST_CASE("synth, ingest and label write their artifacts") {
  Fixture f;
  CHECK(fs::exists(f.corpus));
  CHECK(fs::exists(f.vectors));
  CHECK(json::parse(read_text(f.dir / "synth/marked.json")).size() == 24);
  const auto manifest = json::parse(read_text(f.dir / "synth/manifest.json"));
  CHECK(manifest["command"] == "synth");

  CHECK(run({"ingest", "--input", f.corpus, "--run-dir", f.dir / "ingest"}).code == 0);
  const auto m = json::parse(read_text(f.dir / "ingest/metrics.json"));
  CHECK(m["questions"] == 24);
  CHECK(m["evaluable"] == 24);

  CHECK(run({"label", "--corpus", f.dir / "ingest/corpus.jsonl", "--run-dir", f.dir / "label"}).code == 0);
  CHECK(json::parse(read_text(f.dir / "label/metrics.json"))["labeled"] == 24);
}

TEST_CASE("generated run directories live under the runs root") {
  Fixture f;
  const auto r = run({"ingest", "--input", f.corpus, "--runs-root", f.dir / "runs"});
  REQUIRE(r.code == 0);
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(f.dir / "runs")) dirs.push_back(e.path());
  REQUIRE(dirs.size() == 1);
  CHECK(dirs[0].filename().string().size() == 16 + 1 + 12);
  CHECK(fs::exists(dirs[0] / "manifest.json"));
  CHECK(r.out.find(dirs[0].string()) != std::string::npos);
}

TEST_CASE("train, summarize and evaluate a scorer") {
  Fixture f;
  const std::vector<std::string> small{"--batch-size", "32", "--epochs", "2", "--hidden", "8"};
  auto train_args = std::vector<std::string>{"train", "--corpus", f.corpus, "--variant", "nnc",
                                             "--embeddings", f.vectors, "--run-dir", f.dir / "train"};
  CHECK(run(train_args).code == 2);  // no seed
  train_args.insert(train_args.end(), {"--seed", "3"});
  train_args.insert(train_args.end(), small.begin(), small.end());
  REQUIRE(run(train_args).code == 0);
  const auto tm = json::parse(read_text(f.dir / "train/metrics.json"));
  CHECK(tm["epoch_losses"].size() == 2);
  CHECK(read_text(f.dir / "train/train_log.tsv").rfind("epoch\tloss\n", 0) == 0);

  const auto model = f.dir / "train/model.qfck";
  REQUIRE(run({"summarize", "--corpus", f.corpus, "--model", model, "--embeddings", f.vectors,
               "--run-dir", f.dir / "sum"}).code == 0);
  const auto answers = json::parse(read_text(f.dir / "sum/answers.json"));
  CHECK(answers["questions"].size() == 24);
  CHECK(run({"summarize", "--corpus", f.corpus, "--model", model, "--run-dir", f.dir / "x"}).code == 2);

  const auto ev = run({"evaluate", "--corpus", f.corpus, "--model", model, "--embeddings",
                       f.vectors, "--run-dir", f.dir / "eval"});
  REQUIRE(ev.code == 0);
  CHECK(ev.out.find("ROUGE-SU4 F1") != std::string::npos);
  const auto em = json::parse(read_text(f.dir / "eval/metrics.json"));
  CHECK(em["questions"] == 24);
  CHECK(em["mean_f1"].get<double>() >= 0.0);

  // A wrong-dimension embedding file is a data error.
  testcli::write_text(f.dir / "v2.txt", "1 2\nx 1 2\n");
  CHECK(run({"summarize", "--corpus", f.corpus, "--model", model, "--embeddings",
             f.dir / "v2.txt", "--run-dir", f.dir / "y"}).code == 3);
}

TEST_CASE("crossval prints a table and is reproducible") {
  Fixture f;
  std::vector<std::string> args{"crossval", "--corpus", f.corpus, "--method", "firstn",
                                "--method", "random", "--k", "3", "--seed", "8"};
  auto a = args;
  a.insert(a.end(), {"--run-dir", f.dir / "cv1"});
  auto b = args;
  b.insert(b.end(), {"--run-dir", f.dir / "cv2", "--jobs", "2"});
  const auto ra = run(a);
  REQUIRE(ra.code == 0);
  REQUIRE(run(b).code == 0);
  CHECK(ra.out.find("firstn") < ra.out.find("random"));
  CHECK(read_text(f.dir / "cv1/report.json") == read_text(f.dir / "cv2/report.json"));
  CHECK(json::parse(read_text(f.dir / "cv1/report.json"))["reports"][0]["scores"].size() == 3);
}

TEST_CASE("rl-train and rl-eval") {
  Fixture f;
  REQUIRE(run({"rl-train", "--corpus", f.corpus, "--embeddings", f.vectors, "--seed", "2",
               "--horizon", "100", "--timesteps", "400", "--eval-interval", "200", "--hidden",
               "8", "--eval-samples", "5", "--run-dir", f.dir / "rl"}).code == 0);
  const auto m = json::parse(read_text(f.dir / "rl/metrics.json"));
  CHECK(m["curve"].size() == 2);
  CHECK(m.contains("firstn_test"));
  CHECK(run({"rl-eval", "--corpus", f.corpus, "--embeddings", f.vectors, "--policy",
             f.dir / "rl/policy.qfck", "--samples", "5", "--run-dir", f.dir / "rle"}).code == 0);
  CHECK(json::parse(read_text(f.dir / "rle/answers.json"))["questions"].size() == 24);
  CHECK(run({"rl-train", "--corpus", f.corpus, "--embeddings", f.vectors, "--seed", "2",
             "--horizon", "100", "--minibatches", "3", "--run-dir", f.dir / "bad"}).code == 3);
}
