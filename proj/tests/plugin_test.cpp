// External plugin contracts: synthesizer / flow runner / diff proposer /
// embedder processes speaking JSON over stdin/stdout.
#include <doctest.h>

#include "qorpilot/doc/docmaker.hpp"
#include "qorpilot/exec/executor.hpp"
#include "qorpilot/retrieval/index.hpp"
#include "test_util.hpp"

using namespace qorpilot;

namespace {

// writes a python script and returns the command to run it
std::string script(const testutil::TempDir& tmp, const std::string& name,
                   const std::string& body) {
    write_file(tmp.path / name, body);
    return "python3 " + (tmp.path / name).string();
}

}  // namespace

TEST_CASE("process synthesizer: request/response round trip and failure modes") {
    testutil::TempDir tmp;
    std::string ok = script(tmp, "synth.py", R"(
import sys, json
req = json.load(sys.stdin)
sections = {}
for name in req["sections"]:
    if name == "role":
        sections[name] = "External summary of " + req["task"]
    elif name in ("inputs_outputs", "config_knobs"):
        sections[name] = []
    else:
        sections[name] = []
print(json.dumps({"sections": sections, "usage": {"prompt_tokens": 10, "completion_tokens": 5}}))
)");
    doc::ProcessSynthesizer synth(ok);
    doc::SynthesizerRequest request{"doc_card", "subject: x\n", {"role", "preconditions"}};
    auto response = synth.synthesize(request);
    CHECK(response.sections.at("role") == "External summary of doc_card");
    CHECK(response.prompt_tokens == 10);

    SUBCASE("nonzero exit is SynthesizerUnavailable") {
        doc::ProcessSynthesizer broken(script(tmp, "broken.py", "import sys\nsys.exit(4)\n"));
        CHECK_THROWS_AS(broken.synthesize(request), doc::SynthesizerUnavailable);
    }
    SUBCASE("garbage stdout is SynthesizerUnavailable") {
        doc::ProcessSynthesizer garbage(
            script(tmp, "garbage.py", "import sys\nsys.stdin.read()\nprint('not json')\n"));
        CHECK_THROWS_AS(garbage.synthesize(request), doc::SynthesizerUnavailable);
    }
}

TEST_CASE("process flow runner: report, crash and runner error") {
    testutil::TempDir tmp;
    write_file(tmp.path / "ws/dummy.txt", "x\n");
    exec::Workspace ws = exec::Workspace::init(tmp.path / "ws", tmp.path / "ws_run");

    flow::FlowRunConfig config;
    config.design = "aes";
    config.pdk = "Nangate45";
    config.stage = flow::Stage::GlobalRoute;

    SUBCASE("exit 0 with a valid report") {
        exec::ProcessFlowRunner runner(script(tmp, "flow.py", R"(
import sys, json
cfg = json.load(sys.stdin)
print(json.dumps({"design": cfg["design"], "pdk": cfg["pdk"], "stage": cfg["stage"],
                  "routed_wirelength_um": 123000, "drc_count": 0}))
)"));
        auto report = runner.run(config, ws);
        CHECK(report.design == "aes");
        CHECK(report.stage == flow::Stage::GlobalRoute);
        CHECK(*report.routed_wirelength_um == 123000);
    }
    SUBCASE("exit 2 is a flow crash") {
        exec::ProcessFlowRunner runner(
            script(tmp, "crash.py", "import sys\nsys.stdin.read()\nsys.exit(2)\n"));
        CHECK_THROWS_AS(runner.run(config, ws), exec::FlowCrash);
    }
    SUBCASE("other exit codes are runner errors") {
        exec::ProcessFlowRunner runner(
            script(tmp, "err.py", "import sys\nsys.stdin.read()\nsys.exit(7)\n"));
        CHECK_THROWS_AS(runner.run(config, ws), exec::FlowRunnerUnavailable);
    }
}

TEST_CASE("process proposer: patches round trip with step payload") {
    testutil::TempDir tmp;
    exec::ProcessProposer proposer(script(tmp, "proposer.py", R"(
import sys, json
req = json.load(sys.stdin)
step = req["step"]
patch = "--- a/f\n+++ b/f\n@@ -1,1 +1,1 @@\n-x\n+y (for %s)\n" % step["id"]
print(json.dumps({"patches": [patch]}))
)"));
    localizer::GranularStep step;
    step.id = "step-042";
    step.run_config.design = "aes";
    step.run_config.pdk = "Nangate45";
    step.surface_files = {"f"};
    exec::ProposalRequest request;
    request.step = &step;
    auto response = proposer.propose(request);
    REQUIRE(response.patches.size() == 1);
    CHECK(response.patches[0].find("step-042") != std::string::npos);
}

TEST_CASE("process embedder: vectors, unembeddable, failure") {
    testutil::TempDir tmp;
    std::string cmd = script(tmp, "embed.py", R"(
import sys, json
req = json.load(sys.stdin)
if not req["text"].strip():
    print(json.dumps({"embedding": None}))
else:
    v = [0.0, 0.0, 0.0, 0.0]
    v[len(req["text"]) % 4] = 1.0
    print(json.dumps({"embedding": v}))
)");
    retrieval::ProcessEmbedder embedder(cmd, 4);
    auto v = embedder.embed("hello");
    REQUIRE(v.has_value());
    CHECK(v->size() == 4);
    CHECK_FALSE(embedder.embed("  ").has_value());

    retrieval::ProcessEmbedder broken(script(tmp, "bad.py", "import sys\nsys.exit(3)\n"), 4);
    CHECK_THROWS_AS(broken.embed("x"), retrieval::EmbedderUnavailable);

    SUBCASE("index round-trips the embedder spec through its manifest") {
        retrieval::IndexConfig config;
        config.embed_dim = 4;
        retrieval::Index index(config, std::make_shared<retrieval::ProcessEmbedder>(cmd, 4));
        retrieval::IndexedDoc doc;
        doc.doc_id = md5("p:1");
        doc.source = retrieval::Source::Literature;
        doc.text = "hello world";
        index.upsert(std::move(doc));
        index.save(tmp.path / "idx");
        auto loaded = retrieval::Index::load(tmp.path / "idx");
        CHECK(loaded.size() == 1);
        auto hits = loaded.search("hello", 1);
        REQUIRE(hits.size() == 1);
        CHECK(hits[0].dense > 0);  // embedder restored from the manifest
    }
}

TEST_CASE("docmaker parallel synthesis equals sequential output") {
    auto repo = testutil::fixture_dir() / "docrepo";
    auto g = graph::condense_sccs(graph::build_graph(repo));
    doc::ExtractiveSynthesizer synth;

    doc::CardStore sequential;
    doc::DocmakerOptions seq_opts;
    seq_opts.max_in_flight = 1;
    REQUIRE(doc::run_docmaker(g, repo, sequential, synth, nullptr, seq_opts).failed.empty());

    doc::CardStore parallel;
    doc::DocmakerOptions par_opts;
    par_opts.max_in_flight = 8;
    REQUIRE(doc::run_docmaker(g, repo, parallel, synth, nullptr, par_opts).failed.empty());

    REQUIRE(sequential.size() == parallel.size());
    for (const auto& [id, card] : sequential.all()) {
        REQUIRE(parallel.find(id));
        CHECK(doc::render_card(*parallel.find(id)) == doc::render_card(card));
    }
}
