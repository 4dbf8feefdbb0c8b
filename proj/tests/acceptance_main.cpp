// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion enforces its own wall-clock budget.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "qorpilot/support/subprocess.hpp"
#include "qorpilot/doc/docmaker.hpp"
#include "qorpilot/exec/executor.hpp"
#include "qorpilot/retrieval/index.hpp"
#include "qorpilot/cli/cli.hpp"
#include "test_util.hpp"

using namespace qorpilot;
namespace fs = std::filesystem;

namespace {

struct Check {
    const char* name;
    double budget_seconds;
    std::function<void()> body;
};

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define ENSURE(cond, msg)                                        \
    do {                                                         \
        if (!(cond)) throw Failure(std::string("assert: ") + msg); \
    } while (0)

fs::path fixtures() { return testutil::fixture_dir(); }

std::string tool_bin() {
#ifdef QORPILOT_BIN
    return QORPILOT_BIN;
#else
    return "qorpilot";
#endif
}

// --- criterion 1 & 2: paper table deltas -----------------------------------

struct DeltaRow {
    const char* pdk;
    const char* design;
    double base;
    double new_value;
    double printed;
};

void criterion_table2() {
    const DeltaRow rows[] = {
        {"ASAP7", "aes", 64640, 62710, -2.99},
        {"ASAP7", "ibex", 80402, 80823, +0.52},
        {"ASAP7", "jpeg", 154484, 152232, -1.46},
        {"SKY130HD", "aes", 659778, 633899, -3.92},
        {"SKY130HD", "ibex", 646855, 643006, -0.60},
        {"Nangate45", "aes", 230044, 217415, -5.49},
        {"Nangate45", "ibex", 248641, 248429, -0.09},
        {"Nangate45", "jpeg", 565979, 554902, -1.96},
        {"Nangate45", "bp_fe", 1603884, 1634916, +1.94},
        {"Nangate45", "ariane133", 7831361, 7523708, -3.93},
        {"Nangate45", "ariane136", 7986048, 7509944, -5.96},
        {"Nangate45", "swerv_wrapper", 4310916, 4239837, -1.65},
    };
    size_t count = 0;
    for (const auto& row : rows) {
        double delta = flow::delta_percent(row.base, row.new_value);
        ENSURE(std::abs(delta - row.printed) <= 0.01,
               std::string(row.pdk) + "/" + row.design + ": computed " +
                   std::to_string(delta) + " vs printed " + std::to_string(row.printed));
        ++count;
    }
    ENSURE(count == 12, "expected 12 numeric rows");
}

void criterion_table4() {
    const DeltaRow rows[] = {
        {"Nangate45", "ariane133", 3.59, 3.43, -4.6},
        {"Nangate45", "ariane136", 3.78, 3.41, -10.0},
        {"Nangate45", "bp_fe", 1.71, 1.65, -3.4},
        {"Nangate45", "swerv_wrapper", 2.19, 2.16, -1.4},
    };
    for (const auto& row : rows) {
        double delta = flow::delta_percent(row.base, row.new_value);
        ENSURE(std::abs(delta - row.printed) <= 0.25,
               std::string(row.design) + ": computed " + std::to_string(delta) +
                   " vs printed " + std::to_string(row.printed));
    }
}

// --- criterion 3: end-to-end replay scenario ---------------------------------

void criterion_end_to_end() {
    testutil::TempDir tmp;
    fs::path flows = fixtures() / "flows";
    std::string cwd = tmp.path.string();
    std::string cfg = " --config " + (flows / "config.json").string();
    std::string repo = (flows / "repo").string();

    auto sh = [&](const std::string& args) {
        auto r = run_subprocess(tool_bin() + " " + args, "", cwd);
        if (r.exit_code != 0)
            throw Failure("command failed (" + std::to_string(r.exit_code) + "): " + args +
                          "\n" + r.err);
        return r;
    };

    sh("graph-build --repo " + repo + " --out graph.json" + cfg);
    sh("doc-gen --repo " + repo + " --graph graph.json --out cards" + cfg);
    sh("index --graph graph.json --cards cards --repo " + repo + " --lit " +
       (flows / "lit").string() + " --out index" + cfg);
    sh("plan --objective rwl --scope dpl --k 12 --index index --graph graph.json --cards "
       "cards --out plan.json" + cfg);
    sh("localize --plan plan.json --graph graph.json --cards cards --out gp.json" + cfg);
    auto run = sh("run --granular-plan gp.json --repo " + repo +
                  " --flow-runner replay --fixture " + (flows / "t2.qor.jsonl").string() +
                  " --proposer " + (flows / "proposals.json").string() +
                  " --out run.json --workspace ws" + cfg);

    Json outcome = Json::parse(run.out);
    ENSURE(outcome.at("any_committed") == true, "no candidate committed");
    const Json& step = outcome.at("steps").at(0);
    ENSURE(step.at("committed_candidate") == "step-001-c3",
           "committed " + step.at("committed_candidate").dump() + ", expected step-001-c3");
    double delta = step.at("composite_delta").get<double>();
    ENSURE(std::abs(delta - 0.0549) < 5e-5,
           "composite_delta " + std::to_string(delta) + " != 0.0549");

    // workspace hash equals the expected post-commit hash
    Json proposals = Json::parse(read_file(flows / "proposals.json"));
    std::string best = proposals["steps"]["step-001"]["candidates"][2];
    auto gp = localizer::granular_from_json(read_file(tmp.path / "gp.json"));
    exec::Workspace expected = exec::Workspace::init(flows / "repo", tmp.path / "expected");
    exec::apply_edit(expected, gp.steps[0], best);
    ENSURE(outcome.at("final_workspace_hash") == expected.tree_hash().to_hex(),
           "workspace hash diverges from the expected post-commit tree");

    // the committed fixture file matches a regeneration from this tree
#ifdef QORPILOT_FIXTURE_GEN
    std::string fixture_gen = QORPILOT_FIXTURE_GEN;
#else
    std::string fixture_gen = "fixture_gen";
#endif
    auto regen = run_subprocess(fixture_gen + " " + flows.string() + " " +
                                    (tmp.path / "t2.regen.jsonl").string(),
                                "", cwd);
    ENSURE(regen.exit_code == 0, "fixture_gen failed: " + regen.err);
    ENSURE(read_file(tmp.path / "t2.regen.jsonl") == read_file(flows / "t2.qor.jsonl"),
           "committed t2.qor.jsonl is stale versus regeneration");
}

// --- criterion 4: graph properties ---------------------------------------------

void criterion_graph_properties() {
    std::mt19937 rng(20260808);
    for (int trial = 0; trial < 100; ++trial) {
        size_t n = 2 + rng() % 199;
        std::vector<std::pair<size_t, size_t>> calls;
        size_t m = rng() % (2 * n);
        for (size_t i = 0; i < m; ++i) calls.emplace_back(rng() % n, rng() % n);
        auto g = testutil::synthetic_graph(n, calls);

        std::set<graph::NodeId> self_callers;
        for (const auto& e : g.edges)
            if (e.kind == graph::EdgeKind::Calls && e.src == e.dst) self_callers.insert(e.src);

        auto expected = testutil::scc_oracle(g);
        std::set<std::set<graph::NodeId>> expected_groups;
        for (auto& grp : expected)
            if (grp.size() >= 2 || (grp.size() == 1 && self_callers.count(grp[0])))
                expected_groups.insert(std::set<graph::NodeId>(grp.begin(), grp.end()));

        auto c = graph::condense_sccs(g);
        std::set<std::set<graph::NodeId>> got_groups;
        for (const auto& [id, node] : c.nodes)
            if (node.kind == graph::NodeKind::SccGroup)
                got_groups.insert(
                    std::set<graph::NodeId>(node.members.begin(), node.members.end()));
        ENSURE(got_groups == expected_groups, "SCC partition diverges from the oracle");

        // acyclicity via Kahn elimination over calls edges
        std::map<graph::NodeId, size_t> outdeg;
        std::multimap<graph::NodeId, graph::NodeId> radj;
        for (const auto& [id, node] : c.nodes) outdeg[id] = 0;
        for (const auto& e : c.edges) {
            if (e.kind != graph::EdgeKind::Calls) continue;
            outdeg[e.src]++;
            radj.emplace(e.dst, e.src);
        }
        std::vector<graph::NodeId> queue;
        for (auto& [id, d] : outdeg)
            if (d == 0) queue.push_back(id);
        size_t seen = 0;
        while (!queue.empty()) {
            auto id = queue.back();
            queue.pop_back();
            ++seen;
            auto [lo, hi] = radj.equal_range(id);
            for (auto it = lo; it != hi; ++it)
                if (--outdeg[it->second] == 0) queue.push_back(it->second);
        }
        ENSURE(seen == c.nodes.size(), "calls projection has a cycle after condensation");
    }

    auto pipeline = [&] {
        auto g = graph::build_graph(fixtures() / "mini");
        g = graph::link_scripts(g, graph::default_registration_patterns());
        g = graph::condense_sccs(g);
        g = graph::sparsify(g, 32, 0.0);
        return graph::serialize(g);
    };
    std::string first = pipeline();
    for (int i = 0; i < 2; ++i)
        ENSURE(pipeline() == first, "pipeline serialization differs across runs");
}

// --- criterion 5: docmaker soundness ---------------------------------------------

void criterion_docmaker() {
    std::mt19937 rng(5550123);
    for (int trial = 0; trial < 100; ++trial) {
        size_t n = 2 + rng() % 499;
        std::vector<std::pair<size_t, size_t>> calls;
        for (size_t i = 0; i < n; ++i)
            for (int k = 0; k < 3; ++k) {
                size_t j = i + 1 + rng() % (n - i);
                if (j < n && rng() % 3 == 0) calls.emplace_back(i, j);
            }
        auto g = testutil::synthetic_graph(n, calls);
        g.condensed = true;  // DAG by construction
        auto order = doc::schedule(g);
        ENSURE(order.size() == n, "schedule must list every node exactly once");
        std::map<graph::NodeId, size_t> pos;
        for (size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
        for (const auto& e : g.edges)
            if (e.kind == graph::EdgeKind::Calls)
                ENSURE(pos[e.dst] < pos[e.src], "callee must precede caller");
    }

    auto repo = fixtures() / "docrepo";
    auto g = graph::condense_sccs(graph::build_graph(repo));
    doc::CardStore store;
    doc::ExtractiveSynthesizer synth;
    auto result = doc::run_docmaker(g, repo, store, synth);
    ENSURE(result.failed.empty(), "fallback docmaker run failed nodes");
    ENSURE(store.size() > 0, "no cards written");
    for (const auto& [id, card] : store.all())
        ENSURE(doc::validate_card(card, g).empty(), "card violations after full run");

    doc::DocCard bogus = store.all().begin()->second;
    bogus.referenced_apis.push_back("foo::bar");
    auto violations = doc::validate_card(bogus, g);
    ENSURE(violations.size() == 1, "expected exactly one violation");
    ENSURE(violations[0].kind == doc::ViolationKind::ApiMissing, "expected ApiMissing");
}

// --- criterion 6: retrieval equivalence -------------------------------------------

void criterion_retrieval() {
    std::mt19937 rng(606060);
    const char* words[] = {"place", "route", "timing", "skew", "density",
                           "via",   "wire",  "slack",  "clock", "cell"};
    auto random_text = [&] {
        std::string text;
        size_t n = 3 + rng() % 10;
        for (size_t i = 0; i < n; ++i) text += std::string(words[rng() % 10]) + " ";
        return text;
    };
    auto make_doc = [](const std::string& key, const std::string& text) {
        retrieval::IndexedDoc doc;
        doc.doc_id = md5("doc:" + key);
        doc.source = retrieval::Source::Literature;
        doc.text = text;
        return doc;
    };

    for (int trial = 0; trial < 100; ++trial) {
        std::vector<retrieval::IndexedDoc> corpus;
        for (int i = 0; i < 50; ++i)
            corpus.push_back(make_doc("d" + std::to_string(i), random_text()));
        retrieval::Index incremental;
        incremental.update(corpus, {});
        std::map<retrieval::DocId, retrieval::IndexedDoc> final_docs;
        for (const auto& d : corpus) final_docs[d.doc_id] = d;
        for (int u = 0; u < 10; ++u) {
            int pick = static_cast<int>(rng() % 50);
            auto id = md5("doc:d" + std::to_string(pick));
            if (rng() % 4 == 0 && final_docs.count(id)) {
                incremental.update({}, {id});
                final_docs.erase(id);
            } else {
                auto doc = make_doc("d" + std::to_string(pick), random_text());
                incremental.update({doc}, {});
                final_docs[doc.doc_id] = doc;
            }
        }
        retrieval::Index fresh;
        std::vector<retrieval::IndexedDoc> rest;
        for (const auto& [id, d] : final_docs) rest.push_back(d);
        fresh.update(rest, {});
        auto a = incremental.search("place route timing", 10);
        auto b = fresh.search("place route timing", 10);
        ENSURE(a.size() == b.size(), "incremental/fresh result sizes differ");
        for (size_t i = 0; i < a.size(); ++i) {
            ENSURE(a[i].doc_id == b[i].doc_id, "incremental/fresh ranking differs");
            ENSURE(std::abs(a[i].score - b[i].score) < 1e-12, "score drift");
        }
    }

    // 20 constructed BM25 cases against the formula
    for (int i = 0; i < 20; ++i) {
        size_t reps = 1 + rng() % 6;
        size_t fill = rng() % 8;
        std::string text;
        for (size_t r = 0; r < reps; ++r) text += "needle ";
        for (size_t f = 0; f < fill; ++f) text += "pad" + std::to_string(f) + " ";
        retrieval::Index index;
        index.update({make_doc("x", text), make_doc("y", "other tokens only here")}, {});
        const auto& doc = index.docs().at(md5("doc:x"));
        double got = retrieval::bm25_score({"needle"}, doc, index.stats(), 1.2, 0.75);
        double dl = static_cast<double>(reps + fill);
        double avg = (dl + 4.0) / 2.0;
        double idf = std::log(1.0 + (2.0 - 1.0 + 0.5) / (1.0 + 0.5));
        double expected = idf * (reps * 2.2) / (reps + 1.2 * (0.25 + 0.75 * dl / avg));
        ENSURE(std::abs(got - expected) < 1e-9, "bm25 formula mismatch");
    }

    // structural boost reorders the constructed tie fixture
    std::vector<graph::NodeId> ids;
    auto g = testutil::synthetic_graph(3, {{0, 1}}, &ids);
    g.condensed = true;
    auto shared = std::make_shared<graph::CodeGraph>(std::move(g));
    retrieval::Index index;
    index.attach_graph(shared);
    auto near = make_doc("near", "identical text body");
    near.subject = ids[1];
    auto far = make_doc("far", "identical text body");
    far.subject = ids[2];
    index.update({near, far}, {});
    auto hits = index.search("identical text", 2, {}, ids[0]);
    ENSURE(hits.size() == 2 && hits[0].doc_id == md5("doc:near") && hits[0].structural > 0,
           "structural boost did not reorder the tie");
}

// --- criterion 7: gate safety -------------------------------------------------------

void criterion_gate_safety() {
    std::mt19937 rng(777001);
    exec::MetricModel model;
    model.metrics["routed_wirelength_um"] = {1.0, 1.0, true};
    for (int trial = 0; trial < 10000; ++trial) {
        flow::QoRReport base, cand;
        base.design = cand.design = "d";
        base.routed_wirelength_um = 1000.0 + rng() % 100000;
        cand.routed_wirelength_um = 1000.0 + rng() % 100000;
        base.drc_count = rng() % 5;
        cand.drc_count = rng() % 5;
        base.wns_ns = -static_cast<double>(rng() % 200) / 100.0;
        cand.wns_ns = -static_cast<double>(rng() % 200) / 100.0;
        exec::GateConfig config;
        config.wns_degradation_threshold_ns = (rng() % 20) / 100.0;
        bool build_ok = rng() % 10 != 0;
        bool tests_ok = rng() % 10 != 0;
        auto d = exec::gate(cand, base, build_ok, tests_ok, model, config);
        if (d.accepted) {
            ENSURE(*cand.drc_count <= *base.drc_count, "accepted with new DRCs");
            ENSURE(*cand.wns_ns >= *base.wns_ns - config.wns_degradation_threshold_ns,
                   "accepted with degraded WNS");
            ENSURE(d.composite_delta > 0, "accepted without improvement");
            ENSURE(build_ok && tests_ok, "accepted with failed build/tests");
        } else {
            ENSURE(!d.reasons.empty(), "rejection without a reason");
            for (auto reason : d.reasons) {
                switch (reason) {
                    case exec::GateReason::NewDrcs:
                        ENSURE(*cand.drc_count > *base.drc_count, "wrong NewDrcs reason");
                        break;
                    case exec::GateReason::WnsDegraded:
                        ENSURE(*cand.wns_ns <
                                   *base.wns_ns - config.wns_degradation_threshold_ns,
                               "wrong WnsDegraded reason");
                        break;
                    case exec::GateReason::BuildFailed:
                        ENSURE(!build_ok, "wrong BuildFailed reason");
                        break;
                    case exec::GateReason::TestsFailed:
                        ENSURE(!tests_ok, "wrong TestsFailed reason");
                        break;
                    case exec::GateReason::NoImprovement:
                        ENSURE(d.composite_delta <= 0, "wrong NoImprovement reason");
                        break;
                }
            }
        }
    }
}

// --- criterion 8: bisect bound -------------------------------------------------------

void criterion_bisect() {
    std::mt19937 rng(888111);
    for (size_t n = 1; n <= 1024; ++n) {
        size_t culprit = 1 + rng() % n;
        auto pred = [culprit](size_t len) { return len < culprit; };
        size_t expected = 0;
        for (size_t i = 1; i <= n; ++i)
            if (!pred(i)) {
                expected = i;
                break;
            }
        auto result = exec::bisect(n, pred);
        ENSURE(result.culprit == expected, "bisect result diverges from the linear scan");
        size_t bound = 0;
        while ((size_t{1} << bound) < n) ++bound;  // ceil(log2 n)
        ENSURE(result.probes <= bound + 1, "probe bound exceeded at n=" + std::to_string(n));
    }
}

// --- criterion 9: workspace integrity -------------------------------------------------

void criterion_workspace_integrity() {
    std::mt19937 rng(999222);
    const char* repo_file = "src/dpl/opt.cpp";
    const std::string repo_text =
        "namespace dpl {\nint global_swap(int k) { return k; }\n}\n";

    testutil::TempDir tmp;
    write_file(tmp.path / "repo" / repo_file, repo_text);

    for (int trial = 0; trial < 50; ++trial) {
        localizer::GranularStep step;
        step.id = "step-001";
        step.target_api = "dpl::global_swap";
        step.pre_checks = {localizer::PreCheck::Build};
        step.run_config.design = "d";
        step.run_config.pdk = "Nangate45";
        step.run_config.stage = flow::Stage::Full;
        step.probes = {"routed_wirelength_um"};
        step.post.min_composite_improvement = 0.001;
        step.surface_files = {repo_file};

        flow::FlowRunConfig full = step.run_config;
        flow::FlowRunConfig proxy = step.run_config;
        proxy.stage = flow::Stage::GlobalRoute;

        auto report = [&](double rwl, int64_t drcs) {
            flow::QoRReport r;
            r.design = "d";
            r.routed_wirelength_um = rwl;
            r.drc_count = drcs;
            return r;
        };
        std::string fp0 = flow::baseline_patch_fingerprint();
        flow::FlowFixture fixture;
        fixture.add(proxy, fp0, report(100000, 0));
        fixture.add(full, fp0, report(200000, 0));

        exec::ScriptedCheckRunner checks;
        size_t n_candidates = rng() % 4;  // 0..3
        std::vector<std::string> patches;
        Json script;
        Json candidate_list = Json::array();
        for (size_t c = 0; c < n_candidates; ++c) {
            int kind = static_cast<int>(rng() % 6);
            std::string patch;
            if (kind == 0) {
                // apply failure: patch touches a file outside the surface
                patch = "--- a/elsewhere.cpp\n+++ b/elsewhere.cpp\n@@ -1,1 +1,1 @@\n-x\n+y\n";
            } else {
                patch = "--- a/src/dpl/opt.cpp\n+++ b/src/dpl/opt.cpp\n@@ -2,1 +2,1 @@\n"
                        "-int global_swap(int k) { return k; }\n"
                        "+int global_swap(int k) { return k + " +
                        std::to_string(trial * 10 + static_cast<int>(c) + 1) + "; }\n";
            }
            std::string fp = flow::chain_patch_fingerprint(fp0, patch);
            switch (kind) {
                case 0: break;  // apply failure
                case 1:         // build failure, no repair scripted
                    checks.fail(localizer::PreCheck::Build, fp, "synthetic build break");
                    break;
                case 2: break;  // proxy crash: no fixture entry
                case 3:         // proxy regression
                    fixture.add(proxy, fp, report(100000 + 500 * (c + 1), 0));
                    break;
                case 4:  // proxy + full improve -> commit path
                    fixture.add(proxy, fp, report(99000 - 100 * c, 0));
                    fixture.add(full, fp, report(198000 - 100 * c, 0));
                    break;
                case 5:  // proxy improves, full introduces DRCs
                    fixture.add(proxy, fp, report(98000 - 100 * c, 0));
                    fixture.add(full, fp, report(197000, 3));
                    break;
            }
            candidate_list.push_back(patch);
            patches.push_back(std::move(patch));
        }
        script["steps"]["step-001"]["candidates"] = candidate_list;

        exec::ReplayFlowRunner flow_runner(fixture);
        auto proposer = exec::ScriptedProposer::from_json(script.dump());
        exec::ExecutorOptions opts;
        exec::MetricModel model;
        model.metrics["routed_wirelength_um"] = {1.0, 1.0, true};
        opts.model = model;
        opts.max_repairs = rng() % 2;
        opts.work_dir = tmp.path / ("work" + std::to_string(trial));

        fs::path ws_dir = tmp.path / ("ws" + std::to_string(trial));
        exec::Executor executor(exec::Workspace::init(tmp.path / "repo", ws_dir), flow_runner,
                                checks, proposer, opts);
        auto outcome = executor.run_step(step);

        ENSURE(outcome.final_workspace_hash == executor.committed_checkpoint(),
               "workspace does not sit on the committed checkpoint");
        ENSURE(executor.checkpoints().find(outcome.final_workspace_hash) != nullptr,
               "final hash is not a known checkpoint");
        for (const auto& rec : outcome.candidates)
            for (const auto& [from, to] : rec.transitions)
                ENSURE(exec::valid_candidate_transition(from, to),
                       "illegal candidate state transition");
    }
}

// --- criterion 10: flow-config validation ----------------------------------------------

void criterion_flow_config() {
    struct Row {
        const char* design;
        const char* pdk;
        const char* util;
        const char* lb;      // nullptr when absent
        const char* aspect;  // nullptr when absent
        const char* margin;  // nullptr when absent
    };
    const Row rows[] = {
        {"aes", "ASAP7", "75", "0.2", nullptr, nullptr},
        {"ibex", "ASAP7", "70", "0.2", nullptr, nullptr},
        {"jpeg", "ASAP7", "70", "0.2", nullptr, nullptr},
        {"aes", "SKY130HD", "30", "0.2", nullptr, nullptr},
        {"ibex", "SKY130HD", "50", "0.2", nullptr, nullptr},
        {"jpeg", "SKY130HD", "60", "0.2", nullptr, nullptr},
        {"aes", "Nangate45", "85", "0.2", nullptr, nullptr},
        {"ibex", "Nangate45", "30", "0.2", nullptr, nullptr},
        {"jpeg", "Nangate45", "30", "0.2", nullptr, nullptr},
        {"bp_fe", "Nangate45", "30", "0.11", nullptr, nullptr},
        {"ariane133", "Nangate45", "30", nullptr, "1", "5"},
        {"ariane136", "Nangate45", "30", nullptr, nullptr, nullptr},
        {"swerv_wrapper", "Nangate45", "30", "0.08", "1", "5"},
    };
    for (const auto& row : rows) {
        std::string text;
        text += std::string("DESIGN=") + row.design + "\n";
        text += std::string("PDK=") + row.pdk + "\n";
        text += std::string("CORE_UTIL=") + row.util + "\n";
        if (row.lb) text += std::string("PLACEMENT_LB_ADDON=") + row.lb + "\n";
        if (row.aspect) text += std::string("CORE_ASPECT_RATIO=") + row.aspect + "\n";
        if (row.margin) text += std::string("CORE_MARGIN=") + row.margin + "\n";
        text += "ENABLE_DPO=1\nEQUIVALENCE_CHECK=0\n";
        auto config = flow::parse_flow_config(text);
        ENSURE(config.design == row.design, "design mismatch");
        ENSURE(config.parameters.at("ENABLE_DPO") == "1", "dpo flag lost");
    }

    auto expect_invalid = [](const std::string& line, const std::string& key) {
        try {
            flow::parse_flow_config(line);
        } catch (const flow::InvalidParameter& e) {
            ENSURE(std::string(e.what()).find(key) != std::string::npos,
                   "error does not name " + key);
            return;
        }
        throw Failure("expected InvalidParameter for " + line);
    };
    expect_invalid("CORE_UTIL=0\n", "CORE_UTIL");
    expect_invalid("ENABLE_DPO=2\n", "ENABLE_DPO");
    expect_invalid("CORE_MARGIN=-1\n", "CORE_MARGIN");
}

}  // namespace

int main() {
    const Check checks[] = {
        {"1 Table-2 delta reproduction (12 rows, +/-0.01 pp)", 1.0, criterion_table2},
        {"2 Table-4 delta reproduction (4 rows, +/-0.25 pp)", 1.0, criterion_table4},
        {"3 end-to-end replay commit (delta 0.0549, workspace hash)", 10.0,
         criterion_end_to_end},
        {"4 graph properties (SCC oracle x100, acyclicity, 3-run determinism)", 60.0,
         criterion_graph_properties},
        {"5 docmaker soundness (schedule x100, card closure, ApiMissing)", 30.0,
         criterion_docmaker},
        {"6 retrieval equivalence (rebuild x100, BM25 oracle x20, structural)", 60.0,
         criterion_retrieval},
        {"7 gate safety (10^4 randomized triples)", 30.0, criterion_gate_safety},
        {"8 bisect bound (n = 1..1024 vs linear scan)", 30.0, criterion_bisect},
        {"9 workspace integrity (50 randomized run_step scenarios)", 60.0,
         criterion_workspace_integrity},
        {"10 flow-config validation (Table 1 + constraint violations)", 1.0,
         criterion_flow_config},
    };

    int failures = 0;
    for (const auto& check : checks) {
        auto start = std::chrono::steady_clock::now();
        std::string error;
        try {
            check.body();
        } catch (const std::exception& e) {
            error = e.what();
        }
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool timed_out = elapsed > check.budget_seconds;
        if (error.empty() && !timed_out) {
            std::printf("[PASS] criterion %s (%.2fs)\n", check.name, elapsed);
        } else {
            ++failures;
            std::printf("[FAIL] criterion %s (%.2fs)%s%s\n", check.name, elapsed,
                        timed_out ? " [over budget]" : "",
                        error.empty() ? "" : (": " + error).c_str());
        }
    }
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
