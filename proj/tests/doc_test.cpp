#include <doctest.h>

#include <random>

#include "qorpilot/doc/docmaker.hpp"
#include "test_util.hpp"

using namespace qorpilot;
using namespace qorpilot::doc;
using namespace qorpilot::graph;

namespace {

std::filesystem::path docrepo() { return testutil::fixture_dir() / "docrepo"; }

CodeGraph condensed_docrepo() { return condense_sccs(build_graph(docrepo())); }

NodeId find_node(const CodeGraph& g, std::string_view qname, NodeKind kind) {
    for (const auto& [id, n] : g.nodes)
        if (n.qualified_name == qname && n.kind == kind) return id;
    REQUIRE(false);
    return {};
}

// Runs the full docmaker pass with the fallback synthesizer.
CardStore full_run(const CodeGraph& g) {
    CardStore store;
    ExtractiveSynthesizer synth;
    auto result = run_docmaker(g, docrepo(), store, synth);
    REQUIRE(result.failed.empty());
    return store;
}

struct RiggedSynthesizer : Synthesizer {
    Json extra;  // merged over the fallback's sections
    ExtractiveSynthesizer fallback;
    SynthesizerResponse synthesize(const SynthesizerRequest& request) override {
        auto rsp = fallback.synthesize(request);
        for (const auto& [k, v] : extra.items()) rsp.sections[k] = v;
        return rsp;
    }
};

}  // namespace

TEST_CASE("evidence: assertions, default params, flags") {
    auto g = condensed_docrepo();
    CardStore store;
    ExtractiveSynthesizer synth;
    run_docmaker(g, docrepo(), store, synth);

    NodeId clamp = find_node(g, "dpl::clamp_disp", NodeKind::Definition);
    auto ev = extract_evidence(g, clamp, store, docrepo());
    REQUIRE(ev.assertions.size() == 1);
    CHECK(ev.assertions[0] == "x > 0");
    CHECK(ev.neighbors.empty());  // leaf

    NodeId swap = find_node(g, "dpl::global_swap", NodeKind::Definition);
    auto ev2 = extract_evidence(g, swap, store, docrepo());
    REQUIRE(ev2.default_params.size() == 1);
    CHECK(ev2.default_params[0] == std::pair<std::string, std::string>{"k", "8"});
    REQUIRE(ev2.neighbors.size() == 1);
    CHECK(ev2.neighbors[0].first == clamp);
    CHECK(ev2.neighbors[0].second == "Defines dpl::clamp_disp(int x)");

    NodeId place = find_node(g, "detailed_place", NodeKind::Definition);
    auto ev3 = extract_evidence(g, place, store, docrepo());
    bool flag_found = false;
    for (const auto& f : ev3.config_flags)
        if (f.name == "-max_displacement" && f.default_value == "64") flag_found = true;
    CHECK(flag_found);
    REQUIRE(ev3.default_params.size() == 1);
    CHECK(ev3.default_params[0] == std::pair<std::string, std::string>{"max_disp", "64"});
}

TEST_CASE("evidence extraction requires callee cards") {
    auto g = condensed_docrepo();
    CardStore empty_store;
    NodeId swap = find_node(g, "dpl::global_swap", NodeKind::Definition);
    CHECK_THROWS_AS(extract_evidence(g, swap, empty_store, docrepo()), MissingDependencyCard);
}

TEST_CASE("schedule: chain, empty relation, scc") {
    SUBCASE("chain a calls b calls c -> [c, b, a]") {
        std::vector<NodeId> ids;
        auto g = testutil::synthetic_graph(3, {{0, 1}, {1, 2}}, &ids);
        auto order = schedule(condense_sccs(g));
        REQUIRE(order.size() == 3);
        CHECK(order[0] == ids[2]);
        CHECK(order[1] == ids[1]);
        CHECK(order[2] == ids[0]);
    }
    SUBCASE("no calls edges -> ascending id") {
        auto g = testutil::synthetic_graph(5, {});
        auto order = schedule(condense_sccs(g));
        REQUIRE(order.size() == 5);
        CHECK(std::is_sorted(order.begin(), order.end()));
    }
    SUBCASE("condensed scc {a,b} called by m -> [group, m]") {
        std::vector<NodeId> ids;
        auto g = testutil::synthetic_graph(3, {{0, 1}, {1, 0}, {2, 0}}, &ids);
        auto c = condense_sccs(g);
        auto order = schedule(c);
        REQUIRE(order.size() == 2);
        CHECK(c.nodes.at(order[0]).kind == NodeKind::SccGroup);
        CHECK(order[1] == ids[2]);
    }
    SUBCASE("uncondensed graph throws") {
        auto g = testutil::synthetic_graph(2, {{0, 1}});
        CHECK_THROWS_AS(schedule(g), NotCondensed);
    }
}

TEST_CASE("schedule soundness on random DAGs") {
    std::mt19937 rng(77);
    for (int trial = 0; trial < 25; ++trial) {
        size_t n = 2 + rng() % 80;
        std::vector<std::pair<size_t, size_t>> calls;
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j)
                if (rng() % 7 == 0) calls.emplace_back(i, j);  // i calls j, indexwise DAG
        auto g = testutil::synthetic_graph(n, calls);
        g.condensed = true;  // already acyclic by construction
        auto order = schedule(g);
        REQUIRE(order.size() == n);
        std::map<NodeId, size_t> pos;
        for (size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
        for (const auto& e : g.edges)
            if (e.kind == EdgeKind::Calls) CHECK(pos[e.dst] < pos[e.src]);
    }
}

TEST_CASE("fallback synthesis: exact deterministic outputs") {
    auto g = condensed_docrepo();
    auto store = full_run(g);

    NodeId swap = find_node(g, "dpl::global_swap", NodeKind::Definition);
    const DocCard* card = store.find(swap);
    REQUIRE(card);
    CHECK(card->role == "Defines dpl::global_swap(int k = 8)");
    REQUIRE(card->inputs_outputs.size() == 2);
    CHECK(card->inputs_outputs[0].name == "k");
    CHECK(card->inputs_outputs[0].direction == "in");
    CHECK(card->inputs_outputs[1].name == "return");
    CHECK(card->inputs_outputs[1].direction == "out");
    REQUIRE(card->config_knobs.size() == 1);
    CHECK(card->config_knobs[0].name == "k");
    CHECK(card->config_knobs[0].default_value == "8");
    CHECK(card->referenced_apis == std::vector<std::string>{"dpl::clamp_disp"});

    // file card: role from the path stem, no io
    NodeId file = find_node(g, "dpl.tcl", NodeKind::File);
    const DocCard* fcard = store.find(file);
    REQUIRE(fcard);
    CHECK(fcard->role == "Implements module dpl");
    CHECK(fcard->inputs_outputs.empty());
}

TEST_CASE("synthesizer returning an extra unknown section is a SchemaViolation") {
    auto g = condensed_docrepo();
    auto store = full_run(g);
    NodeId clamp = find_node(g, "dpl::clamp_disp", NodeKind::Definition);
    auto ev = extract_evidence(g, clamp, store, docrepo());

    RiggedSynthesizer rigged;
    rigged.extra["surprise"] = "nope";
    CHECK_THROWS_AS(synthesize_card(ev, rigged, card_subject(g, clamp)), SchemaViolation);
}

TEST_CASE("validate_card catches the spec'd violation kinds") {
    auto g = condensed_docrepo();
    auto store = full_run(g);
    NodeId swap = find_node(g, "dpl::global_swap", NodeKind::Definition);
    DocCard card = *store.find(swap);

    SUBCASE("freshly synthesized fallback card is valid") {
        auto ev = extract_evidence(g, swap, store, docrepo());
        CHECK(validate_card(card, g, &ev).empty());
    }
    SUBCASE("nonexistent referenced api") {
        card.referenced_apis.push_back("foo::bar");
        auto v = validate_card(card, g);
        REQUIRE(v.size() == 1);
        CHECK(v[0].kind == ViolationKind::ApiMissing);
    }
    SUBCASE("empty role") {
        card.role.clear();
        auto v = validate_card(card, g);
        REQUIRE(v.size() == 1);
        CHECK(v[0].kind == ViolationKind::EmptyRole);
    }
    SUBCASE("knob matching no extracted flag") {
        auto ev = extract_evidence(g, swap, store, docrepo());
        card.config_knobs.push_back({"-invented", "1", ""});
        auto v = validate_card(card, g, &ev);
        REQUIRE(v.size() == 1);
        CHECK(v[0].kind == ViolationKind::UnknownKnob);
    }
    SUBCASE("arity mismatch") {
        card.inputs_outputs.push_back({"extra", "in", "int extra"});
        auto v = validate_card(card, g);
        REQUIRE(v.size() == 1);
        CHECK(v[0].kind == ViolationKind::ArityMismatch);
    }
}

TEST_CASE("card closure: full fallback run validates clean") {
    auto g = condensed_docrepo();
    auto store = full_run(g);
    CHECK(store.size() > 0);
    for (const auto& [id, card] : store.all()) CHECK(validate_card(card, g).empty());
}

TEST_CASE("card render/parse round trip, canonical bytes, malformed input") {
    auto g = condensed_docrepo();
    auto store = full_run(g);
    for (const auto& [id, card] : store.all()) {
        std::string bytes = render_card(card);
        CHECK(render_card(card) == bytes);
        DocCard back = parse_card(bytes);
        CHECK(back == card);
    }
    CHECK_THROWS_AS(parse_card("{\"role\":\"x\"}"), MalformedCardFile);  // no subject
    CHECK_THROWS_AS(parse_card("not json"), MalformedCardFile);
}

TEST_CASE("card store round trips through a directory") {
    auto g = condensed_docrepo();
    auto store = full_run(g);
    testutil::TempDir tmp;
    store.save(tmp.path);
    auto loaded = CardStore::load(tmp.path);
    REQUIRE(loaded.size() == store.size());
    for (const auto& [id, card] : store.all()) {
        REQUIRE(loaded.find(id));
        CHECK(*loaded.find(id) == card);
    }
}

TEST_CASE("staleness: mutating any evidence field changes the checksum") {
    EvidenceBundle base;
    base.subject = md5("subject");
    base.signatures = {"int f(int)"};
    base.default_params = {{"k", "8"}};
    base.assertions = {"x > 0"};
    base.config_flags = {{"-flag", "1", {0, 5}}};
    base.error_messages = {"boom"};
    base.neighbors = {{md5("n"), "Defines n()"}};
    Hash128 h0 = evidence_checksum(base);

    auto mutated = base;
    mutated.signatures.push_back("more");
    CHECK(evidence_checksum(mutated) != h0);
    mutated = base;
    mutated.default_params[0].second = "9";
    CHECK(evidence_checksum(mutated) != h0);
    mutated = base;
    mutated.assertions.clear();
    CHECK(evidence_checksum(mutated) != h0);
    mutated = base;
    mutated.config_flags[0].name = "-other";
    CHECK(evidence_checksum(mutated) != h0);
    mutated = base;
    mutated.error_messages[0] = "bang";
    CHECK(evidence_checksum(mutated) != h0);
    mutated = base;
    mutated.neighbors[0].second = "Defines m()";
    CHECK(evidence_checksum(mutated) != h0);
    mutated = base;
    mutated.subject = md5("other");
    CHECK(evidence_checksum(mutated) != h0);
}

TEST_CASE("incremental docmaker equals full regeneration") {
    testutil::TempDir tmp;
    copy_tree(docrepo(), tmp.path);
    auto g0 = build_graph(tmp.path);
    auto c0 = condense_sccs(g0);
    CardStore store;
    ExtractiveSynthesizer synth;
    REQUIRE(run_docmaker(c0, tmp.path, store, synth).failed.empty());

    // edit the leaf: clamp_disp gains a second assertion
    write_file(tmp.path / "dpl.cpp",
               "#include \"dpl.h\"\n#include <cassert>\n\nnamespace dpl {\n\nint "
               "clamp_disp(int x) {\n  assert(x > 0);\n  assert(x < 4096);\n  return x;\n}\n\n"
               "int global_swap(int k = 8) { return clamp_disp(k); }\n\n}\n");

    auto [g1, dirty] = incremental_update(g0, {"dpl.cpp"}, tmp.path);
    auto c1 = condense_sccs(g1);
    auto subset = map_to_condensed(c1, dirty);
    REQUIRE(run_docmaker(c1, tmp.path, store, synth, &subset).failed.empty());

    CardStore fresh;
    REQUIRE(run_docmaker(c1, tmp.path, fresh, synth).failed.empty());

    // prune cards for nodes that no longer exist, then compare bytes
    REQUIRE(fresh.size() > 0);
    for (const auto& [id, card] : fresh.all()) {
        const DocCard* incr = store.find(id);
        REQUIRE(incr);
        CHECK(render_card(*incr) == render_card(card));
    }
}
