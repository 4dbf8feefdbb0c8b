#include <doctest.h>

#include <algorithm>
#include <random>

#include "qorpilot/graph/codegraph.hpp"
#include "qorpilot/support/glob.hpp"
#include "test_util.hpp"

using namespace qorpilot;
using namespace qorpilot::graph;

namespace {

size_t count_edges(const CodeGraph& g, EdgeKind kind) {
    size_t n = 0;
    for (const auto& e : g.edges)
        if (e.kind == kind) ++n;
    return n;
}

const GraphEdge* find_edge(const CodeGraph& g, EdgeKind kind) {
    for (const auto& e : g.edges)
        if (e.kind == kind) return &e;
    return nullptr;
}

}  // namespace

TEST_CASE("mini fixture: counts per the committed layout") {
    BuildDiagnostics diag;
    auto g = build_graph(testutil::fixture_dir() / "mini", {}, &diag);

    size_t files = 0, entities = 0;
    for (const auto& [id, n] : g.nodes) {
        if (n.kind == NodeKind::File) ++files;
        else ++entities;
    }
    CHECK(files == 3);
    CHECK(entities >= 4);

    REQUIRE(count_edges(g, EdgeKind::Calls) == 1);
    const GraphEdge* call = find_edge(g, EdgeKind::Calls);
    CHECK(g.nodes.at(call->src).qualified_name == "g");
    CHECK(g.nodes.at(call->dst).qualified_name == "f");
    CHECK(g.nodes.at(call->dst).kind == NodeKind::Definition);

    CHECK(count_edges(g, EdgeKind::Includes) == 1);
    CHECK(g.endpoints_closed());
    CHECK_FALSE(g.condensed);
}

TEST_CASE("empty directory raises EmptyRepository") {
    testutil::TempDir tmp;
    CHECK_THROWS_AS(build_graph(tmp.path), EmptyRepository);
}

TEST_CASE("build determinism: same fixture parsed twice is byte-identical") {
    auto a = serialize(build_graph(testutil::fixture_dir() / "mini"));
    auto b = serialize(build_graph(testutil::fixture_dir() / "mini"));
    CHECK(a == b);
}

TEST_CASE("every file node contains every non-file node of its path") {
    auto g = build_graph(testutil::fixture_dir() / "mini");
    std::map<std::string, NodeId> file_ids;
    for (const auto& [id, n] : g.nodes)
        if (n.kind == NodeKind::File) file_ids[n.path] = id;
    for (const auto& [id, n] : g.nodes) {
        if (n.kind == NodeKind::File) continue;
        bool contained = false;
        for (const auto& e : g.edges)
            if (e.kind == EdgeKind::Contains && e.src == file_ids.at(n.path) && e.dst == id)
                contained = true;
        CHECK(contained);
    }
}

TEST_CASE("link_scripts: one registration, one script invocation") {
    LinkTally tally;
    auto g = build_graph(testutil::fixture_dir() / "linkrepo");
    auto linked = link_scripts(g, default_registration_patterns(), &tally);

    CHECK(tally.edges_added == 1);
    CHECK(tally.skipped_nonliteral == 1);  // the computed_name registration
    REQUIRE(count_edges(linked, EdgeKind::ScriptInvokes) == 1);
    const GraphEdge* e = find_edge(linked, EdgeKind::ScriptInvokes);
    const GraphNode& src = linked.nodes.at(e->src);
    const GraphNode& dst = linked.nodes.at(e->dst);
    CHECK(src.kind == NodeKind::Callsite);
    CHECK(src.language == Language::Tcl);
    CHECK(src.qualified_name == "detailed_place");
    CHECK(dst.kind == NodeKind::Definition);
    CHECK(dst.qualified_name == "dpMain");

    // everything except the new edges is unchanged
    CHECK(linked.nodes.size() == g.nodes.size());
    CHECK(linked.edges.size() == g.edges.size() + 1);
}

TEST_CASE("link_scripts: graph with no script files is unchanged, tally 0") {
    testutil::TempDir tmp;
    write_file(tmp.path / "only.cpp", "int a() { return 1; }\n");
    auto g = build_graph(tmp.path);
    LinkTally tally;
    auto linked = link_scripts(g, default_registration_patterns(), &tally);
    CHECK(tally.edges_added == 0);
    CHECK(serialize(linked) == serialize(g));
}

TEST_CASE("condense: simple cycle plus tail") {
    // a->b, b->c, c->a, c->d
    std::vector<NodeId> ids;
    auto g = testutil::synthetic_graph(4, {{0, 1}, {1, 2}, {2, 0}, {2, 3}}, &ids);
    auto c = condense_sccs(g);
    CHECK(c.condensed);

    size_t groups = 0;
    const GraphNode* group = nullptr;
    for (const auto& [id, n] : c.nodes)
        if (n.kind == NodeKind::SccGroup) {
            ++groups;
            group = &n;
        }
    REQUIRE(groups == 1);
    REQUIRE(group->members.size() == 3);
    std::set<NodeId> members(group->members.begin(), group->members.end());
    CHECK(members == std::set<NodeId>{ids[0], ids[1], ids[2]});

    REQUIRE(count_edges(c, EdgeKind::Calls) == 1);
    const GraphEdge* e = find_edge(c, EdgeKind::Calls);
    CHECK(e->src == group->id);
    CHECK(e->dst == ids[3]);
    CHECK(c.nodes.size() == 2);  // group + d
}

TEST_CASE("condense: acyclic graph only flips the flag") {
    auto g = testutil::synthetic_graph(3, {{0, 1}, {1, 2}});
    auto c = condense_sccs(g);
    CHECK(c.condensed);
    CHECK(c.nodes.size() == 3);
    for (const auto& [id, n] : c.nodes) CHECK(n.kind != NodeKind::SccGroup);
    CHECK(count_edges(c, EdgeKind::Calls) == 2);
}

TEST_CASE("condense: single self-calling node becomes a size-1 group") {
    std::vector<NodeId> ids;
    auto g = testutil::synthetic_graph(1, {{0, 0}}, &ids);
    auto c = condense_sccs(g);
    REQUIRE(c.nodes.size() == 1);
    const GraphNode& n = c.nodes.begin()->second;
    CHECK(n.kind == NodeKind::SccGroup);
    CHECK(n.members == std::vector<NodeId>{ids[0]});
    CHECK(count_edges(c, EdgeKind::Calls) == 0);
}

TEST_CASE("condense twice throws AlreadyCondensed") {
    auto g = testutil::synthetic_graph(2, {{0, 1}});
    auto c = condense_sccs(g);
    CHECK_THROWS_AS(condense_sccs(c), AlreadyCondensed);
}

TEST_CASE("scc condensation equals the brute-force oracle on random digraphs") {
    std::mt19937 rng(1234);
    for (int trial = 0; trial < 40; ++trial) {
        size_t n = 2 + rng() % 60;
        std::vector<std::pair<size_t, size_t>> calls;
        size_t m = rng() % (3 * n);
        for (size_t i = 0; i < m; ++i) calls.emplace_back(rng() % n, rng() % n);
        auto g = testutil::synthetic_graph(n, calls);
        auto expected = testutil::scc_oracle(g);
        auto c = condense_sccs(g);

        std::set<NodeId> self_callers;
        for (const auto& e : g.edges)
            if (e.kind == EdgeKind::Calls && e.src == e.dst) self_callers.insert(e.src);

        std::set<std::set<NodeId>> expected_groups;
        for (auto& grp : expected)
            if (grp.size() >= 2 || (grp.size() == 1 && self_callers.count(grp[0])))
                expected_groups.insert(std::set<NodeId>(grp.begin(), grp.end()));
        std::set<std::set<NodeId>> got_groups;
        for (const auto& [id, node] : c.nodes)
            if (node.kind == NodeKind::SccGroup)
                got_groups.insert(std::set<NodeId>(node.members.begin(), node.members.end()));
        CHECK(got_groups == expected_groups);

        // acyclicity of the calls projection via repeated sink elimination
        std::map<NodeId, size_t> outdeg;
        std::multimap<NodeId, NodeId> radj;
        for (const auto& [id, node] : c.nodes) outdeg[id] = 0;
        for (const auto& e : c.edges) {
            if (e.kind != EdgeKind::Calls) continue;
            outdeg[e.src]++;
            radj.emplace(e.dst, e.src);
        }
        std::vector<NodeId> queue;
        for (auto& [id, d] : outdeg)
            if (d == 0) queue.push_back(id);
        size_t seen = 0;
        while (!queue.empty()) {
            NodeId id = queue.back();
            queue.pop_back();
            ++seen;
            auto [lo, hi] = radj.equal_range(id);
            for (auto it = lo; it != hi; ++it)
                if (--outdeg[it->second] == 0) queue.push_back(it->second);
        }
        CHECK(seen == c.nodes.size());
    }
}

TEST_CASE("sparsify keeps top-K by weight with id tie-break") {
    std::vector<NodeId> ids;
    auto g = testutil::synthetic_graph(6, {}, &ids);
    for (size_t i = 1; i <= 5; ++i)
        g.edges.push_back({ids[0], ids[i], EdgeKind::Calls, static_cast<double>(6 - i)});
    g.canonicalize_edges();
    g.condensed = true;  // synthetic: already acyclic

    auto s = sparsify(g, 3, 0.0);
    REQUIRE(count_edges(s, EdgeKind::Calls) == 3);
    std::set<double> weights;
    for (const auto& e : s.edges) weights.insert(e.weight);
    CHECK(weights == std::set<double>{5.0, 4.0, 3.0});

    SUBCASE("identity parameters leave the graph unchanged") {
        auto id_out = sparsify(g, kNoDegreeCap, 0.0);
        CHECK(serialize(id_out) == serialize(g));
    }
}

TEST_CASE("sparsify tie at the last slot keeps the lower dst id") {
    std::vector<NodeId> ids;
    auto g = testutil::synthetic_graph(4, {}, &ids);
    // two edges tied at weight 2 competing for the single slot
    g.edges.push_back({ids[0], ids[1], EdgeKind::Calls, 2.0});
    g.edges.push_back({ids[0], ids[2], EdgeKind::Calls, 2.0});
    g.canonicalize_edges();
    g.condensed = true;

    auto s = sparsify(g, 1, 0.0);
    REQUIRE(count_edges(s, EdgeKind::Calls) == 1);
    const GraphEdge* e = find_edge(s, EdgeKind::Calls);
    CHECK(e->dst == std::min(ids[1], ids[2]));
}

TEST_CASE("sparsify never prunes contains edges and respects min_weight") {
    std::vector<NodeId> ids;
    auto g = testutil::synthetic_graph(3, {}, &ids);
    g.edges.push_back({ids[0], ids[1], EdgeKind::Contains, 0.001});
    g.edges.push_back({ids[0], ids[2], EdgeKind::Calls, 0.5});
    g.canonicalize_edges();
    g.condensed = true;
    auto s = sparsify(g, kNoDegreeCap, 1.0);
    CHECK(count_edges(s, EdgeKind::Contains) == 1);
    CHECK(count_edges(s, EdgeKind::Calls) == 0);
}

TEST_CASE("sparsify on uncondensed graph throws") {
    auto g = testutil::synthetic_graph(2, {{0, 1}});
    CHECK_THROWS_AS(sparsify(g, 2, 0.0), NotCondensed);
}

TEST_CASE("filter_nodes removes matching paths with incident edges") {
    testutil::TempDir tmp;
    write_file(tmp.path / "src/a.cpp", "int keep_me() { return 0; }\n");
    write_file(tmp.path / "third_party/vendored.cpp", "int vend() { return 0; }\n");
    auto g = build_graph(tmp.path);

    FilterDiagnostics diag;
    auto f = filter_nodes(g, {"third_party/**", "**/test/**"}, &diag);
    CHECK(diag.removed_per_pattern[0].first == "third_party/**");
    CHECK(diag.removed_per_pattern[0].second >= 2);  // file + definition
    CHECK(diag.removed_per_pattern[1].second == 0);
    for (const auto& [id, n] : f.nodes) CHECK(n.path.find("third_party") == std::string::npos);
    CHECK(f.endpoints_closed());

    SUBCASE("empty pattern list is identity") {
        auto same = filter_nodes(g, {});
        CHECK(serialize(same) == serialize(g));
    }
    SUBCASE("pattern matching nothing is identity with count 0") {
        FilterDiagnostics d2;
        auto same = filter_nodes(g, {"nonexistent/**"}, &d2);
        CHECK(serialize(same) == serialize(g));
        CHECK(d2.removed_per_pattern[0].second == 0);
    }
    SUBCASE("malformed glob throws InvalidGlob") {
        CHECK_THROWS_AS(filter_nodes(g, {"bad[glob"}), InvalidGlob);
    }
}

TEST_CASE("serialize / deserialize round trip and canonicality") {
    auto g = build_graph(testutil::fixture_dir() / "mini");
    std::string bytes = serialize(g);
    CHECK(serialize(g) == bytes);  // canonical: twice is byte-identical

    auto back = deserialize(bytes);
    CHECK(back.repo_fingerprint == g.repo_fingerprint);
    CHECK(back.condensed == g.condensed);
    CHECK(back.nodes.size() == g.nodes.size());
    CHECK(back.edges == g.edges);
    for (const auto& [id, n] : g.nodes) CHECK(back.nodes.at(id) == n);
    CHECK(serialize(back) == bytes);
}

TEST_CASE("deserialize rejects truncated and malformed input") {
    auto g = build_graph(testutil::fixture_dir() / "mini");
    std::string bytes = serialize(g);
    CHECK_THROWS_AS(deserialize(bytes.substr(0, bytes.size() / 2)), MalformedGraphFile);
    CHECK_THROWS_AS(deserialize("{}"), MalformedGraphFile);
    CHECK_THROWS_AS(deserialize("not json"), MalformedGraphFile);
}

TEST_CASE("incremental: empty change list returns the identical graph") {
    auto g = build_graph(testutil::fixture_dir() / "mini");
    auto [g2, dirty] = incremental_update(g, {}, testutil::fixture_dir() / "mini");
    CHECK(dirty.empty());
    CHECK(serialize(g2) == serialize(g));
}

TEST_CASE("incremental: unknown file throws") {
    auto g = build_graph(testutil::fixture_dir() / "mini");
    CHECK_THROWS_AS(incremental_update(g, {"no/such.cpp"}, testutil::fixture_dir() / "mini"),
                    UnknownFile);
}

TEST_CASE("incremental: leaf edit dirties the definition and its callers") {
    testutil::TempDir tmp;
    copy_tree(testutil::fixture_dir() / "mini", tmp.path);
    auto g = build_graph(tmp.path);

    // edit the leaf: f's body changes but g (its caller) is untouched
    write_file(tmp.path / "impl.cpp",
               "#include \"util.h\"\n\nint f(int x) { return x + 2; }\n\nint g(int x) { "
               "return f(x) * 2; }\n");
    auto [g2, dirty] = incremental_update(g, {"impl.cpp"}, tmp.path);

    auto full = build_graph(tmp.path);
    CHECK(serialize(g2) == serialize(full));

    bool f_dirty = false, g_dirty = false;
    for (NodeId id : dirty) {
        const GraphNode* n = g2.find(id);
        if (!n) continue;
        if (n->qualified_name == "f" && n->kind == NodeKind::Definition) f_dirty = true;
        if (n->qualified_name == "g" && n->kind == NodeKind::Definition) g_dirty = true;
    }
    CHECK(f_dirty);
    CHECK(g_dirty);
}

TEST_CASE("incremental: cross-file edit equals full rebuild outside dirty") {
    testutil::TempDir tmp;
    write_file(tmp.path / "a.cpp", "int base(int v) { return v; }\n");
    write_file(tmp.path / "b.cpp", "int base(int v);\nint user(int v) { return base(v); }\n");
    write_file(tmp.path / "c.cpp", "int unrelated() { return 7; }\n");
    auto g = build_graph(tmp.path);

    write_file(tmp.path / "a.cpp", "// moved\nint base(int v) { return v * 3; }\n");
    auto [g2, dirty] = incremental_update(g, {"a.cpp"}, tmp.path);
    auto full = build_graph(tmp.path);
    CHECK(serialize(g2) == serialize(full));

    // untouched c.cpp nodes are bit-identical and not dirty
    for (const auto& [id, n] : g2.nodes) {
        if (n.path != "c.cpp") continue;
        CHECK(g.nodes.count(id) == 1);
        CHECK_FALSE(dirty.count(id));
    }
    // user's definition (1-hop caller of base) is dirty
    bool user_dirty = false;
    for (NodeId id : dirty) {
        const GraphNode* n = g2.find(id);
        if (n && n->qualified_name == "user") user_dirty = true;
    }
    CHECK(user_dirty);
}

TEST_CASE("incremental: deleting a file removes its nodes and dirties callers") {
    testutil::TempDir tmp;
    write_file(tmp.path / "a.cpp", "int base(int v) { return v; }\n");
    write_file(tmp.path / "b.cpp", "int user(int v) { return base(v); }\n");
    auto g = build_graph(tmp.path);

    std::filesystem::remove(tmp.path / "a.cpp");
    auto [g2, dirty] = incremental_update(g, {"a.cpp"}, tmp.path);

    for (const auto& [id, n] : g2.nodes) CHECK(n.path != "a.cpp");
    bool user_dirty = false;
    for (NodeId id : dirty) {
        const GraphNode* n = g2.find(id);
        if (n && n->qualified_name == "user") user_dirty = true;
    }
    CHECK(user_dirty);
    CHECK(serialize(g2) == serialize(build_graph(tmp.path)));
}

TEST_CASE("full pipeline determinism across runs") {
    auto run = [] {
        auto g = build_graph(testutil::fixture_dir() / "linkrepo");
        auto linked = link_scripts(g, default_registration_patterns());
        auto condensed = condense_sccs(linked);
        auto sparse = sparsify(condensed, 32, 0.0);
        auto filtered = filter_nodes(sparse, {"**/skip/**"});
        return serialize(filtered);
    };
    auto a = run();
    auto b = run();
    CHECK(a == b);
}

TEST_CASE("binds edges connect definitions to file-scope variables") {
    testutil::TempDir tmp;
    write_file(tmp.path / "conf.cpp",
               "static int max_iters = 40;\nint loop() { return max_iters + max_iters; }\n");
    auto g = build_graph(tmp.path);
    REQUIRE(count_edges(g, EdgeKind::Binds) == 1);
    const GraphEdge* e = find_edge(g, EdgeKind::Binds);
    CHECK(g.nodes.at(e->src).qualified_name == "loop");
    CHECK(g.nodes.at(e->dst).qualified_name == "max_iters");
    CHECK(e->weight == 2.0);
}
