// Python bindings for the main operations: graph construction and
// transforms, card generation, hybrid search, QoR parsing and deltas,
// composite gating, and bisection.
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qorpilot/doc/docmaker.hpp"
#include "qorpilot/exec/executor.hpp"
#include "qorpilot/retrieval/index.hpp"
#include "qorpilot/planner/planner.hpp"
#include "qorpilot/cli/cli.hpp"

namespace py = pybind11;
using namespace qorpilot;

namespace {

graph::CodeGraph build_graph_py(const std::string& repo, bool link, bool condense,
                                size_t max_out_degree, double min_weight,
                                const std::vector<std::string>& exclude) {
    auto g = graph::build_graph(repo);
    if (link) g = graph::link_scripts(g, graph::default_registration_patterns());
    if (condense) {
        g = graph::condense_sccs(g);
        g = graph::sparsify(g, max_out_degree == 0 ? graph::kNoDegreeCap : max_out_degree,
                            min_weight);
    }
    if (!exclude.empty()) g = graph::filter_nodes(g, exclude);
    return g;
}

py::dict gate_py(const std::string& candidate_json, const std::string& baseline_json,
                 bool build_ok, bool tests_ok, const std::map<std::string, double>& weights,
                 double wns_threshold) {
    auto candidate = flow::parse_qor_json(candidate_json);
    auto baseline = flow::parse_qor_json(baseline_json);
    exec::MetricModel model;
    for (const auto& [field, weight] : weights)
        model.metrics[field] = {weight, 1.0, field != "wns_ns" && field != "tns_ns"};
    exec::GateConfig config;
    config.wns_degradation_threshold_ns = wns_threshold;
    auto decision = exec::gate(candidate, baseline, build_ok, tests_ok, model, config);
    py::dict out;
    out["accepted"] = decision.accepted;
    out["composite_delta"] = decision.composite_delta;
    py::list reasons;
    for (auto r : decision.reasons) reasons.append(std::string(exec::gate_reason_name(r)));
    out["reasons"] = reasons;
    py::list warnings;
    for (const auto& w : decision.warnings) warnings.append(w);
    out["warnings"] = warnings;
    return out;
}

}  // namespace

PYBIND11_MODULE(_qorpilot, m) {
    m.doc() = "repository property graphs, doc cards, hybrid retrieval and QoR-gated "
              "execution primitives";
    m.attr("__version__") = cli::kToolVersion;

    py::register_exception<Error>(m, "QorpilotError");

    // --- graph -----------------------------------------------------------
    py::class_<graph::CodeGraph>(m, "CodeGraph")
        .def_property_readonly("condensed",
                               [](const graph::CodeGraph& g) { return g.condensed; })
        .def_property_readonly("repo_fingerprint",
                               [](const graph::CodeGraph& g) { return g.repo_fingerprint; })
        .def("node_count", [](const graph::CodeGraph& g) { return g.nodes.size(); })
        .def("edge_count", [](const graph::CodeGraph& g) { return g.edges.size(); })
        .def("serialize", [](const graph::CodeGraph& g) { return graph::serialize(g); })
        .def("nodes",
             [](const graph::CodeGraph& g) {
                 py::list out;
                 for (const auto& [id, node] : g.nodes) {
                     py::dict n;
                     n["id"] = id.to_hex();
                     n["kind"] = std::string(graph::node_kind_name(node.kind));
                     n["language"] = std::string(syntax::language_name(node.language));
                     n["path"] = node.path;
                     n["qualified_name"] = node.qualified_name;
                     n["span"] = py::make_tuple(node.span.start, node.span.end);
                     out.append(n);
                 }
                 return out;
             })
        .def("edges", [](const graph::CodeGraph& g) {
            py::list out;
            for (const auto& e : g.edges) {
                py::dict j;
                j["src"] = e.src.to_hex();
                j["dst"] = e.dst.to_hex();
                j["kind"] = std::string(graph::edge_kind_name(e.kind));
                j["weight"] = e.weight;
                out.append(j);
            }
            return out;
        });

    m.def("build_graph", &build_graph_py, py::arg("repo"), py::arg("link") = true,
          py::arg("condense") = true, py::arg("max_out_degree") = 32,
          py::arg("min_weight") = 0.0, py::arg("exclude") = std::vector<std::string>{},
          "Parse a repository into its property graph (optionally linked, condensed, "
          "sparsified and filtered).");
    m.def("deserialize_graph",
          [](const std::string& bytes) { return graph::deserialize(bytes); });
    m.def("schedule", [](const graph::CodeGraph& g) {
        py::list out;
        for (auto id : doc::schedule(g)) out.append(id.to_hex());
        return out;
    });

    // --- cards -----------------------------------------------------------
    m.def(
        "generate_cards",
        [](const std::string& repo) {
            auto g = build_graph_py(repo, true, true, 32, 0.0, {});
            doc::CardStore store;
            doc::ExtractiveSynthesizer synth;
            auto result = doc::run_docmaker(g, repo, store, synth);
            if (!result.failed.empty()) throw Error("docmaker failed some nodes");
            py::dict out;
            for (const auto& [id, card] : store.all())
                out[py::str(id.to_hex())] = doc::render_card(card);
            return out;
        },
        py::arg("repo"),
        "Full fallback docmaker pass; returns {node id: card json}.");

    // --- retrieval -------------------------------------------------------
    py::class_<retrieval::Index>(m, "Index")
        .def(py::init([](double alpha, double beta, double gamma) {
                 retrieval::IndexConfig config;
                 config.alpha = alpha;
                 config.beta = beta;
                 config.gamma = gamma;
                 return retrieval::Index(config);
             }),
             py::arg("alpha") = 0.5, py::arg("beta") = 0.3, py::arg("gamma") = 0.2)
        .def("upsert",
             [](retrieval::Index& index, const std::string& key, const std::string& text,
                const std::set<std::string>& tags) {
                 retrieval::IndexedDoc doc;
                 doc.doc_id = md5("py:" + key);
                 doc.source = retrieval::Source::Literature;
                 doc.text = text;
                 doc.domain_tags = tags;
                 index.upsert(std::move(doc));
             },
             py::arg("key"), py::arg("text"), py::arg("tags") = std::set<std::string>{})
        .def("remove",
             [](retrieval::Index& index, const std::string& key) {
                 index.update({}, {md5("py:" + key)});
             })
        .def("__len__", [](const retrieval::Index& index) { return index.size(); })
        .def("search",
             [](const retrieval::Index& index, const std::string& query, size_t k,
                const std::set<std::string>& tags) {
                 py::list out;
                 for (const auto& hit : index.search(query, k, tags)) {
                     py::dict h;
                     h["doc_id"] = hit.doc_id.to_hex();
                     h["score"] = hit.score;
                     h["sparse"] = hit.sparse;
                     h["dense"] = hit.dense;
                     h["structural"] = hit.structural;
                     out.append(h);
                 }
                 return out;
             },
             py::arg("query"), py::arg("k") = 10, py::arg("tags") = std::set<std::string>{});

    // --- flow ------------------------------------------------------------
    m.def("delta_percent", &flow::delta_percent, py::arg("base"), py::arg("new_value"));
    m.def("format_delta",
          [](double base, double new_value) {
              return flow::format_delta(flow::delta_percent(base, new_value));
          },
          py::arg("base"), py::arg("new_value"));
    m.def("parse_qor_json", [](const std::string& bytes) {
        auto report = flow::parse_qor_json(bytes);
        py::dict out;
        out["design"] = report.design;
        out["pdk"] = report.pdk;
        out["stage"] = std::string(flow::stage_name(report.stage));
        for (const auto& field : flow::qor_metric_fields()) {
            auto value = report.metric(field);
            if (value) out[py::str(field)] = *value;
        }
        return out;
    });
    m.def("parse_qor_log", [](const std::string& lines) {
        auto report = flow::parse_qor_log(lines);
        return flow::render_qor_json(report);
    });
    m.def("parse_flow_config", [](const std::string& text) {
        auto config = flow::parse_flow_config(text);
        py::dict out;
        out["design"] = config.design;
        out["pdk"] = config.pdk;
        out["stage"] = std::string(flow::stage_name(config.stage));
        py::dict params;
        for (const auto& [key, value] : config.parameters) params[py::str(key)] = value;
        out["parameters"] = params;
        return out;
    });

    // --- gating and bisection ---------------------------------------------
    m.def("gate", &gate_py, py::arg("candidate_json"), py::arg("baseline_json"),
          py::arg("build_ok") = true, py::arg("tests_ok") = true,
          py::arg("weights") = std::map<std::string, double>{{"routed_wirelength_um", 1.0}},
          py::arg("wns_threshold") = 0.01);
    m.def(
        "bisect",
        [](size_t n, const std::function<bool(size_t)>& prefix_passes) {
            auto result = exec::bisect(n, prefix_passes);
            return py::make_tuple(result.culprit, result.probes);
        },
        py::arg("n"), py::arg("prefix_passes"),
        "Returns (culprit, probes) for the smallest failing prefix.");
}
