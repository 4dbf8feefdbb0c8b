#include <chrono>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "qorpilot/support/fsutil.hpp"
#include "qorpilot/doc/docmaker.hpp"
#include "qorpilot/exec/executor.hpp"
#include "qorpilot/retrieval/index.hpp"
#include "qorpilot/cli/cli.hpp"

namespace fs = std::filesystem;

namespace qorpilot::cli {

namespace {

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

std::vector<graph::RegistrationPattern> registration_patterns(const Config& config) {
    auto patterns = graph::default_registration_patterns();
    const Json section = config.section("graph");
    if (section.contains("registration_patterns") &&
        section["registration_patterns"].is_array()) {
        patterns.clear();
        for (const auto& p : section["registration_patterns"])
            patterns.push_back({p.at("pattern").get<std::string>(),
                                p.at("string_arg_pos").get<size_t>()});
    }
    return patterns;
}

// the stage-0 pipeline: build + link + condense + sparsify + filter
graph::CodeGraph build_pipeline(const Config& config, const fs::path& repo,
                                const std::vector<std::string>& extra_excludes,
                                bool condense, bool sparsify_on, bool link,
                                graph::BuildDiagnostics* diag = nullptr) {
    graph::BuildOptions options;
    std::string include_map = config.str("graph.include_map");
    if (!include_map.empty()) {
        Json j = parse_json(read_file(include_map), "include map");
        std::map<std::string, std::vector<std::string>> dirs;
        for (const auto& [file, list] : j.items())
            for (const auto& d : list) dirs[file].push_back(d.get<std::string>());
        options.include_dirs = std::move(dirs);
    }
    auto g = graph::build_graph(repo, options, diag);
    if (link) g = graph::link_scripts(g, registration_patterns(config));
    if (condense) g = graph::condense_sccs(g);
    if (condense && sparsify_on) {
        double cap = config.number("graph.max_out_degree", 32);
        double min_weight = config.number("graph.min_weight", 0.0);
        g = graph::sparsify(g, cap <= 0 ? graph::kNoDegreeCap : static_cast<size_t>(cap),
                            min_weight);
    }
    std::vector<std::string> excludes = config.list("graph.exclude");
    excludes.insert(excludes.end(), extra_excludes.begin(), extra_excludes.end());
    if (!excludes.empty()) g = graph::filter_nodes(g, excludes);
    return g;
}

retrieval::IndexConfig index_config(const Config& config) {
    retrieval::IndexConfig c;
    c.alpha = config.number("index.alpha", c.alpha);
    c.beta = config.number("index.beta", c.beta);
    c.gamma = config.number("index.gamma", c.gamma);
    c.k1 = config.number("index.k1", c.k1);
    c.b = config.number("index.b", c.b);
    c.embed_dim = static_cast<size_t>(config.number("index.embed_dim", 256));
    c.hop_cap = config.number("index.hop_cap", 4);
    return c;
}

std::unique_ptr<doc::Synthesizer> make_synthesizer(const Config& config,
                                                   const std::string& flag_cmd) {
    std::string cmd = !flag_cmd.empty() ? flag_cmd : config.str("docmaker.synthesizer_cmd");
    if (cmd.empty() || cmd == "fallback")
        return std::make_unique<doc::ExtractiveSynthesizer>();
    return std::make_unique<doc::ProcessSynthesizer>(cmd);
}

exec::MetricModel model_from(const Config& config) {
    exec::MetricModel model;
    Json weights = config.section("executor");
    if (weights.contains("weights") && weights["weights"].is_object()) {
        for (const auto& [field, w] : weights["weights"].items())
            model.metrics[field] = {w.get<double>(), 1.0,
                                    field != "wns_ns" && field != "tns_ns"};
    } else {
        model.metrics["routed_wirelength_um"] = {0.4, 1.0, true};
        model.metrics["wns_ns"] = {0.3, 1.0, false};
        model.metrics["via_count"] = {0.15, 1.0, true};
        model.metrics["density"] = {0.15, 1.0, true};
    }
    return model;
}

exec::GateConfig gates_from(const Config& config) {
    exec::GateConfig gates;
    gates.wns_degradation_threshold_ns =
        config.number("executor.wns_threshold", gates.wns_degradation_threshold_ns);
    gates.forbid_new_drcs = config.boolean("executor.forbid_new_drcs", true);
    gates.require_build = config.boolean("executor.require_build", true);
    gates.require_tests = config.boolean("executor.require_tests", true);
    return gates;
}

struct RunnerBundle {
    std::unique_ptr<exec::FlowRunner> flow;
    std::unique_ptr<exec::DiffProposer> proposer;
    std::unique_ptr<exec::CheckRunner> checks;
    std::string fixture_hash;  // md5 of the fixture file when replaying
};

RunnerBundle make_runners(const Config& config, const std::string& flow_runner,
                          const std::string& fixture, const std::string& proposer) {
    RunnerBundle bundle;
    std::string flow_kind =
        !flow_runner.empty() ? flow_runner : config.str("executor.flow_runner", "replay");
    if (flow_kind == "replay") {
        if (fixture.empty()) throw UsageError("--flow-runner replay requires --fixture");
        std::string bytes = read_file(fixture);
        bundle.fixture_hash = md5_hex(bytes);
        bundle.flow =
            std::make_unique<exec::ReplayFlowRunner>(flow::FlowFixture::from_jsonl(bytes));
    } else {
        bundle.flow = std::make_unique<exec::ProcessFlowRunner>(flow_kind);
    }

    std::string proposer_spec =
        !proposer.empty() ? proposer : config.str("executor.proposer_cmd");
    if (proposer_spec.empty()) throw UsageError("a proposer is required (--proposer)");
    if (fs::exists(proposer_spec) && proposer_spec.size() > 5 &&
        proposer_spec.substr(proposer_spec.size() - 5) == ".json") {
        bundle.proposer = std::make_unique<exec::ScriptedProposer>(
            exec::ScriptedProposer::from_json(read_file(proposer_spec)));
    } else {
        bundle.proposer = std::make_unique<exec::ProcessProposer>(proposer_spec);
    }

    Json checks = config.section("executor");
    if (checks.contains("checks") && checks["checks"].is_object()) {
        auto runner = std::make_unique<exec::ProcessCheckRunner>();
        for (const auto& [name, cmd] : checks["checks"].items()) {
            auto check = localizer::pre_check_from(name);
            if (check) runner->set_command(*check, cmd.get<std::string>());
        }
        bundle.checks = std::move(runner);
    } else {
        bundle.checks = std::make_unique<exec::PassingCheckRunner>();
    }
    return bundle;
}

Json outcome_to_json(const exec::StepOutcome& outcome) {
    Json j;
    j["step_id"] = outcome.step_id;
    j["committed"] = outcome.committed.has_value();
    j["committed_candidate"] =
        outcome.committed ? Json(outcome.candidates[*outcome.committed].diff.id) : Json(nullptr);
    j["composite_delta"] = outcome.committed_composite_delta;
    j["budget_exhausted"] = outcome.budget_exhausted;
    j["final_workspace_hash"] = outcome.final_workspace_hash.to_hex();
    Json candidates = Json::array();
    for (const auto& rec : outcome.candidates) {
        Json c;
        c["id"] = rec.diff.id;
        c["state"] = exec::candidate_state_name(rec.diff.state);
        c["repair_rounds"] = rec.repair_rounds;
        c["proxy_delta"] =
            rec.proxy_gate ? Json(rec.proxy_gate->composite_delta) : Json(nullptr);
        c["full_delta"] = rec.full_gate ? Json(rec.full_gate->composite_delta) : Json(nullptr);
        if (!rec.failure_log.empty()) c["failure"] = rec.failure_log;
        candidates.push_back(std::move(c));
    }
    j["candidates"] = std::move(candidates);
    Json ces = Json::array();
    for (const auto& ce : outcome.counterexamples)
        ces.push_back(Json::parse(exec::counterexample_to_json(ce)));
    j["counterexamples"] = std::move(ces);
    return j;
}

// --- subcommand bodies ------------------------------------------------------

int cmd_graph_build(const Config& config, const fs::path& repo, const fs::path& out,
                    const std::vector<std::string>& excludes, bool no_link, bool no_condense,
                    bool no_sparsify) {
    graph::BuildDiagnostics diag;
    auto g = build_pipeline(config, repo, excludes, !no_condense, !no_sparsify, !no_link, &diag);
    write_file_atomic(out, graph::serialize(g));
    log_event("info", "graph_build",
              Json{{"out", out.string()},
                   {"nodes", g.nodes.size()},
                   {"edges", g.edges.size()},
                   {"files_parsed", diag.files_parsed},
                   {"parse_errors", diag.parse_errors}});
    return kExitOk;
}

int cmd_link(const Config& config, const fs::path& repo, const fs::path& graph_in,
             const fs::path& out) {
    // deterministic rebuild of the uncondensed graph; the artifact must match
    auto g = graph::build_graph(repo);
    auto loaded_bytes = read_file(graph_in);
    if (graph::serialize(g) != loaded_bytes)
        throw graph::MalformedGraphFile(
            "graph file is stale: it does not match a rebuild of " + repo.string());
    graph::LinkTally tally;
    auto linked = graph::link_scripts(g, registration_patterns(config), &tally);
    write_file_atomic(out, graph::serialize(linked));
    log_event("info", "link",
              Json{{"edges_added", tally.edges_added},
                   {"registrations", tally.registrations},
                   {"skipped_nonliteral", tally.skipped_nonliteral},
                   {"unmatched", tally.unmatched}});
    return kExitOk;
}

int cmd_doc_gen(const Config& config, const fs::path& repo, const fs::path& graph_file,
                const fs::path& out, const std::string& synth_cmd) {
    auto loaded = graph::deserialize(read_file(graph_file));
    auto rebuilt = build_pipeline(config, repo, {}, loaded.condensed, true, true);
    if (graph::serialize(rebuilt) != read_file(graph_file))
        throw graph::MalformedGraphFile("graph file is stale versus " + repo.string());

    doc::CardStore store = doc::CardStore::load(out);
    auto synthesizer = make_synthesizer(config, synth_cmd);
    doc::DocmakerOptions doc_opts;
    doc_opts.max_in_flight =
        static_cast<size_t>(config.number("docmaker.max_in_flight", 4));
    auto result = doc::run_docmaker(rebuilt, repo, store, *synthesizer, nullptr, doc_opts);
    store.save(out);
    log_event("info", "doc_gen",
              Json{{"cards", result.cards_written},
                   {"resynthesized", result.resynthesized},
                   {"failed", result.failed.size()}});
    if (!result.failed.empty()) {
        Json failures = Json::array();
        for (const auto& [id, why] : result.failed)
            failures.push_back(Json{{"node", id.to_hex()}, {"reason", why}});
        std::cout << canonical_dump(Json{{"failed_nodes", failures}});
        return kExitValidation;
    }
    return kExitOk;
}

int cmd_index(const Config& config, const fs::path& graph_file, const fs::path& cards_dir,
              const fs::path& lit_dir, const fs::path& repo, const fs::path& out) {
    auto g = std::make_shared<graph::CodeGraph>(graph::deserialize(read_file(graph_file)));

    // repo corpus: cards + snippets
    auto idx_cfg = index_config(config);
    std::shared_ptr<retrieval::Embedder> embedder;
    std::string embedder_cmd = config.str("index.embedder_cmd");
    if (!embedder_cmd.empty())
        embedder = std::make_shared<retrieval::ProcessEmbedder>(embedder_cmd,
                                                                idx_cfg.embed_dim);
    retrieval::Index index(idx_cfg, embedder);
    index.attach_graph(g);
    auto cards = doc::CardStore::load(cards_dir);
    std::vector<retrieval::IndexedDoc> docs;
    for (const auto& [id, card] : cards.all())
        docs.push_back(retrieval::doc_from_card(card, *g));
    if (!repo.empty())
        for (const auto& [id, node] : g->nodes)
            if (node.kind == graph::NodeKind::Definition ||
                node.kind == graph::NodeKind::SccGroup)
                docs.push_back(retrieval::doc_from_snippet(*g, id, repo));
    index.update(std::move(docs), {});
    index.save(out);

    // literature corpus: its own index under <out>/lit
    size_t lit_count = 0;
    if (!lit_dir.empty()) {
        retrieval::Index lit(idx_cfg, embedder);
        std::vector<retrieval::IndexedDoc> lit_docs = retrieval::literature_from_dir(lit_dir);
        lit_count = lit_docs.size();
        lit.update(std::move(lit_docs), {});
        lit.save(out / "lit");
    }
    log_event("info", "index",
              Json{{"docs", index.size()}, {"lit_docs", lit_count}, {"out", out.string()}});
    return kExitOk;
}

int cmd_plan(const Config& config, const std::string& objective_name,
             const std::vector<std::string>& scope, const std::string& context, size_t k,
             double lambda, const fs::path& index_dir, const fs::path& lit_index_dir,
             const fs::path& graph_file, const fs::path& cards_dir, const fs::path& out,
             const std::string& synth_cmd) {
    auto metric = planner::metric_from(objective_name);
    if (!metric) throw UsageError("unknown objective metric: " + objective_name);
    if (scope.empty()) throw UsageError("--scope must name at least one module");
    auto objective = planner::make_objective(
        *metric, std::set<std::string>(scope.begin(), scope.end()), context);

    auto repo_index = retrieval::Index::load(index_dir);
    auto lit_index = lit_index_dir.empty() ? retrieval::Index::load(index_dir / "lit")
                                           : retrieval::Index::load(lit_index_dir);
    auto evidence = planner::retrieve_context(objective, repo_index, lit_index, k, lambda);

    auto synthesizer = make_synthesizer(config, synth_cmd);
    auto plan = planner::synthesize_plan(objective, evidence, *synthesizer);

    auto g = graph::deserialize(read_file(graph_file));
    auto cards = doc::CardStore::load(cards_dir);
    planner::ValidateOptions vopts;
    auto terms = config.list("planner.protected_terms");
    if (!terms.empty()) vopts.protected_terms = terms;
    auto assertions = planner::validate_plan(plan, g, cards, vopts);

    Json out_json;
    out_json["valid"] = planner::plan_valid(assertions);
    Json alist = Json::array();
    for (const auto& a : assertions)
        alist.push_back(Json{{"kind", planner::assertion_kind_name(a.kind)},
                             {"subject", a.subject},
                             {"passed", a.passed},
                             {"message", a.message}});
    out_json["assertions"] = std::move(alist);
    std::cout << canonical_dump(out_json);

    if (!planner::plan_valid(assertions)) return kExitValidation;
    write_file_atomic(out, planner::plan_to_json(plan));
    log_event("info", "plan",
              Json{{"interventions", plan.interventions.size()}, {"out", out.string()}});
    return kExitOk;
}

int cmd_localize(const Config& config, const fs::path& plan_file, const fs::path& graph_file,
                 const fs::path& cards_dir, const fs::path& change_freq_file,
                 const fs::path& out) {
    auto plan = planner::plan_from_json(read_file(plan_file));
    auto g = graph::deserialize(read_file(graph_file));

    if (!cards_dir.empty()) {
        auto cards = doc::CardStore::load(cards_dir);
        auto assertions = planner::validate_plan(plan, g, cards);
        if (!planner::plan_valid(assertions)) {
            Json alist = Json::array();
            for (const auto& a : assertions)
                if (!a.passed)
                    alist.push_back(Json{{"kind", planner::assertion_kind_name(a.kind)},
                                         {"subject", a.subject},
                                         {"message", a.message}});
            std::cout << canonical_dump(Json{{"valid", false}, {"assertions", alist}});
            return kExitValidation;
        }
    }

    std::optional<std::map<std::string, double>> freq;
    if (!change_freq_file.empty()) {
        Json j = parse_json(read_file(change_freq_file), "change frequency map");
        std::map<std::string, double> map;
        for (const auto& [path, count] : j.items()) map[path] = count.get<double>();
        freq = std::move(map);
    }

    localizer::LocalizeOptions lopts;
    lopts.ambiguous_cap =
        static_cast<size_t>(config.number("localizer.ambiguous_cap", 8));
    auto surface = localizer::localize(plan, g, freq ? &*freq : nullptr, lopts);

    localizer::AssembleOptions aopts;
    aopts.epsilon = config.number("localizer.epsilon", 0.001);
    auto granular =
        localizer::assemble_granular_plan(plan, surface, flow_template_from(config), aopts);
    write_file_atomic(out, localizer::granular_to_json(granular));
    log_event("info", "localize",
              Json{{"steps", granular.steps.size()},
                   {"blast_radius", surface.blast_radius},
                   {"out", out.string()}});
    return kExitOk;
}

int cmd_run(const Config& config, const fs::path& gp_file, const fs::path& repo,
            const fs::path& workspace_dir, const std::string& flow_runner,
            const std::string& fixture, const std::string& proposer, const fs::path& out,
            const fs::path& manifest_path, const fs::path& cache_dir) {
    Timer total;
    auto gp = localizer::granular_from_json(read_file(gp_file));
    auto bundle = make_runners(config, flow_runner, fixture, proposer);

    fs::path ws_dir = workspace_dir.empty() ? out.parent_path() / "workspace" : workspace_dir;
    std::error_code ec;
    fs::remove_all(ws_dir, ec);
    exec::Workspace main = exec::Workspace::init(repo, ws_dir);
    Hash128 initial_hash = main.tree_hash();

    exec::ExecutorOptions opts;
    opts.model = model_from(config);
    opts.gates = gates_from(config);
    opts.max_candidates = static_cast<size_t>(config.number("executor.max_candidates", 4));
    opts.max_repairs = static_cast<size_t>(config.number("executor.max_repairs", 2));
    opts.cache_dir = !cache_dir.empty() ? cache_dir
                                        : fs::path(config.str("executor.cache_dir"));
    opts.counterexample_log =
        out.parent_path().empty() ? fs::path("counterexamples.jsonl")
                                  : out.parent_path() / "counterexamples.jsonl";
    opts.work_dir = ws_dir.parent_path() / (ws_dir.filename().string() + "_candidates");

    exec::Executor executor(std::move(main), *bundle.flow, *bundle.checks, *bundle.proposer,
                            opts);

    Json steps = Json::array();
    Json timings = Json::object();
    bool any_committed = false;
    for (const auto& step : gp.steps) {
        Timer t;
        auto outcome = executor.run_step(step);
        timings[step.id] = t.seconds();
        any_committed = any_committed || outcome.committed.has_value();
        steps.push_back(outcome_to_json(outcome));
        log_event("info", "run_step",
                  Json{{"step", step.id}, {"committed", outcome.committed.has_value()}});
    }

    Json result;
    result["tool_version"] = kToolVersion;
    result["plan_id"] = gp.plan_id.to_hex();
    result["initial_workspace_hash"] = initial_hash.to_hex();
    result["final_workspace_hash"] = executor.workspace().tree_hash().to_hex();
    result["committed_checkpoint"] = executor.committed_checkpoint().to_hex();
    result["any_committed"] = any_committed;
    result["steps"] = std::move(steps);
    std::string result_bytes = canonical_dump(result);
    write_file_atomic(out, result_bytes);
    std::cout << result_bytes;

    Json manifest;
    manifest["tool_version"] = kToolVersion;
    manifest["config"] = config.root();
    Json inputs;
    inputs["repo_fingerprint"] = initial_hash.to_hex();
    inputs["granular_plan_hash"] = md5_hex(read_file(gp_file));
    inputs["plan_id"] = gp.plan_id.to_hex();
    inputs["fixture_hash"] = bundle.fixture_hash;
    manifest["input_hashes"] = std::move(inputs);
    Json artifacts;
    artifacts["run_outcome"] = out.string();
    artifacts["workspace"] = ws_dir.string();
    artifacts["counterexamples"] = opts.counterexample_log.string();
    manifest["artifacts"] = std::move(artifacts);
    manifest["artifact_hashes"] =
        Json{{"run_outcome", md5_hex(result_bytes)},
             {"final_workspace", executor.workspace().tree_hash().to_hex()}};
    timings["total"] = total.seconds();
    manifest["wall_clock_seconds"] = std::move(timings);
    fs::path mpath = manifest_path.empty() ? out.parent_path() / "run_manifest.json"
                                           : manifest_path;
    write_file_atomic(mpath, canonical_dump(manifest));
    return kExitOk;
}

int cmd_bisect(const Config& config, const fs::path& gp_file, const std::string& step_id,
               const fs::path& patches_file, const fs::path& repo,
               const std::string& flow_runner, const std::string& fixture,
               const fs::path& work_dir) {
    auto gp = localizer::granular_from_json(read_file(gp_file));
    const localizer::GranularStep* step = nullptr;
    for (const auto& s : gp.steps)
        if (s.id == step_id) step = &s;
    if (!step) throw UsageError("no step " + step_id + " in " + gp_file.string());

    Json patches_json = parse_json(read_file(patches_file), "patch list");
    std::vector<std::string> patches;
    for (const auto& p : patches_json) patches.push_back(p.get<std::string>());
    if (patches.empty()) throw UsageError("patch list is empty");

    auto bundle = make_runners(config, flow_runner, fixture, "unused.json");
    exec::MetricModel model = model_from(config);
    exec::GateConfig gates = gates_from(config);

    fs::path base_dir = work_dir.empty() ? fs::temp_directory_path() / "qorpilot_bisect"
                                         : work_dir;
    std::error_code ec;
    fs::remove_all(base_dir, ec);
    exec::Workspace baseline_ws = exec::Workspace::init(repo, base_dir / "p0");
    flow::QoRReport baseline = bundle.flow->run(step->run_config, baseline_ws);

    size_t eval_count = 0;
    auto prefix_passes = [&](size_t len) {
        ++eval_count;
        exec::Workspace ws =
            exec::Workspace::init(repo, base_dir / ("p" + std::to_string(len) + "_" +
                                                    std::to_string(eval_count)));
        for (size_t i = 0; i < len; ++i) exec::apply_edit(ws, *step, patches[i]);
        flow::QoRReport report;
        try {
            report = bundle.flow->run(step->run_config, ws);
        } catch (const exec::FlowCrash&) {
            return false;
        }
        auto decision = exec::gate(report, baseline, true, true, model, gates);
        for (auto reason : decision.reasons) {
            if (reason == exec::GateReason::NewDrcs ||
                reason == exec::GateReason::WnsDegraded)
                return false;
        }
        return decision.composite_delta >= 0;
    };

    auto result = exec::bisect(patches.size(), prefix_passes);
    Json j;
    j["culprit"] = result.culprit;
    j["probes"] = result.probes;
    std::cout << canonical_dump(j);
    return kExitOk;
}

int cmd_report(const std::vector<std::string>& pairs, const std::string& metric_name,
               bool as_json) {
    auto metric = planner::metric_from(metric_name);
    if (!metric) throw UsageError("unknown metric: " + metric_name);
    std::string field(planner::metric_qor_field(*metric));

    std::vector<ReportRow> rows;
    for (const auto& pair : pairs) {
        size_t colon = pair.find(':');
        if (colon == std::string::npos)
            throw UsageError("--qor expects base.json:new.json, got " + pair);
        fs::path base_path = pair.substr(0, colon);
        fs::path new_path = pair.substr(colon + 1);
        if (!fs::exists(base_path)) throw MissingArtifact(base_path.string() + " not found");
        if (!fs::exists(new_path)) throw MissingArtifact(new_path.string() + " not found");
        auto base = flow::parse_qor_json(read_file(base_path));
        auto cand = flow::parse_qor_json(read_file(new_path));
        auto base_value = base.metric(field);
        auto new_value = cand.metric(field);
        if (!base_value || !new_value)
            throw MissingArtifact("metric " + field + " missing from " + pair);
        ReportRow row;
        row.pdk = base.pdk;
        row.design = base.design;
        row.base = *base_value;
        row.new_value = *new_value;
        row.delta_pct = *base_value == *new_value
                            ? 0.0
                            : flow::delta_percent(*base_value, *new_value);
        rows.push_back(std::move(row));
    }
    std::cout << (as_json ? render_report_json(rows, field) : render_report_text(rows, field));
    return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"repository graphing, doc cards, planning, localization and QoR-gated "
                 "execution"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    std::string config_file;
    app.add_option("--config", config_file, "structured JSON config file")->envname("");

    // graph-build
    auto* gb = app.add_subcommand("graph-build", "parse a repository into graph.json");
    std::string gb_repo, gb_out = "graph.json";
    std::vector<std::string> gb_exclude;
    bool gb_no_condense = false, gb_no_sparsify = false, gb_no_link = false;
    gb->add_option("--repo", gb_repo, "repository root")->required();
    gb->add_option("--out", gb_out, "output graph file");
    gb->add_option("--exclude", gb_exclude, "exclusion glob (repeatable)");
    gb->add_flag("--no-condense", gb_no_condense, "skip SCC condensation");
    gb->add_flag("--no-sparsify", gb_no_sparsify, "skip sparsification");
    gb->add_flag("--no-link", gb_no_link, "skip script linking");

    // link
    auto* lk = app.add_subcommand("link", "add script_invokes edges to a build-stage graph");
    std::string lk_repo, lk_graph, lk_out;
    lk->add_option("--repo", lk_repo)->required();
    lk->add_option("--graph", lk_graph)->required();
    lk->add_option("--out", lk_out)->required();

    // doc-gen
    auto* dg = app.add_subcommand("doc-gen", "generate validated doc cards");
    std::string dg_repo, dg_graph, dg_out = "cards", dg_synth;
    dg->add_option("--repo", dg_repo)->required();
    dg->add_option("--graph", dg_graph)->required();
    dg->add_option("--out", dg_out);
    dg->add_option("--synthesizer-cmd", dg_synth, "external synthesizer command");

    // index
    auto* ix = app.add_subcommand("index", "build the hybrid retrieval index");
    std::string ix_graph, ix_cards, ix_lit, ix_repo, ix_out = "index";
    ix->add_option("--graph", ix_graph)->required();
    ix->add_option("--cards", ix_cards)->required();
    ix->add_option("--lit", ix_lit, "literature directory");
    ix->add_option("--repo", ix_repo, "repo root for snippet extraction");
    ix->add_option("--out", ix_out);

    // plan
    auto* pl = app.add_subcommand("plan", "retrieve, synthesize and validate a plan");
    std::string pl_objective = "rwl", pl_context, pl_index, pl_lit_index, pl_graph, pl_cards,
                pl_out = "plan.json", pl_synth;
    std::vector<std::string> pl_scope;
    size_t pl_k = 12;
    double pl_lambda = 0.7;
    pl->add_option("--objective", pl_objective, "rwl|ecp|wns|tns|power");
    pl->add_option("--scope", pl_scope, "allowed modules (comma or repeat)")
        ->delimiter(',')
        ->required();
    pl->add_option("--context", pl_context);
    pl->add_option("--k", pl_k);
    pl->add_option("--lambda", pl_lambda, "MMR diversity weight");
    pl->add_option("--index", pl_index, "repo index directory")->required();
    pl->add_option("--lit-index", pl_lit_index, "literature index directory");
    pl->add_option("--graph", pl_graph)->required();
    pl->add_option("--cards", pl_cards)->required();
    pl->add_option("--out", pl_out);
    pl->add_option("--synthesizer-cmd", pl_synth);

    // localize
    auto* lc = app.add_subcommand("localize", "project a plan onto edit surfaces");
    std::string lc_plan, lc_graph, lc_cards, lc_freq, lc_out = "granular_plan.json";
    lc->add_option("--plan", lc_plan)->required();
    lc->add_option("--graph", lc_graph)->required();
    lc->add_option("--cards", lc_cards, "cards dir (revalidates the plan)");
    lc->add_option("--change-freq", lc_freq, "path -> commit-touch count JSON");
    lc->add_option("--out", lc_out);

    // run
    auto* rn = app.add_subcommand("run", "execute a granular plan under QoR gating");
    std::string rn_gp, rn_repo, rn_ws, rn_flow, rn_fixture, rn_proposer,
                rn_out = "run_outcome.json", rn_manifest, rn_cache;
    rn->add_option("--granular-plan", rn_gp)->required();
    rn->add_option("--repo", rn_repo, "pristine source tree")->required();
    rn->add_option("--workspace", rn_ws, "working tree location");
    rn->add_option("--flow-runner", rn_flow, "'replay' or an external command");
    rn->add_option("--fixture", rn_fixture, "replay fixture (*.qor.jsonl)");
    rn->add_option("--proposer", rn_proposer, "scripted .json file or external command");
    rn->add_option("--out", rn_out);
    rn->add_option("--manifest", rn_manifest);
    rn->add_option("--cache", rn_cache, "flow result cache directory");

    // bisect
    auto* bs = app.add_subcommand("bisect", "isolate the first failing diff prefix");
    std::string bs_gp, bs_step = "step-001", bs_patches, bs_repo, bs_flow, bs_fixture, bs_work;
    bs->add_option("--granular-plan", bs_gp)->required();
    bs->add_option("--step", bs_step);
    bs->add_option("--patches", bs_patches, "JSON array of unified diffs")->required();
    bs->add_option("--repo", bs_repo)->required();
    bs->add_option("--flow-runner", bs_flow);
    bs->add_option("--fixture", bs_fixture);
    bs->add_option("--work-dir", bs_work);

    // report
    auto* rp = app.add_subcommand("report", "per-design delta table");
    std::vector<std::string> rp_pairs;
    std::string rp_metric = "rwl";
    bool rp_json = false;
    rp->add_option("--qor", rp_pairs, "base.json:new.json (repeatable)")->required();
    rp->add_option("--metric", rp_metric);
    rp->add_flag("--json", rp_json);

    for (CLI::App* sub : {gb, lk, dg, ix, pl, lc, rn, bs, rp}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return kExitOk;  // --help / --version
        std::fputs((std::string(e.what()) + "\n").c_str(), stderr);
        return kExitUsage;
    }

    try {
        Config config = Config::load(
            config_file.empty() ? std::nullopt
                                : std::optional<fs::path>(config_file));
        if (gb->parsed())
            return cmd_graph_build(config, gb_repo, gb_out, gb_exclude, gb_no_link,
                                   gb_no_condense, gb_no_sparsify);
        if (lk->parsed()) return cmd_link(config, lk_repo, lk_graph, lk_out);
        if (dg->parsed()) return cmd_doc_gen(config, dg_repo, dg_graph, dg_out, dg_synth);
        if (ix->parsed()) return cmd_index(config, ix_graph, ix_cards, ix_lit, ix_repo, ix_out);
        if (pl->parsed())
            return cmd_plan(config, pl_objective, pl_scope, pl_context, pl_k, pl_lambda,
                            pl_index, pl_lit_index, pl_graph, pl_cards, pl_out, pl_synth);
        if (lc->parsed()) return cmd_localize(config, lc_plan, lc_graph, lc_cards, lc_freq,
                                              lc_out);
        if (rn->parsed())
            return cmd_run(config, rn_gp, rn_repo, rn_ws, rn_flow, rn_fixture, rn_proposer,
                           rn_out, rn_manifest, rn_cache);
        if (bs->parsed())
            return cmd_bisect(config, bs_gp, bs_step, bs_patches, bs_repo, bs_flow, bs_fixture,
                              bs_work);
        if (rp->parsed()) return cmd_report(rp_pairs, rp_metric, rp_json);
        return kExitUsage;
    } catch (const UsageError& e) {
        log_event("error", "usage", Json{{"message", e.what()}});
        return kExitUsage;
    } catch (const Error& e) {
        log_event("error", "runtime", Json{{"message", e.what()}});
        return kExitRuntime;
    } catch (const std::exception& e) {
        log_event("error", "runtime", Json{{"message", e.what()}});
        return kExitRuntime;
    }
}

}  // namespace qorpilot::cli
