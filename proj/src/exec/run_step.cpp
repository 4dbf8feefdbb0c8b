#include <algorithm>

#include "qorpilot/support/fsutil.hpp"
#include "qorpilot/support/jsonio.hpp"
#include "qorpilot/support/subprocess.hpp"
#include "qorpilot/exec/executor.hpp"

namespace fs = std::filesystem;

namespace qorpilot::exec {

// --- plugin implementations ---------------------------------------------------

QoRReport ReplayFlowRunner::run(const FlowRunConfig& config, const Workspace& workspace) {
    try {
        return flow::replay_run(fixture_, config, workspace.patch_fingerprint());
    } catch (const flow::UnknownScenario& e) {
        throw FlowCrash(std::string("replay: ") + e.what());
    }
}

QoRReport ProcessFlowRunner::run(const FlowRunConfig& config, const Workspace& workspace) {
    SubprocessResult result;
    try {
        result = run_subprocess(command_, flow::render_flow_config(config),
                                workspace.root().string());
    } catch (const SubprocessError& e) {
        throw FlowRunnerUnavailable(std::string("flow runner spawn failed: ") + e.what());
    }
    if (result.exit_code == 2) throw FlowCrash("flow runner crashed: " + result.err);
    if (result.exit_code != 0)
        throw FlowRunnerUnavailable("flow runner exited " + std::to_string(result.exit_code) +
                                    ": " + result.err);
    return flow::parse_qor_json(result.out);
}

std::string_view failure_kind_name(FailureKind k) {
    switch (k) {
        case FailureKind::CompileError: return "CompileError";
        case FailureKind::RuntimeCrash: return "RuntimeCrash";
        case FailureKind::QoRRegression: return "QoRRegression";
    }
    return "CompileError";
}

std::string counterexample_to_json(const Counterexample& ce) {
    Json j;
    j["step_id"] = ce.step_id;
    j["kind"] = failure_kind_name(ce.kind);
    j["evidence"] = ce.evidence;
    j["candidate_id"] = ce.candidate_id;
    return j.dump();
}

ScriptedProposer ScriptedProposer::from_json(std::string_view bytes) {
    Json j = parse_json(bytes, "scripted proposer");
    ScriptedProposer proposer;
    for (const auto& [step_id, script] : j.at("steps").items()) {
        StepScript s;
        for (const auto& c : script.at("candidates")) s.candidates.push_back(c.get<std::string>());
        if (script.contains("repairs"))
            for (const auto& round : script.at("repairs")) {
                std::vector<std::string> fixes;
                for (const auto& f : round) fixes.push_back(f.get<std::string>());
                s.repairs.push_back(std::move(fixes));
            }
        proposer.steps_.emplace(step_id, std::move(s));
    }
    return proposer;
}

ProposalResponse ScriptedProposer::propose(const ProposalRequest& request) {
    ProposalResponse response;
    if (!request.step) return response;
    auto it = steps_.find(request.step->id);
    if (it == steps_.end()) return response;
    StepScript& script = it->second;
    if (!request.failing_log) {
        response.patches = script.candidates;
        return response;
    }
    // repair round: consume the next scripted repair list
    if (script.repair_cursor < script.repairs.size())
        response.patches = script.repairs[script.repair_cursor++];
    return response;
}

ProposalResponse ProcessProposer::propose(const ProposalRequest& request) {
    Json j;
    j["step"] = request.step ? Json::parse(localizer::granular_to_json(
                                   {Hash128{}, Hash128{}, {*request.step}}))["steps"][0]
                             : Json(nullptr);
    j["failing_log"] = request.failing_log ? Json(*request.failing_log) : Json(nullptr);
    Json ces = Json::array();
    for (const auto& ce : request.counterexamples) ces.push_back(Json::parse(counterexample_to_json(ce)));
    j["counterexamples"] = std::move(ces);

    SubprocessResult result;
    try {
        result = run_subprocess(command_, canonical_dump(j));
    } catch (const SubprocessError& e) {
        throw FlowRunnerUnavailable(std::string("proposer spawn failed: ") + e.what());
    }
    if (result.exit_code != 0)
        throw FlowRunnerUnavailable("proposer exited " + std::to_string(result.exit_code) +
                                    ": " + result.err);
    ProposalResponse response;
    Json rsp = parse_json(result.out, "proposer response");
    for (const auto& p : rsp.at("patches")) response.patches.push_back(p.get<std::string>());
    return response;
}

void ScriptedCheckRunner::fail(localizer::PreCheck check, const std::string& patch_fingerprint,
                               std::string log) {
    failures_[{std::string(localizer::pre_check_name(check)), patch_fingerprint}] =
        std::move(log);
}

CheckResult ScriptedCheckRunner::run(localizer::PreCheck check, const Workspace& workspace) {
    auto it = failures_.find(
        {std::string(localizer::pre_check_name(check)), workspace.patch_fingerprint()});
    if (it != failures_.end()) return {false, it->second};
    return {true, ""};
}

void ProcessCheckRunner::set_command(localizer::PreCheck check, std::string command) {
    commands_[check] = std::move(command);
}

CheckResult ProcessCheckRunner::run(localizer::PreCheck check, const Workspace& workspace) {
    auto it = commands_.find(check);
    if (it == commands_.end()) return {true, ""};
    auto result = run_subprocess(it->second, "", workspace.root().string());
    return {result.exit_code == 0, result.out + result.err};
}

// --- candidate state machine -----------------------------------------------------

std::string_view candidate_state_name(CandidateState s) {
    switch (s) {
        case CandidateState::Proposed: return "Proposed";
        case CandidateState::Proxied: return "Proxied";
        case CandidateState::Promoted: return "Promoted";
        case CandidateState::Committed: return "Committed";
        case CandidateState::Reverted: return "Reverted";
    }
    return "Proposed";
}

bool valid_candidate_transition(CandidateState from, CandidateState to) {
    if (to == CandidateState::Reverted) return from != CandidateState::Reverted;
    switch (from) {
        case CandidateState::Proposed: return to == CandidateState::Proxied;
        case CandidateState::Proxied: return to == CandidateState::Promoted;
        case CandidateState::Promoted: return to == CandidateState::Committed;
        default: return false;
    }
}

// --- executor ----------------------------------------------------------------------

Executor::Executor(Workspace main, FlowRunner& flow, CheckRunner& checks,
                   DiffProposer& proposer, ExecutorOptions options)
    : main_(std::move(main)),
      flow_(flow),
      checks_(checks),
      proposer_(proposer),
      options_(std::move(options)),
      cache_(options_.cache_dir) {
    if (options_.work_dir.empty())
        options_.work_dir = main_.root().parent_path() / (main_.root().filename().string() +
                                                          "_candidates");
    committed_ = checkpoints_.commit(main_, "initial").tree;
}

void Executor::record(Counterexample ce) {
    if (!options_.counterexample_log.empty()) {
        std::string line = counterexample_to_json(ce) + "\n";
        // append-only log
        if (options_.counterexample_log.has_parent_path())
            fs::create_directories(options_.counterexample_log.parent_path());
        std::string existing;
        if (fs::exists(options_.counterexample_log))
            existing = read_file(options_.counterexample_log);
        write_file(options_.counterexample_log, existing + line);
    }
    counterexamples_.push_back(std::move(ce));
}

void Executor::transition(CandidateRecord& rec, CandidateState to) {
    CandidateState from = rec.diff.state;
    if (!valid_candidate_transition(from, to))
        throw Error(std::string("illegal candidate transition ") +
                    std::string(candidate_state_name(from)) + " -> " +
                    std::string(candidate_state_name(to)));
    rec.transitions.emplace_back(from, to);
    rec.diff.state = to;
}

QoRReport Executor::run_flow_cached(const FlowRunConfig& config, const Workspace& workspace) {
    Hash128 key = cache_key(config, workspace.tree_hash());
    if (auto cached = cache_.lookup(key)) return cached->report;
    QoRReport report = flow_.run(config, workspace);
    cache_.store(key, report);
    return report;
}

const QoRReport& Executor::ensure_baseline(const FlowRunConfig& config) {
    Hash128 fp = flow::config_fingerprint(config);
    auto it = baselines_.find(fp);
    if (it != baselines_.end()) return it->second;
    QoRReport report = run_flow_cached(config, main_);
    return baselines_.emplace(fp, std::move(report)).first->second;
}

void Executor::rollback_to(Hash128 checkpoint) {
    const Checkpoint* cp = checkpoints_.find(checkpoint);
    if (!cp) throw UnknownCheckpoint("no checkpoint " + checkpoint.to_hex());
    rollback(main_, *cp);
    committed_ = checkpoint;
}

StepOutcome Executor::run_step(const localizer::GranularStep& step) {
    StepOutcome outcome;
    outcome.step_id = step.id;

    FlowRunConfig full_config = step.run_config;
    FlowRunConfig proxy_config = step.run_config;
    proxy_config.stage = flow::Stage::GlobalRoute;

    const QoRReport baseline_full = ensure_baseline(full_config);
    const QoRReport baseline_proxy = ensure_baseline(proxy_config);

    ProposalRequest initial;
    initial.step = &step;
    initial.counterexamples = counterexamples_;
    ProposalResponse proposals = proposer_.propose(initial);
    if (proposals.patches.size() > options_.max_candidates)
        proposals.patches.resize(options_.max_candidates);

    fs::create_directories(options_.work_dir);
    size_t reached_proxy = 0;

    struct LiveCandidate {
        size_t index;
        Workspace clone;
    };
    std::vector<LiveCandidate> survivors;

    for (size_t i = 0; i < proposals.patches.size(); ++i) {
        CandidateRecord rec;
        rec.diff.id = step.id + "-c" + std::to_string(i + 1);
        rec.diff.patch = proposals.patches[i];
        rec.diff.provenance_step = step.id;

        fs::path clone_dir = options_.work_dir / (rec.diff.id + "-" +
                                                  std::to_string(++clone_counter_));
        Workspace clone = main_.clone(clone_dir);

        // apply
        bool applied = false;
        try {
            apply_edit(clone, step, rec.diff.patch);
            applied = true;
        } catch (const Error& e) {
            rec.failure_log = e.what();
            record({step.id, FailureKind::CompileError, rec.failure_log, rec.diff.id});
            transition(rec, CandidateState::Reverted);
        }

        // pre-flight checks with bounded repair
        if (applied) {
            bool checks_ok = false;
            for (size_t round = 0; round <= options_.max_repairs; ++round) {
                checks_ok = true;
                std::string failing_log;
                for (auto check : step.pre_checks) {
                    CheckResult result = checks_.run(check, clone);
                    if (!result.ok) {
                        checks_ok = false;
                        failing_log = std::string(localizer::pre_check_name(check)) + ": " +
                                      result.log;
                        break;
                    }
                }
                if (checks_ok) break;
                rec.failure_log = failing_log;
                if (round == options_.max_repairs) break;

                // ask for a replacement diff, fed the failing log
                ProposalRequest repair;
                repair.step = &step;
                repair.failing_log = failing_log;
                repair.counterexamples = counterexamples_;
                ProposalResponse fixes = proposer_.propose(repair);
                if (fixes.patches.empty()) break;
                ++rec.repair_rounds;
                clone = main_.clone(clone_dir);  // pristine again
                try {
                    apply_edit(clone, step, fixes.patches[0]);
                    rec.diff.patch = fixes.patches[0];
                } catch (const Error& e) {
                    rec.failure_log = e.what();
                    break;
                }
            }
            if (!checks_ok) {
                record({step.id, FailureKind::CompileError, rec.failure_log, rec.diff.id});
                transition(rec, CandidateState::Reverted);
                applied = false;
            }
        }

        // proxy evaluation
        if (applied) {
            ++reached_proxy;
            try {
                QoRReport proxy = run_flow_cached(proxy_config, clone);
                transition(rec, CandidateState::Proxied);
                rec.proxy_report = proxy;
                rec.proxy_gate =
                    gate(proxy, baseline_proxy, true, true, options_.model, options_.gates);
                if (rec.proxy_gate->accepted)
                    survivors.push_back({outcome.candidates.size(), std::move(clone)});
            } catch (const FlowCrash& e) {
                rec.failure_log = e.what();
                record({step.id, FailureKind::RuntimeCrash, rec.failure_log, rec.diff.id});
                transition(rec, CandidateState::Reverted);
            }
        }
        outcome.candidates.push_back(std::move(rec));
    }

    outcome.budget_exhausted = proposals.patches.empty() || reached_proxy == 0;

    // promote the best proxy survivor
    if (!survivors.empty()) {
        std::sort(survivors.begin(), survivors.end(),
                  [&](const LiveCandidate& a, const LiveCandidate& b) {
                      double da = outcome.candidates[a.index].proxy_gate->composite_delta;
                      double db = outcome.candidates[b.index].proxy_gate->composite_delta;
                      if (da != db) return da > db;
                      return outcome.candidates[a.index].diff.id <
                             outcome.candidates[b.index].diff.id;
                  });
        LiveCandidate& best = survivors.front();
        CandidateRecord& rec = outcome.candidates[best.index];
        transition(rec, CandidateState::Promoted);
        try {
            QoRReport full = run_flow_cached(full_config, best.clone);
            rec.full_report = full;
            GateDecision decision =
                gate(full, baseline_full, true, true, options_.model, options_.gates);
            // the step's acceptance threshold tops up the no-improvement gate
            if (decision.accepted &&
                decision.composite_delta < step.post.min_composite_improvement) {
                decision.accepted = false;
                decision.reasons.push_back(GateReason::NoImprovement);
            }
            rec.full_gate = decision;
            if (decision.accepted) {
                apply_edit(main_, step, rec.diff.patch);
                if (main_.tree_hash() != best.clone.tree_hash())
                    throw Error("committed tree diverges from the evaluated candidate");
                committed_ = checkpoints_.commit(main_, step.id + "/" + rec.diff.id).tree;
                baselines_.clear();  // workspace moved; stale baselines drop
                baselines_[flow::config_fingerprint(full_config)] = full;
                transition(rec, CandidateState::Committed);
                outcome.committed = best.index;
                outcome.committed_composite_delta = decision.composite_delta;
            } else {
                std::string reasons;
                for (auto r : decision.reasons) {
                    if (!reasons.empty()) reasons += ",";
                    reasons += gate_reason_name(r);
                }
                rec.failure_log = "full-stage gate rejected: " + reasons;
                record({step.id, FailureKind::QoRRegression, rec.failure_log, rec.diff.id});
                transition(rec, CandidateState::Reverted);
            }
        } catch (const FlowCrash& e) {
            rec.failure_log = e.what();
            record({step.id, FailureKind::RuntimeCrash, rec.failure_log, rec.diff.id});
            transition(rec, CandidateState::Reverted);
        }
    } else if (reached_proxy > 0) {
        // every proxied candidate lost on QoR; feed one summary back
        record({step.id, FailureKind::QoRRegression,
                "no proxy candidate improved the composite score", ""});
    }

    // losers revert
    for (auto& rec : outcome.candidates) {
        if (rec.diff.state != CandidateState::Committed &&
            rec.diff.state != CandidateState::Reverted)
            transition(rec, CandidateState::Reverted);
    }

    // candidate clones are scratch space
    for (const auto& entry : fs::directory_iterator(options_.work_dir)) {
        std::error_code ec;
        fs::remove_all(entry.path(), ec);
    }

    outcome.counterexamples = counterexamples_;
    outcome.final_workspace_hash = main_.tree_hash();
    outcome.baseline_checkpoint = committed_;
    if (outcome.final_workspace_hash != committed_)
        throw Error("workspace left uncommitted state after run_step");
    return outcome;
}

}  // namespace qorpilot::exec
