// S3 execution: apply candidate diffs in isolated workspace clones, run
// pre-flight checks with a bounded repair loop, rank candidates on proxy
// flows, promote and gate against the committed baseline, commit or revert,
// bisect regressions, and log counterexamples.
#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qorpilot/flow/flowsim.hpp"
#include "qorpilot/localizer/localizer.hpp"

namespace qorpilot::exec {

QORPILOT_DEFINE_ERROR(PatchOutsideSurface);
QORPILOT_DEFINE_ERROR(AnchorLost);
QORPILOT_DEFINE_ERROR(MissingMetric);
QORPILOT_DEFINE_ERROR(UnknownCheckpoint);
QORPILOT_DEFINE_ERROR(PredicateInconsistent);
QORPILOT_DEFINE_ERROR(FlowRunnerUnavailable);
QORPILOT_DEFINE_ERROR(FlowCrash);  // exit-code-2 analog: yields a RuntimeCrash counterexample

using flow::FlowRunConfig;
using flow::QoRReport;

// --- composite metric model ------------------------------------------------------

struct MetricWeight {
    double weight = 0;    // >= 0
    double baseline = 0;  // > 0
    bool lower_is_better = true;
};

struct MetricModel {
    std::map<std::string, MetricWeight> metrics;  // keyed by QoR field name
};

// rWL 0.4, WNS 0.3, via_count 0.15, density 0.15 — restricted to metrics the
// baseline report carries; baselines taken from it.
MetricModel default_metric_model(const QoRReport& baseline);
MetricModel single_metric_model(const std::string& field, const QoRReport& baseline);

// S = sum_m w_m * n_m, n_m = (b - v)/b for lower-is-better else (v - b)/b.
// Throws MissingMetric when a weighted metric is absent from the report.
double composite_score(const QoRReport& report, const MetricModel& model);

// --- gating ------------------------------------------------------------------------

struct GateConfig {
    double wns_degradation_threshold_ns = 0.01;
    bool forbid_new_drcs = true;
    bool require_build = true;
    bool require_tests = true;
};

enum class GateReason { NewDrcs, WnsDegraded, BuildFailed, TestsFailed, NoImprovement };

std::string_view gate_reason_name(GateReason r);

struct GateDecision {
    bool accepted = false;
    double composite_delta = 0;
    std::vector<GateReason> reasons;
    std::vector<std::string> warnings;  // vacuously passed gates
};

// Rebases the model baselines onto `baseline` (metrics missing on either
// side pass vacuously with a warning) and accumulates reasons independently.
GateDecision gate(const QoRReport& candidate, const QoRReport& baseline, bool build_ok,
                  bool tests_ok, const MetricModel& model, const GateConfig& config);

// --- workspace and checkpoints --------------------------------------------------------

class Workspace {
public:
    Workspace() = default;
    // copies source_dir into work_dir and starts an empty patch log
    static Workspace init(const std::filesystem::path& source_dir,
                          const std::filesystem::path& work_dir);
    Workspace clone(const std::filesystem::path& dest_dir) const;

    const std::filesystem::path& root() const { return root_; }
    std::vector<std::string> files() const;  // sorted rel paths
    std::string read(const std::string& rel_path) const;
    void write(const std::string& rel_path, std::string_view bytes);
    void remove(const std::string& rel_path);
    bool exists(const std::string& rel_path) const;

    Hash128 tree_hash() const;
    // chained fingerprint over applied patch texts (replay-runner identity)
    const std::vector<std::string>& patch_log() const { return patch_log_; }
    std::string patch_fingerprint() const;
    void push_patch(const std::string& patch_text) { patch_log_.push_back(patch_text); }
    void set_patch_log(std::vector<std::string> log) { patch_log_ = std::move(log); }

private:
    std::filesystem::path root_;
    std::vector<std::string> patch_log_;
};

struct Checkpoint {
    Hash128 tree;
    std::string label;
    std::map<std::string, std::string> files;  // rel path -> bytes
    std::vector<std::string> patch_log;
};

class CheckpointStore {
public:
    const Checkpoint& commit(const Workspace& workspace, const std::string& label);
    const Checkpoint* find(Hash128 tree) const;
    size_t size() const { return checkpoints_.size(); }

private:
    std::map<Hash128, Checkpoint> checkpoints_;
};

// Restores the workspace byte-identically to the checkpoint.
void rollback(Workspace& workspace, const Checkpoint& checkpoint);

// --- edit application -------------------------------------------------------------------

struct UndoToken {
    std::map<std::string, std::optional<std::string>> before;  // nullopt = absent
    size_t patch_log_len = 0;
};

// Applies a (possibly multi-file) unified diff. Hunks must target files in
// the step's surface. When context fails, re-anchors on the target node's
// span from a fresh parse of the current file text.
UndoToken apply_edit(Workspace& workspace, const localizer::GranularStep& step,
                     const std::string& patch_text);
void undo_edit(Workspace& workspace, const UndoToken& token);

// --- plugin interfaces ---------------------------------------------------------------------

class FlowRunner {
public:
    virtual ~FlowRunner() = default;
    virtual QoRReport run(const FlowRunConfig& config, const Workspace& workspace) = 0;
};

// Deterministic fixture lookup keyed by (config, patch fingerprint); a
// missing entry plays the role of a flow crash.
class ReplayFlowRunner : public FlowRunner {
public:
    explicit ReplayFlowRunner(flow::FlowFixture fixture) : fixture_(std::move(fixture)) {}
    QoRReport run(const FlowRunConfig& config, const Workspace& workspace) override;

private:
    flow::FlowFixture fixture_;
};

// External command: FlowRunConfig JSON on stdin, QoRReport JSON on stdout,
// cwd = workspace root. Exit 0 = valid, 2 = crash, other = runner error.
class ProcessFlowRunner : public FlowRunner {
public:
    explicit ProcessFlowRunner(std::string command) : command_(std::move(command)) {}
    QoRReport run(const FlowRunConfig& config, const Workspace& workspace) override;

private:
    std::string command_;
};

enum class FailureKind { CompileError, RuntimeCrash, QoRRegression };

std::string_view failure_kind_name(FailureKind k);

struct Counterexample {
    std::string step_id;
    FailureKind kind = FailureKind::CompileError;
    std::string evidence;  // log excerpt
    std::string candidate_id;
};

std::string counterexample_to_json(const Counterexample& ce);  // one jsonl line

struct ProposalRequest {
    const localizer::GranularStep* step = nullptr;
    std::optional<std::string> failing_log;  // set for repair rounds
    std::vector<Counterexample> counterexamples;
};

struct ProposalResponse {
    std::vector<std::string> patches;
};

class DiffProposer {
public:
    virtual ~DiffProposer() = default;
    virtual ProposalResponse propose(const ProposalRequest& request) = 0;
};

// Scripted proposals from a JSON document:
//   {"steps": {"step-001": {"candidates": ["<diff>", ...],
//                           "repairs": [["<diff>", ...], ...]}}}
// repairs[i] lists replacement diffs for candidate i, consumed per round.
class ScriptedProposer : public DiffProposer {
public:
    static ScriptedProposer from_json(std::string_view bytes);
    ProposalResponse propose(const ProposalRequest& request) override;

private:
    struct StepScript {
        std::vector<std::string> candidates;
        std::vector<std::vector<std::string>> repairs;
        size_t repair_cursor = 0;
    };
    std::map<std::string, StepScript> steps_;
};

// External command with the same stdin/stdout contract as the spec'd plugin.
class ProcessProposer : public DiffProposer {
public:
    explicit ProcessProposer(std::string command) : command_(std::move(command)) {}
    ProposalResponse propose(const ProposalRequest& request) override;

private:
    std::string command_;
};

struct CheckResult {
    bool ok = true;
    std::string log;
};

class CheckRunner {
public:
    virtual ~CheckRunner() = default;
    virtual CheckResult run(localizer::PreCheck check, const Workspace& workspace) = 0;
};

// Every check passes; the default for replay scenarios without scripting.
class PassingCheckRunner : public CheckRunner {
public:
    CheckResult run(localizer::PreCheck, const Workspace&) override { return {true, ""}; }
};

// Scripted results keyed by (check, workspace patch fingerprint); anything
// not scripted passes.
class ScriptedCheckRunner : public CheckRunner {
public:
    void fail(localizer::PreCheck check, const std::string& patch_fingerprint,
              std::string log);
    CheckResult run(localizer::PreCheck check, const Workspace& workspace) override;

private:
    std::map<std::pair<std::string, std::string>, std::string> failures_;
};

// One shell command per check kind; unset checks pass.
class ProcessCheckRunner : public CheckRunner {
public:
    void set_command(localizer::PreCheck check, std::string command);
    CheckResult run(localizer::PreCheck check, const Workspace& workspace) override;

private:
    std::map<localizer::PreCheck, std::string> commands_;
};

// --- result cache -----------------------------------------------------------------------------

Hash128 cache_key(const FlowRunConfig& config, Hash128 workspace_fingerprint);

class FlowCache {
public:
    FlowCache() = default;  // disabled
    explicit FlowCache(std::filesystem::path dir) : dir_(std::move(dir)) {}
    bool enabled() const { return !dir_.empty(); }
    struct Entry {
        QoRReport report;
        std::vector<std::string> artifact_paths;
    };
    // checksum-mismatching entries count as misses (warning recorded)
    std::optional<Entry> lookup(Hash128 key);
    void store(Hash128 key, const QoRReport& report,
               const std::vector<std::string>& artifact_paths = {});
    const std::vector<std::string>& warnings() const { return warnings_; }
    size_t hits = 0;
    size_t misses = 0;

private:
    std::filesystem::path dir_;
    std::vector<std::string> warnings_;
};

// --- candidates, outcomes, the step loop --------------------------------------------------------

enum class CandidateState { Proposed, Proxied, Promoted, Committed, Reverted };

std::string_view candidate_state_name(CandidateState s);
bool valid_candidate_transition(CandidateState from, CandidateState to);

struct CandidateDiff {
    std::string id;
    std::string patch;
    std::string provenance_step;
    CandidateState state = CandidateState::Proposed;
};

struct CandidateRecord {
    CandidateDiff diff;
    size_t repair_rounds = 0;
    std::optional<QoRReport> proxy_report;
    std::optional<GateDecision> proxy_gate;
    std::optional<QoRReport> full_report;
    std::optional<GateDecision> full_gate;
    std::string failure_log;
    std::vector<std::pair<CandidateState, CandidateState>> transitions;
};

struct StepOutcome {
    std::string step_id;
    std::vector<CandidateRecord> candidates;
    std::optional<size_t> committed;  // index into candidates
    double committed_composite_delta = 0;
    bool budget_exhausted = false;
    std::vector<Counterexample> counterexamples;
    Hash128 final_workspace_hash;
    Hash128 baseline_checkpoint;  // checkpoint the workspace ended on
};

struct ExecutorOptions {
    size_t max_candidates = 4;
    size_t max_repairs = 2;
    std::filesystem::path work_dir;   // candidate clones live here
    std::filesystem::path cache_dir;  // empty = cache disabled
    std::filesystem::path counterexample_log;  // empty = not persisted
    MetricModel model;  // weights; baselines rebased per gate
    GateConfig gates;
};

class Executor {
public:
    Executor(Workspace main, FlowRunner& flow, CheckRunner& checks, DiffProposer& proposer,
             ExecutorOptions options);

    StepOutcome run_step(const localizer::GranularStep& step);

    const Workspace& workspace() const { return main_; }
    Hash128 committed_checkpoint() const { return committed_; }
    const CheckpointStore& checkpoints() const { return checkpoints_; }
    // measured (and committed) baseline for a config, running the flow if needed
    const QoRReport& ensure_baseline(const FlowRunConfig& config);
    void rollback_to(Hash128 checkpoint);  // throws UnknownCheckpoint
    const std::vector<Counterexample>& session_counterexamples() const {
        return counterexamples_;
    }

private:
    QoRReport run_flow_cached(const FlowRunConfig& config, const Workspace& workspace);
    void record(Counterexample ce);
    void transition(CandidateRecord& rec, CandidateState to);

    Workspace main_;
    FlowRunner& flow_;
    CheckRunner& checks_;
    DiffProposer& proposer_;
    ExecutorOptions options_;
    CheckpointStore checkpoints_;
    Hash128 committed_;
    std::map<Hash128, QoRReport> baselines_;  // config fingerprint -> report
    FlowCache cache_;
    std::vector<Counterexample> counterexamples_;
    size_t clone_counter_ = 0;
};

// --- bisection -----------------------------------------------------------------------------------

struct BisectResult {
    size_t culprit = 0;  // 1-based: smallest prefix length that fails
    size_t probes = 0;
};

// prefix_passes(len) evaluates the composed prefix d1..d_len. Preconditions:
// prefix 0 passes, prefix n fails. Probes <= ceil(log2 n) + 1.
BisectResult bisect(size_t n, const std::function<bool(size_t)>& prefix_passes);

}  // namespace qorpilot::exec
