// Docmaker: bottom-up evidence extraction over the condensed graph, card
// synthesis through a pluggable synthesizer (deterministic extractive
// fallback in-tree, external processes via a stdin/stdout JSON contract),
// and validation of every card against the graph.
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qorpilot/graph/codegraph.hpp"
#include "qorpilot/support/jsonio.hpp"

namespace qorpilot::doc {

using graph::CodeGraph;
using graph::NodeId;

QORPILOT_DEFINE_ERROR(MissingDependencyCard);
QORPILOT_DEFINE_ERROR(SynthesizerUnavailable);
QORPILOT_DEFINE_ERROR(SchemaViolation);
QORPILOT_DEFINE_ERROR(MalformedCardFile);
QORPILOT_DEFINE_ERROR(UnknownNode);

// --- evidence ----------------------------------------------------------------

struct ConfigFlag {
    std::string name;           // as written, e.g. "-max_displacement"
    std::string default_value;  // "" when none adjacent
    graph::Span span;

    bool operator==(const ConfigFlag&) const = default;
};

struct EvidenceBundle {
    NodeId subject;
    std::vector<std::string> signatures;
    std::vector<std::pair<std::string, std::string>> default_params;  // name -> literal
    std::vector<std::string> assertions;       // inner text of assert-like calls
    std::vector<ConfigFlag> config_flags;
    std::vector<std::string> error_messages;
    std::vector<std::pair<NodeId, std::string>> neighbors;  // callee id -> role line
};

Hash128 evidence_checksum(const EvidenceBundle& bundle);

// --- cards -------------------------------------------------------------------

struct IoEntry {
    std::string name;
    std::string direction;  // "in" | "out"
    std::string description;

    bool operator==(const IoEntry&) const = default;
};

struct Knob {
    std::string name;
    std::string default_value;
    std::string range;  // "<lo>..<hi>", "{a,b,c}" or ""

    bool operator==(const Knob&) const = default;
};

struct DocCard {
    NodeId subject;
    std::string role;
    std::vector<IoEntry> inputs_outputs;
    std::vector<std::string> preconditions;
    std::vector<std::string> postconditions;
    std::vector<Knob> config_knobs;
    std::vector<std::string> referenced_apis;
    Hash128 evidence_checksum;

    bool operator==(const DocCard&) const = default;
};

std::string render_card(const DocCard& card);  // canonical JSON, fixed order
DocCard parse_card(std::string_view bytes);    // throws MalformedCardFile

// --- card store ----------------------------------------------------------------

class CardStore {
public:
    bool has(NodeId id) const { return cards_.count(id) != 0; }
    const DocCard* find(NodeId id) const;
    void put(DocCard card);
    size_t size() const { return cards_.size(); }
    const std::map<NodeId, DocCard>& all() const { return cards_; }

    // cards/<nodeid>.json under `dir`
    void save(const std::filesystem::path& dir) const;
    static CardStore load(const std::filesystem::path& dir);

private:
    std::map<NodeId, DocCard> cards_;
};

// --- synthesizer plugin contract ------------------------------------------------

struct SynthesizerRequest {
    std::string task;      // "doc_card" | "plan"
    std::string evidence;  // rendered evidence text
    std::vector<std::string> sections;
};

struct SynthesizerResponse {
    Json sections;  // object keyed by section name
    uint64_t prompt_tokens = 0;
    uint64_t completion_tokens = 0;
};

class Synthesizer {
public:
    virtual ~Synthesizer() = default;
    virtual SynthesizerResponse synthesize(const SynthesizerRequest& request) = 0;
};

// Deterministic template synthesizer over the evidence text; the whole
// pipeline runs offline with it.
class ExtractiveSynthesizer : public Synthesizer {
public:
    SynthesizerResponse synthesize(const SynthesizerRequest& request) override;
};

// Invokes a configured command, writing request JSON to stdin and reading
// response JSON from stdout. Nonzero exit -> SynthesizerUnavailable.
class ProcessSynthesizer : public Synthesizer {
public:
    explicit ProcessSynthesizer(std::string command) : command_(std::move(command)) {}
    SynthesizerResponse synthesize(const SynthesizerRequest& request) override;

private:
    std::string command_;
};

// --- operations ---------------------------------------------------------------

// Everything synthesize_card needs about the node beyond the bundle.
struct CardSubject {
    NodeId id;
    graph::NodeKind kind = graph::NodeKind::File;
    std::string qualified_name;
    std::string path;
    size_t member_count = 0;
};

CardSubject card_subject(const CodeGraph& graph, NodeId id);

EvidenceBundle extract_evidence(const CodeGraph& graph, NodeId node, const CardStore& cards,
                                const std::filesystem::path& repo_root);

// Reverse topological order of the calls projection: callees first, ties by
// ascending id. Throws NotCondensed.
std::vector<NodeId> schedule(const CodeGraph& graph);

std::string evidence_text(const EvidenceBundle& bundle, const CardSubject& subject);

DocCard synthesize_card(const EvidenceBundle& evidence, Synthesizer& synthesizer,
                        const CardSubject& subject);

enum class ViolationKind { ApiMissing, EmptyRole, UnknownKnob, ArityMismatch };

std::string_view violation_kind_name(ViolationKind k);

struct Violation {
    ViolationKind kind;
    std::string message;
};

// Knob-vs-extracted-flag checking needs the bundle; it runs when `evidence`
// is supplied (the pipeline always supplies it).
std::vector<Violation> validate_card(const DocCard& card, const CodeGraph& graph,
                                     const EvidenceBundle* evidence = nullptr);

// --- pipeline -------------------------------------------------------------------

struct DocmakerResult {
    size_t cards_written = 0;
    size_t resynthesized = 0;  // nodes that needed the one retry
    std::vector<std::pair<NodeId, std::string>> failed;
};

// Cards are produced for File / Declaration / Definition / SccGroup nodes.
bool card_bearing(graph::NodeKind kind);

// Maps dirty build-stage node ids onto the condensed graph (members -> group).
std::set<NodeId> map_to_condensed(const CodeGraph& condensed, const std::set<NodeId>& dirty);

struct DocmakerOptions {
    // synthesizer calls in flight at one schedule depth; 1 = sequential.
    // The synthesizer must be side-effect free (the in-tree ones are).
    size_t max_in_flight = 4;
};

// Runs the full docmaker pass (or only `subset` nodes when given) in schedule
// order: extract -> synthesize -> validate, one re-synthesis on violations,
// then hard-fail the node. Nodes at the same schedule depth synthesize
// concurrently, bounded by max_in_flight; results join deterministically.
DocmakerResult run_docmaker(const CodeGraph& graph, const std::filesystem::path& repo_root,
                            CardStore& store, Synthesizer& synthesizer,
                            const std::set<NodeId>* subset = nullptr,
                            const DocmakerOptions& options = {});

}  // namespace qorpilot::doc
