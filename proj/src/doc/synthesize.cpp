#include <algorithm>

#include "qorpilot/support/subprocess.hpp"
#include "qorpilot/doc/docmaker.hpp"
#include "sig_util.hpp"

namespace qorpilot::doc {

namespace {

const std::vector<std::string> kCardSections = {
    "role", "inputs_outputs", "preconditions", "postconditions",
    "config_knobs", "referenced_apis"};

std::string path_stem(const std::string& path) {
    size_t slash = path.rfind('/');
    std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
    size_t dot = name.rfind('.');
    return dot == std::string::npos ? name : name.substr(0, dot);
}

// lines of the evidence text with a given prefix, prefix stripped
std::vector<std::string> lines_with(const std::string& text, const std::string& prefix) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string_view line(text.data() + pos, eol - pos);
        if (line.rfind(prefix, 0) == 0) out.emplace_back(line.substr(prefix.size()));
        pos = eol + 1;
    }
    return out;
}

std::string first_line_value(const std::string& text, const std::string& prefix) {
    auto all = lines_with(text, prefix);
    return all.empty() ? std::string() : all[0];
}

}  // namespace

std::string evidence_text(const EvidenceBundle& bundle, const CardSubject& subject) {
    std::string text;
    text += "subject: " + subject.qualified_name + "\n";
    text += "kind: " + std::string(graph::node_kind_name(subject.kind)) + "\n";
    text += "path: " + subject.path + "\n";
    if (subject.member_count > 0)
        text += "members: " + std::to_string(subject.member_count) + "\n";
    for (const auto& sig : bundle.signatures) text += "signature: " + sig + "\n";
    for (const auto& [name, value] : bundle.default_params)
        text += "param_default: " + name + " = " + value + "\n";
    for (const auto& a : bundle.assertions) text += "assert: " + a + "\n";
    for (const auto& f : bundle.config_flags)
        text += "flag: " + f.name + " default=" + f.default_value + "\n";
    for (const auto& e : bundle.error_messages) text += "error: " + e + "\n";
    for (const auto& [id, role] : bundle.neighbors) text += "neighbor: " + role + "\n";
    return text;
}

namespace {

// Extractive plan synthesis: one TuneKnob intervention per config knob named
// by a card evidence block, hypotheses from literature blocks.
SynthesizerResponse synthesize_plan_sections(const SynthesizerRequest& request) {
    SynthesizerResponse response;
    response.sections = Json::object();
    const std::string& ev = request.evidence;

    struct Block {
        std::string doc_id;
        std::string source;
        std::vector<std::string> lines;
    };
    std::vector<Block> blocks;
    std::string qor_field = "routed_wirelength_um";
    {
        Block* current = nullptr;
        size_t pos = 0;
        while (pos <= ev.size()) {
            size_t eol = ev.find('\n', pos);
            if (eol == std::string::npos) eol = ev.size();
            std::string line = ev.substr(pos, eol - pos);
            pos = eol + 1;
            if (line.rfind("qor_field: ", 0) == 0) {
                qor_field = line.substr(11);
            } else if (line.rfind("begin_doc: ", 0) == 0) {
                Block b;
                std::string rest = line.substr(11);
                size_t sp = rest.find(' ');
                b.doc_id = rest.substr(0, sp);
                size_t src = rest.find("source=");
                if (src != std::string::npos) {
                    b.source = rest.substr(src + 7);
                    size_t stop = b.source.find(' ');
                    if (stop != std::string::npos) b.source = b.source.substr(0, stop);
                }
                blocks.push_back(std::move(b));
                current = &blocks.back();
            } else if (line == "end_doc") {
                current = nullptr;
            } else if (current) {
                current->lines.push_back(std::move(line));
            }
            if (eol == ev.size()) break;
        }
    }

    struct KnobHit {
        std::string api;
        std::string name;
        std::string def;
        std::string range;
    };
    std::vector<KnobHit> knobs;
    Json hypotheses = Json::array();
    Json locations = Json::array();
    std::vector<std::string> seen_apis;
    for (const auto& block : blocks) {
        if (block.source == "Literature") {
            for (const auto& line : block.lines) {
                std::string trimmed = line;
                size_t a = trimmed.find_first_not_of(" \t\r");
                if (a == std::string::npos) continue;
                size_t b = trimmed.find_last_not_of(" \t\r");
                trimmed = trimmed.substr(a, b - a + 1);
                if (trimmed.size() > 160) trimmed.resize(160);
                hypotheses.push_back(Json{{"statement", trimmed},
                                          {"evidence", Json::array({block.doc_id})}});
                break;
            }
            continue;
        }
        std::string api, node_kind;
        for (const auto& line : block.lines) {
            if (line.rfind("api: ", 0) == 0) api = line.substr(5);
            if (line.rfind("kind: ", 0) == 0) node_kind = line.substr(6);
        }
        if (api.empty()) continue;
        if (node_kind == "File") continue;  // knobs belong to entity cards
        bool any_knob = false;
        for (const auto& line : block.lines) {
            if (line.rfind("knob: ", 0) != 0) continue;
            std::string body = line.substr(6);
            size_t dpos = body.find(" default=");
            size_t rpos = body.find(" range=");
            if (dpos == std::string::npos || rpos == std::string::npos || rpos < dpos) continue;
            KnobHit hit;
            hit.api = api;
            hit.name = body.substr(0, dpos);
            hit.def = body.substr(dpos + 9, rpos - dpos - 9);
            hit.range = body.substr(rpos + 7);
            knobs.push_back(std::move(hit));
            any_knob = true;
        }
        if (any_knob &&
            std::find(seen_apis.begin(), seen_apis.end(), api) == seen_apis.end()) {
            seen_apis.push_back(api);
            locations.push_back(Json{{"api", api}, {"rationale", "has documented config knobs"}});
        }
    }
    std::sort(knobs.begin(), knobs.end(), [](const KnobHit& a, const KnobHit& b) {
        return std::tie(a.api, a.name) < std::tie(b.api, b.name);
    });
    knobs.erase(std::unique(knobs.begin(), knobs.end(),
                            [](const KnobHit& a, const KnobHit& b) {
                                return a.api == b.api && a.name == b.name;
                            }),
                knobs.end());

    Json interventions = Json::array();
    for (const auto& k : knobs) {
        interventions.push_back(
            Json{{"kind", "TuneKnob"},
                 {"target_api", k.api},
                 {"knob", Json{{"name", k.name}, {"proposed", k.def}, {"range", k.range}}},
                 {"description",
                  "Tune " + k.name + " on " + k.api + " starting from default " + k.def}});
    }

    Json telemetry = Json::array({qor_field});
    if (qor_field != "wns_ns") telemetry.push_back("wns_ns");
    if (qor_field != "tns_ns") telemetry.push_back("tns_ns");

    for (const auto& section : request.sections) {
        if (section == "hypotheses") response.sections["hypotheses"] = hypotheses;
        else if (section == "interventions") response.sections["interventions"] = interventions;
        else if (section == "telemetry") response.sections["telemetry"] = telemetry;
        else if (section == "suggested_locations")
            response.sections["suggested_locations"] = locations;
        else response.sections[section] = Json();
    }
    return response;
}

}  // namespace

SynthesizerResponse ExtractiveSynthesizer::synthesize(const SynthesizerRequest& request) {
    if (request.task == "plan") return synthesize_plan_sections(request);
    SynthesizerResponse response;
    response.sections = Json::object();
    const std::string& ev = request.evidence;

    std::string subject = first_line_value(ev, "subject: ");
    std::string kind = first_line_value(ev, "kind: ");
    std::string path = first_line_value(ev, "path: ");
    std::string members = first_line_value(ev, "members: ");
    auto signatures = lines_with(ev, "signature: ");

    for (const auto& section : request.sections) {
        if (section == "role") {
            std::string role;
            if (kind == "SccGroup") {
                role = "Defines the mutually recursive group " + subject +
                       (members.empty() ? "" : " (" + members + " members)");
            } else if (kind == "File") {
                role = "Implements module " + path_stem(path);
            } else if (!signatures.empty()) {
                // verbatim-safe rephrasing of the first signature line
                std::string params;
                size_t open = signatures[0].find('(');
                size_t close = signatures[0].rfind(')');
                if (open != std::string::npos && close != std::string::npos && close > open)
                    params = signatures[0].substr(open + 1, close - open - 1);
                role = (kind == "Declaration" ? "Declares " : "Defines ") + subject + "(" +
                       params + ")";
            } else if (kind == "Declaration") {
                role = "Declares " + subject;
            } else {
                role = "Defines " + subject;
            }
            response.sections["role"] = role;
        } else if (section == "inputs_outputs") {
            Json io = Json::array();
            if (!signatures.empty() && kind != "File") {
                for (const auto& p : detail::split_signature_params(signatures[0])) {
                    std::string name = detail::param_name(p);
                    if (name.empty()) continue;
                    io.push_back(Json{{"name", name}, {"direction", "in"}, {"description", p}});
                }
                size_t open = signatures[0].find('(');
                size_t name_at = open == std::string::npos
                                     ? std::string::npos
                                     : signatures[0].rfind(' ', open);
                if (name_at != std::string::npos && name_at > 0) {
                    std::string ret = signatures[0].substr(0, name_at);
                    if (!ret.empty() && ret != "void" && ret != "def" && ret != "proc")
                        io.push_back(Json{{"name", "return"},
                                          {"direction", "out"},
                                          {"description", ret}});
                }
            }
            response.sections["inputs_outputs"] = std::move(io);
        } else if (section == "preconditions") {
            Json pre = Json::array();
            for (const auto& a : lines_with(ev, "assert: ")) pre.push_back(a);
            response.sections["preconditions"] = std::move(pre);
        } else if (section == "postconditions") {
            Json post = Json::array();
            for (const auto& e : lines_with(ev, "error: ")) post.push_back("signals: " + e);
            response.sections["postconditions"] = std::move(post);
        } else if (section == "config_knobs") {
            Json knobs = Json::array();
            std::vector<std::string> seen;
            for (const auto& f : lines_with(ev, "flag: ")) {
                size_t sep = f.find(" default=");
                std::string name = sep == std::string::npos ? f : f.substr(0, sep);
                std::string def = sep == std::string::npos ? "" : f.substr(sep + 9);
                if (std::find(seen.begin(), seen.end(), name) != seen.end()) continue;
                seen.push_back(name);
                knobs.push_back(Json{{"name", name}, {"default", def}, {"range", ""}});
            }
            for (const auto& p : lines_with(ev, "param_default: ")) {
                size_t eq = p.find(" = ");
                if (eq == std::string::npos) continue;
                std::string name = p.substr(0, eq);
                if (std::find(seen.begin(), seen.end(), name) != seen.end()) continue;
                seen.push_back(name);
                knobs.push_back(
                    Json{{"name", name}, {"default", p.substr(eq + 3)}, {"range", ""}});
            }
            response.sections["config_knobs"] = std::move(knobs);
        } else if (section == "referenced_apis") {
            Json apis = Json::array();
            std::vector<std::string> seen;
            for (const auto& line : lines_with(ev, "neighbor: ")) {
                // fallback role lines look like "Defines X(...)" or
                // "Defines the mutually recursive group X ..."
                std::string name;
                if (line.rfind("Defines the mutually recursive group ", 0) == 0) {
                    name = line.substr(38);
                    size_t sp = name.find(' ');
                    if (sp != std::string::npos) name = name.substr(0, sp);
                } else if (line.rfind("Defines ", 0) == 0) {
                    name = line.substr(8);
                    size_t paren = name.find('(');
                    if (paren != std::string::npos) name = name.substr(0, paren);
                }
                if (name.empty()) continue;
                if (std::find(seen.begin(), seen.end(), name) != seen.end()) continue;
                seen.push_back(name);
                apis.push_back(name);
            }
            response.sections["referenced_apis"] = std::move(apis);
        } else {
            // unknown requested section: echo an empty value; the schema
            // check on the caller side decides what to do with it
            response.sections[section] = Json();
        }
    }
    return response;
}

SynthesizerResponse ProcessSynthesizer::synthesize(const SynthesizerRequest& request) {
    Json req;
    req["task"] = request.task;
    req["evidence"] = request.evidence;
    req["sections"] = request.sections;

    SubprocessResult result;
    try {
        result = run_subprocess(command_, canonical_dump(req));
    } catch (const SubprocessError& e) {
        throw SynthesizerUnavailable(std::string("synthesizer spawn failed: ") + e.what());
    }
    if (result.exit_code != 0)
        throw SynthesizerUnavailable("synthesizer '" + command_ + "' exited " +
                                     std::to_string(result.exit_code) + ": " + result.err);
    Json rsp;
    try {
        rsp = Json::parse(result.out);
    } catch (const nlohmann::json::parse_error& e) {
        throw SynthesizerUnavailable(std::string("synthesizer wrote invalid JSON: ") + e.what());
    }
    SynthesizerResponse out;
    if (!rsp.is_object() || !rsp.contains("sections") || !rsp["sections"].is_object())
        throw SchemaViolation("synthesizer response lacks a sections object");
    out.sections = rsp["sections"];
    if (rsp.contains("usage") && rsp["usage"].is_object()) {
        out.prompt_tokens = rsp["usage"].value("prompt_tokens", 0);
        out.completion_tokens = rsp["usage"].value("completion_tokens", 0);
    }
    return out;
}

DocCard synthesize_card(const EvidenceBundle& evidence, Synthesizer& synthesizer,
                        const CardSubject& subject) {
    SynthesizerRequest request;
    request.task = "doc_card";
    request.evidence = evidence_text(evidence, subject);
    request.sections = kCardSections;

    SynthesizerResponse response = synthesizer.synthesize(request);
    const Json& sections = response.sections;
    if (!sections.is_object()) throw SchemaViolation("sections is not an object");
    for (const auto& wanted : kCardSections)
        if (!sections.contains(wanted)) throw SchemaViolation("missing section: " + wanted);
    for (const auto& [key, value] : sections.items())
        if (std::find(kCardSections.begin(), kCardSections.end(), key) == kCardSections.end())
            throw SchemaViolation("unknown section: " + key);

    DocCard card;
    card.subject = subject.id;
    try {
        card.role = sections.at("role").get<std::string>();
        for (const auto& io : sections.at("inputs_outputs")) {
            card.inputs_outputs.push_back({io.at("name").get<std::string>(),
                                           io.at("direction").get<std::string>(),
                                           io.value("description", std::string())});
        }
        for (const auto& p : sections.at("preconditions"))
            card.preconditions.push_back(p.get<std::string>());
        for (const auto& p : sections.at("postconditions"))
            card.postconditions.push_back(p.get<std::string>());
        for (const auto& k : sections.at("config_knobs"))
            card.config_knobs.push_back({k.at("name").get<std::string>(),
                                         k.value("default", std::string()),
                                         k.value("range", std::string())});
        for (const auto& a : sections.at("referenced_apis"))
            card.referenced_apis.push_back(a.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw SchemaViolation(std::string("malformed section payload: ") + e.what());
    }
    card.evidence_checksum = evidence_checksum(evidence);
    return card;
}

}  // namespace qorpilot::doc
