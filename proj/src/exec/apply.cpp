#include <algorithm>

#include "qorpilot/support/unidiff.hpp"
#include "qorpilot/exec/executor.hpp"

namespace qorpilot::exec {

namespace {

// 1-based line number of a byte offset
long line_of_offset(const std::string& text, size_t offset) {
    long line = 1;
    for (size_t i = 0; i < offset && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

// Fresh-parse re-anchor: locate the step's target node in the current file
// text and return its 1-based start line.
std::optional<long> anchor_line(const std::string& rel_path, const std::string& content,
                                const std::string& target_api) {
    auto lang = syntax::language_for_path(rel_path);
    if (lang == syntax::Language::Other) return std::nullopt;
    syntax::SyntaxTree tree;
    try {
        tree = syntax::parse_source(content, lang);
    } catch (const Error&) {
        return std::nullopt;
    }
    std::optional<long> line;
    std::string last = target_api;
    if (size_t pos = last.rfind("::"); pos != std::string::npos) last = last.substr(pos + 2);
    syntax::visit(tree.root, [&](const syntax::SyntaxNode& node) {
        if (line) return;
        if (node.kind != "function_definition" && node.kind != "procedure" &&
            node.kind != "class_definition")
            return;
        if (node.name == target_api || node.name == last)
            line = line_of_offset(content, node.span.start);
    });
    return line;
}

}  // namespace

UndoToken apply_edit(Workspace& workspace, const localizer::GranularStep& step,
                     const std::string& patch_text) {
    auto patches = parse_unified_diff(patch_text);

    for (const auto& fp : patches)
        if (!step.surface_files.count(fp.target_path()))
            throw PatchOutsideSurface("patch touches " + fp.target_path() +
                                      " which is outside the step's edit surface");

    UndoToken token;
    token.patch_log_len = workspace.patch_log().size();
    for (const auto& fp : patches) {
        const std::string& path = fp.target_path();
        token.before[path] = workspace.exists(path)
                                 ? std::optional<std::string>(workspace.read(path))
                                 : std::nullopt;
    }

    try {
        for (const auto& fp : patches) {
            const std::string& path = fp.target_path();
            if (fp.is_delete()) {
                workspace.remove(path);
                continue;
            }
            std::string content = workspace.exists(path) ? workspace.read(path) : "";
            std::string updated;
            try {
                updated = apply_file_patch(fp, content, {0, 10});
            } catch (const HunkApplyFailed&) {
                // re-anchor on the target node's current span
                auto line = anchor_line(path, content, step.target_api);
                if (!line)
                    throw AnchorLost("context failed and " + step.target_api +
                                     " no longer parses in " + path);
                long hint = *line - static_cast<long>(fp.hunks.empty()
                                                          ? 1
                                                          : fp.hunks.front().old_start);
                updated = apply_file_patch(fp, content, {hint, 400});
            }
            workspace.write(path, updated);
        }
    } catch (...) {
        undo_edit(workspace, token);  // leave the tree untouched on failure
        throw;
    }
    workspace.push_patch(patch_text);
    return token;
}

void undo_edit(Workspace& workspace, const UndoToken& token) {
    for (const auto& [path, before] : token.before) {
        if (before) workspace.write(path, *before);
        else workspace.remove(path);
    }
    auto log = workspace.patch_log();
    if (log.size() > token.patch_log_len) {
        log.resize(token.patch_log_len);
        workspace.set_patch_log(std::move(log));
    }
}

}  // namespace qorpilot::exec
