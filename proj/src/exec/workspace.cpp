#include "qorpilot/support/fsutil.hpp"
#include "qorpilot/exec/executor.hpp"

namespace fs = std::filesystem;

namespace qorpilot::exec {

Workspace Workspace::init(const fs::path& source_dir, const fs::path& work_dir) {
    Workspace ws;
    ws.root_ = work_dir;
    copy_tree(source_dir, work_dir);
    return ws;
}

Workspace Workspace::clone(const fs::path& dest_dir) const {
    Workspace ws;
    ws.root_ = dest_dir;
    std::error_code ec;
    fs::remove_all(dest_dir, ec);
    copy_tree(root_, dest_dir);
    ws.patch_log_ = patch_log_;
    return ws;
}

std::vector<std::string> Workspace::files() const { return list_files_recursive(root_); }

std::string Workspace::read(const std::string& rel_path) const {
    return read_file(root_ / rel_path);
}

void Workspace::write(const std::string& rel_path, std::string_view bytes) {
    write_file(root_ / rel_path, bytes);
}

void Workspace::remove(const std::string& rel_path) {
    std::error_code ec;
    fs::remove(root_ / rel_path, ec);
}

bool Workspace::exists(const std::string& rel_path) const {
    return fs::exists(root_ / rel_path);
}

Hash128 Workspace::tree_hash() const {
    Md5 m;
    for (const auto& rel : files()) {
        m.update(rel);
        m.update("\0", 1);
        m.update(md5_hex(read_file(root_ / rel)));
        m.update("\n", 1);
    }
    return m.digest();
}

std::string Workspace::patch_fingerprint() const {
    std::string fp = flow::baseline_patch_fingerprint();
    for (const auto& patch : patch_log_) fp = flow::chain_patch_fingerprint(fp, patch);
    return fp;
}

const Checkpoint& CheckpointStore::commit(const Workspace& workspace,
                                          const std::string& label) {
    Checkpoint cp;
    cp.tree = workspace.tree_hash();
    cp.label = label;
    for (const auto& rel : workspace.files()) cp.files[rel] = workspace.read(rel);
    cp.patch_log = workspace.patch_log();
    auto [it, inserted] = checkpoints_.insert_or_assign(cp.tree, std::move(cp));
    (void)inserted;
    return it->second;
}

const Checkpoint* CheckpointStore::find(Hash128 tree) const {
    auto it = checkpoints_.find(tree);
    return it == checkpoints_.end() ? nullptr : &it->second;
}

void rollback(Workspace& workspace, const Checkpoint& checkpoint) {
    // delete extras, then write every checkpointed file
    for (const auto& rel : workspace.files())
        if (!checkpoint.files.count(rel)) workspace.remove(rel);
    for (const auto& [rel, bytes] : checkpoint.files) workspace.write(rel, bytes);
    workspace.set_patch_log(checkpoint.patch_log);
}

}  // namespace qorpilot::exec
