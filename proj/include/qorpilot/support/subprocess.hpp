// Minimal POSIX subprocess runner: feed stdin, capture stdout/stderr, get the
// exit code. Used by the external synthesizer / flow-runner / proposer plugins.
#pragma once

#include <string>
#include <vector>

#include "qorpilot/support/error.hpp"

namespace qorpilot {

QORPILOT_DEFINE_ERROR(SubprocessError);

struct SubprocessResult {
    int exit_code = -1;
    bool signalled = false;
    std::string out;
    std::string err;
};

// Runs `command` through /bin/sh -c in `workdir` (cwd if empty), writing
// `input` to its stdin. Throws SubprocessError only on spawn failure.
SubprocessResult run_subprocess(const std::string& command, const std::string& input,
                                const std::string& workdir = {});

}  // namespace qorpilot
