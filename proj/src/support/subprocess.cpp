#include "qorpilot/support/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <csignal>
#include <cstring>

namespace qorpilot {

namespace {

struct Pipe {
    int fds[2] = {-1, -1};
    Pipe() {
        if (pipe(fds) != 0) throw SubprocessError("pipe() failed");
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    void close_read() {
        if (fds[0] >= 0) ::close(fds[0]);
        fds[0] = -1;
    }
    void close_write() {
        if (fds[1] >= 0) ::close(fds[1]);
        fds[1] = -1;
    }
};

}  // namespace

SubprocessResult run_subprocess(const std::string& command, const std::string& input,
                                const std::string& workdir) {
    Pipe in_pipe, out_pipe, err_pipe;

    pid_t pid = fork();
    if (pid < 0) throw SubprocessError("fork() failed: " + std::string(strerror(errno)));
    if (pid == 0) {
        // child
        dup2(in_pipe.fds[0], STDIN_FILENO);
        dup2(out_pipe.fds[1], STDOUT_FILENO);
        dup2(err_pipe.fds[1], STDERR_FILENO);
        in_pipe.close_read();
        in_pipe.close_write();
        out_pipe.close_read();
        out_pipe.close_write();
        err_pipe.close_read();
        err_pipe.close_write();
        if (!workdir.empty() && chdir(workdir.c_str()) != 0) _exit(127);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }

    in_pipe.close_read();
    out_pipe.close_write();
    err_pipe.close_write();

    signal(SIGPIPE, SIG_IGN);

    SubprocessResult result;
    size_t written = 0;
    bool out_open = true, err_open = true;
    bool in_open = true;
    if (input.empty()) {
        in_pipe.close_write();
        in_open = false;
    }

    while (in_open || out_open || err_open) {
        struct pollfd pfds[3];
        nfds_t nfds = 0;
        int in_idx = -1, out_idx = -1, err_idx = -1;
        if (in_open) {
            in_idx = static_cast<int>(nfds);
            pfds[nfds++] = {in_pipe.fds[1], POLLOUT, 0};
        }
        if (out_open) {
            out_idx = static_cast<int>(nfds);
            pfds[nfds++] = {out_pipe.fds[0], POLLIN, 0};
        }
        if (err_open) {
            err_idx = static_cast<int>(nfds);
            pfds[nfds++] = {err_pipe.fds[0], POLLIN, 0};
        }
        if (poll(pfds, nfds, -1) < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (in_idx >= 0 && (pfds[in_idx].revents & (POLLOUT | POLLERR | POLLHUP))) {
            if (pfds[in_idx].revents & (POLLERR | POLLHUP)) {
                in_pipe.close_write();
                in_open = false;
            } else {
                ssize_t n =
                    write(in_pipe.fds[1], input.data() + written, input.size() - written);
                if (n > 0) written += static_cast<size_t>(n);
                if (n < 0 || written == input.size()) {
                    in_pipe.close_write();
                    in_open = false;
                }
            }
        }
        std::array<char, 4096> buf;
        if (out_idx >= 0 && (pfds[out_idx].revents & (POLLIN | POLLHUP))) {
            ssize_t n = read(out_pipe.fds[0], buf.data(), buf.size());
            if (n > 0)
                result.out.append(buf.data(), static_cast<size_t>(n));
            else
                out_open = false;
        }
        if (err_idx >= 0 && (pfds[err_idx].revents & (POLLIN | POLLHUP))) {
            ssize_t n = read(err_pipe.fds[0], buf.data(), buf.size());
            if (n > 0)
                result.err.append(buf.data(), static_cast<size_t>(n));
            else
                err_open = false;
        }
    }

    int status = 0;
    waitpid(pid, &status, 0);
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else {
        result.signalled = true;
        result.exit_code = -1;
    }
    return result;
}

}  // namespace qorpilot
