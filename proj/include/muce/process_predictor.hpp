#pragma once

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "muce/format.hpp"
#include "muce/predictor.hpp"

namespace muce {

/// Wraps an external model as a child process: each observation is written to
/// the child's stdin as one CSV row (schema order, no header) and one
/// probability per row is read back from its stdout. The child must flush
/// after every output line.
class ProcessPredictor final : public Predictor {
public:
    ProcessPredictor(std::string command, Schema schema)
        : command_(std::move(command)), schema_(std::move(schema)) {
        int to_child[2], from_child[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0)
            fail(Errc::predictor_failure, "cannot create pipes for '" + command_ + "'");
        pid_ = fork();
        if (pid_ < 0) fail(Errc::predictor_failure, "cannot fork '" + command_ + "'");
        if (pid_ == 0) {
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            close(to_child[0]);
            close(to_child[1]);
            close(from_child[0]);
            close(from_child[1]);
            execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        in_ = fdopen(to_child[1], "w");
        out_ = fdopen(from_child[0], "r");
        if (!in_ || !out_) fail(Errc::predictor_failure, "cannot attach streams to '" + command_ + "'");
    }

    ~ProcessPredictor() override {
        if (in_) fclose(in_);
        if (out_) fclose(out_);
        if (pid_ > 0) {
            kill(pid_, SIGTERM);
            int status = 0;
            waitpid(pid_, &status, 0);
        }
    }

    ProcessPredictor(const ProcessPredictor&) = delete;
    ProcessPredictor& operator=(const ProcessPredictor&) = delete;

    std::vector<double> predict_proba(const std::vector<Observation>& batch) const override {
        for (const auto& obs : batch) {
            std::string line;
            for (std::size_t i = 0; i < schema_.size(); ++i) {
                if (i) line += ',';
                line += format_value(obs.at(schema_[i].name));
            }
            line += '\n';
            if (fputs(line.c_str(), in_) == EOF)
                fail(Errc::predictor_failure, "external model '" + command_ + "' closed its input");
        }
        fflush(in_);
        std::vector<double> out;
        out.reserve(batch.size());
        char buf[256];
        for (std::size_t i = 0; i < batch.size(); ++i) {
            if (!fgets(buf, sizeof(buf), out_))
                fail(Errc::predictor_failure, "external model '" + command_ + "' produced no output");
            std::string s(buf);
            while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
            double p = 0.0;
            try {
                p = parse_double(s);
            } catch (const Error&) {
                fail(Errc::predictor_failure, "external model emitted non-numeric line '" + s + "'");
            }
            if (p < 0.0 || p > 1.0)
                fail(Errc::predictor_failure, "external model probability outside [0,1]");
            out.push_back(p);
        }
        return out;
    }

    // Single child process, sequential line protocol.
    bool concurrent_safe() const override { return false; }
    std::string name() const override { return "exec:" + command_; }

private:
    std::string command_;
    Schema schema_;
    pid_t pid_ = -1;
    FILE* in_ = nullptr;
    FILE* out_ = nullptr;
};

} // namespace muce
