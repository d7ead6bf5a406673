// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace poselift {

// Exit classes shared with the CLI: 2 usage/config, 3 divergence, 4 data validation.
class Error : public std::runtime_error {
public:
    Error(const std::string& msg, int exit_code)
        : std::runtime_error(msg), exit_code_(exit_code) {}

    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& msg) : Error("schema error: " + msg, 2) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error("config error: " + msg, 2) {}
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& msg) : Error("usage error: " + msg, 2) {}
};

class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& msg) : Error("dimension error: " + msg, 2) {}
};

class DegeneratePoseError : public Error {
public:
    explicit DegeneratePoseError(const std::string& msg)
        : Error("degenerate pose: " + msg, 4) {}
};

class DegenerateSampleError : public Error {
public:
    explicit DegenerateSampleError(const std::string& msg)
        : Error("degenerate sample: " + msg, 4) {}
};

class SingularBoneError : public Error {
public:
    SingularBoneError(int bone_index, const std::string& bone_name)
        : Error("singular bone: zero-length bone " + std::to_string(bone_index) +
                    " (" + bone_name + ") has an undefined length gradient",
                4),
          bone_index_(bone_index) {}

    int bone_index() const noexcept { return bone_index_; }

private:
    int bone_index_;
};

class MalformedSampleError : public Error {
public:
    explicit MalformedSampleError(const std::string& msg)
        : Error("malformed sample: " + msg, 4) {}
};

class DataValidationError : public Error {
public:
    DataValidationError(const std::string& msg, long line = -1)
        : Error(line >= 0 ? "data validation error (line " + std::to_string(line) + "): " + msg
                          : "data validation error: " + msg,
                4),
          line_(line) {}

    long line() const noexcept { return line_; }

private:
    long line_;
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& msg, long step, std::string checkpoint_path = "")
        : Error("training diverged at step " + std::to_string(step) + ": " + msg +
                    (checkpoint_path.empty() ? "" : " (last good checkpoint: " + checkpoint_path + ")"),
                3),
          step_(step),
          checkpoint_path_(std::move(checkpoint_path)) {}

    long step() const noexcept { return step_; }
    const std::string& checkpoint_path() const noexcept { return checkpoint_path_; }

private:
    long step_;
    std::string checkpoint_path_;
};

}  // namespace poselift
