// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace poselift {

// One manifest per command invocation, written alongside the outputs; the
// config snapshot plus seeds are sufficient to reproduce the run.
struct RunManifest {
    std::string command;
    std::string config_json;  // resolved config snapshot (already serialized)
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::string version;
    double wall_ms = 0.0;
};

void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace poselift
