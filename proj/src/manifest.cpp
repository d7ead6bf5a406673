// SPDX-License-Identifier: Apache-2.0
#include "poselift/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "poselift/errors.hpp"

namespace poselift {

void write_manifest(const RunManifest& manifest, const std::string& path) {
    nlohmann::json j;
    j["format"] = "poselift-manifest";
    j["version"] = 1;
    j["command"] = manifest.command;
    j["config"] = manifest.config_json.empty()
                      ? nlohmann::json::object()
                      : nlohmann::json::parse(manifest.config_json);
    j["seeds"] = manifest.seeds;
    j["inputs"] = manifest.inputs;
    j["outputs"] = manifest.outputs;
    j["tool_version"] = manifest.version;
    j["wall_ms"] = manifest.wall_ms;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open manifest '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

}  // namespace poselift
