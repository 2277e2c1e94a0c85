#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace hase {

/// Git object id of a file's contents: SHA-1 over "blob <size>\0" + bytes.
std::string git_blob_sha1(const std::string& path);
std::string git_blob_sha1_bytes(const std::string& bytes);

/// One line of manifest.jsonl. Wall-clock fields live only here.
struct RunManifest {
    std::string run_id;
    std::string command;
    std::string started_utc;
    double wall_time_s = 0.0;
    std::string config_path;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
};

/// Hashes every input and output and appends one JSON line to `path`.
/// Existing lines are never rewritten.
void append_manifest(const std::string& path, const RunManifest& m);

/// UTC timestamp, ISO 8601 with seconds.
std::string utc_now();

}  // namespace hase
