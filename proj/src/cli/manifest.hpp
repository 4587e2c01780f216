#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cli/options.hpp"

namespace fairrank::cli {

struct FileDigest {
  std::string path;  // inputs: absolute; outputs: relative to the manifest's directory
  std::string fnv1a;
};

/// Everything needed to rerun a command: the resolved option set, the input
/// files it read and the files it wrote, each with a content hash.
struct RunManifest {
  std::string command;
  std::string version;
  std::string isa;
  Options options;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  double seconds = 0.0;
};

std::string manifest_json(const RunManifest& m);
RunManifest parse_manifest(const std::string& text);
RunManifest read_manifest(const std::filesystem::path& path);

/// Hashes `files` (relative to `dir`) into m.outputs and writes the manifest to `path`.
void finish_manifest(RunManifest& m, const std::filesystem::path& dir, const std::vector<std::string>& files,
                     const std::filesystem::path& path);

std::string version_string();

}  // namespace fairrank::cli
