#include "cli/manifest.hpp"

#include <json.hpp>

#include "cli/io.hpp"
#include "fairrank/error.hpp"

#ifndef FAIRRANK_VERSION
#define FAIRRANK_VERSION "0.0.0"
#endif

namespace fairrank::cli {

using nlohmann::ordered_json;

std::string version_string() { return FAIRRANK_VERSION; }

std::string manifest_json(const RunManifest& m) {
  ordered_json j;
  j["command"] = m.command;
  j["version"] = m.version;
  j["isa"] = m.isa;
  ordered_json opts = ordered_json::object();
  for (const auto& [k, v] : m.options.all()) opts[k] = v;
  j["options"] = opts;
  auto files = [](const std::vector<FileDigest>& list) {
    ordered_json arr = ordered_json::array();
    for (const auto& f : list) arr.push_back({{"path", f.path}, {"fnv1a64", f.fnv1a}});
    return arr;
  };
  j["inputs"] = files(m.inputs);
  j["outputs"] = files(m.outputs);
  j["seconds"] = m.seconds;
  return j.dump(2) + "\n";
}

RunManifest parse_manifest(const std::string& text) {
  RunManifest m;
  try {
    const auto j = ordered_json::parse(text);
    m.command = j.at("command").get<std::string>();
    m.version = j.value("version", "");
    m.isa = j.value("isa", "");
    for (const auto& [k, v] : j.at("options").items()) m.options.set(k, v.get<std::string>());
    for (const auto& f : j.value("inputs", ordered_json::array())) {
      m.inputs.push_back({f.at("path").get<std::string>(), f.at("fnv1a64").get<std::string>()});
    }
    for (const auto& f : j.value("outputs", ordered_json::array())) {
      m.outputs.push_back({f.at("path").get<std::string>(), f.at("fnv1a64").get<std::string>()});
    }
    m.seconds = j.value("seconds", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

RunManifest read_manifest(const std::filesystem::path& path) { return parse_manifest(read_text(path)); }

void finish_manifest(RunManifest& m, const std::filesystem::path& dir, const std::vector<std::string>& files,
                     const std::filesystem::path& path) {
  m.outputs.clear();
  for (const auto& f : files) m.outputs.push_back({f, fnv1a_file(dir / f)});
  write_text(path, manifest_json(m));
}

}  // namespace fairrank::cli
