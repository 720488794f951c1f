#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pilotwave/config.hpp"
#include "pilotwave/errors.hpp"

namespace pilotwave {

// A runtime failure tagged with the pipeline phase it interrupted.
struct RunError : Error {
    RunError(std::string phase_, const std::string& what_)
        : Error("phase " + phase_ + ": " + what_), phase(std::move(phase_)) {}
    std::string phase;
};

struct ScenarioInfo {
    std::string name;
    std::string summary;
    std::string config_text;  // complete runnable JSON
};

const std::vector<ScenarioInfo>& scenario_registry();
const ScenarioInfo* find_scenario(const std::string& name);  // nullptr if absent

struct AnalysisOutcome {
    std::string kind;
    bool pass = false;
    std::vector<std::string> details;  // human-readable facts, one per entry
};

struct RunManifest {
    std::string tool_version;
    std::string name;
    std::uint64_t seed = 0;
    std::string canonical;                  // canonical config echo
    std::vector<std::pair<std::string, double>> timings;  // phase, seconds
    std::map<std::string, std::string> checksums;  // artifact -> 16-digit hex
    std::uint64_t checksum = 0;  // combined fingerprint over the table above
    std::vector<AnalysisOutcome> outcomes;
    bool pass = false;
};

// fnv1a over "name:hash\n" rows in map order; independent of wall clock and
// thread count, so reruns of a deterministic scenario reproduce it bitwise
std::uint64_t combined_checksum(const std::map<std::string, std::string>& checksums);

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest read_manifest(const std::filesystem::path& path);

// Evolve, sample, integrate, analyze, export artifacts and plots, and write
// manifest.json under run_dir.  Analysis failures come back as pass = false;
// anything that prevents completing the pipeline throws RunError.  The thread
// count is a resource knob, not part of the experiment: every artifact byte
// is identical for any value.
RunManifest run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& run_dir,
                         std::size_t threads = 4);

struct VerifyResult {
    bool ok = false;
    std::vector<std::string> mismatches;
};

// Re-hashes every artifact listed in manifest.json and reports differences.
VerifyResult verify_run(const std::filesystem::path& run_dir);

}  // namespace pilotwave
