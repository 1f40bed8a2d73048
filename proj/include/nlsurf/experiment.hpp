#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nlsurf/quenched.hpp"
#include "nlsurf/surface_terms.hpp"
#include "nlsurf/verifier.hpp"

namespace nlsurf::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kSchemaId = "nlsurf.result/1";

enum ExitCode : int { kOk = 0, kVerificationFailed = 1, kUsage = 2, kInfeasible = 3 };

/// Everything needed to rerun one invocation. Written next to the result file as
/// <out>.manifest.json, so the result file itself carries no wall-clock data.
struct RunManifest {
  std::vector<std::string> command;  // argv without the program name
  nlohmann::json config;
  std::vector<std::uint64_t> seeds;
  nlohmann::json versions;
  double wall_time_s = 0.0;
  std::vector<std::pair<std::string, std::string>> digests;  // file -> fnv1a64 hex
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

std::string fnv1a64_hex(std::string_view bytes);

nlohmann::json to_json(const Estimate& e);
nlohmann::json to_json(const SurfaceTermResult& r);
nlohmann::json to_json(const CompositionCheck& c);
nlohmann::json to_json(const VerificationReport& r);
nlohmann::json to_json(const MonotoneReport& r);
nlohmann::json to_json(const SuiteReport& r);

/// Header plus one row per result; 17 significant digits.
std::string emit_sweep(const std::vector<SurfaceTermResult>& results);

/// Parses and executes; result to --out (or `out`), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace nlsurf::cli
