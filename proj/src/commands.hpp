#pragma once

#include <string>

#include <json.hpp>

namespace lceval {

inline constexpr const char* kVersion = "0.1.0";

// File-level operations behind the CLI subcommands. Each takes a resolved
// run configuration, writes its outputs plus a `<out>.run.json` sidecar
// recording the configuration and a timestamp, and throws input_error /
// internal_error on failure.
void cmd_extract(const nlohmann::json& config);
void cmd_train(const nlohmann::json& config);
void cmd_score(const nlohmann::json& config);
void cmd_eval(const nlohmann::json& config);
void cmd_pair(const nlohmann::json& config);
void cmd_perturb(const nlohmann::json& config);

// Dispatch by command name with exit-code semantics: 0 ok, 1 internal
// invariant breach, 2 user/input error. On failure `error_out` holds the
// message.
int run_command(const std::string& name, const std::string& config_json, std::string* error_out);

}  // namespace lceval
