#pragma once

#include <functional>
#include <string>

namespace fhmm::cli {

/// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kInputError = 1;
inline constexpr int kInternalError = 2;

/// Environment variable naming a default configuration file.
inline constexpr const char* kConfigEnv = "FHMM_CONFIG";

int run(int argc, char** argv);

/// Runs `body`, reporting exceptions on stderr under `command` and mapping
/// them to an exit status.
int guarded(const std::string& command, const std::function<void()>& body);

}  // namespace fhmm::cli
