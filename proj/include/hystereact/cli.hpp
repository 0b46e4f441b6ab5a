#pragma once

#include <string>

#include "hystereact/errors.hpp"

namespace hystereact {

inline constexpr const char* kVersion = "0.1.0";

struct CliOptions {
    std::string kind;        // simulate | slowfast | verify-branch | sweep | compare | kernel-check
    std::string config_path; // JSON experiment description
    std::string out_dir;     // overrides output.directory when nonempty
    int jobs = 0;            // 0 = HYSTEREACT_JOBS or hardware concurrency
};

// Executes the experiment named by opts.kind. Returns the process exit
// code: 0 completed, 1 configuration error, 2 transversality lost,
// 3 domain violation. Diagnostics go to stderr.
int run_cli(const CliOptions& opts);

// Same, but with the configuration text supplied directly (used by the
// tests; the file-based entry point reads the file and delegates here).
int run_experiment(const std::string& config_text, const std::string& kind,
                   const std::string& out_dir, int jobs);

} // namespace hystereact
