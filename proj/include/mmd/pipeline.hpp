#pragma once

// Estimation pipelines behind the command-line tool. Each writes its CSV,
// optional matrix exports and report.txt into cfg.out.

#include <string>

#include "mmd/config.hpp"
#include "mmd/semigroup.hpp"

namespace mmd {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitBudget = 2, kExitFail = 3 };

struct RunOutcome {
    int exit_code = kExitOk;
    bool pass = true;
    std::string report;
};

/// Catalog lookups by configuration name.
MapPtr build_map(const RunConfig& cfg, const std::string& name);
TransitionSet build_transition(const RunConfig& cfg);
CoverTarget build_set(const RunConfig& cfg);
PointSet build_point_set(const RunConfig& cfg);
SemigroupSpec build_semigroup(const RunConfig& cfg);

RunOutcome cmd_boxdim(const RunConfig& cfg);
RunOutcome cmd_mdim(const RunConfig& cfg);
RunOutcome cmd_demo_closure(const RunConfig& cfg);
RunOutcome cmd_semigroup(const RunConfig& cfg);

/// Dispatches on cfg.command; config and budget errors become exit codes.
RunOutcome run(const RunConfig& cfg);

}  // namespace mmd
