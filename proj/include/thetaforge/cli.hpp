#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "thetaforge/cones.hpp"
#include "thetaforge/errfn.hpp"
#include "thetaforge/theta.hpp"

namespace thetaforge::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitWall = 2;
inline constexpr int kExitInvalid = 3;
inline constexpr int kExitBudget = 4;

// Parsed job document. Sections absent from the file stay empty; unknown
// keys anywhere are rejected with ValidationError.
struct JobConfig {
    std::optional<BilinearForm> form;
    std::optional<ConePair> pair;
    std::optional<ThetaSpec> theta;  // form, pair and quadrature already filled in
    TruncationPolicy policy;
    QuadratureSpec quad;
};

JobConfig parse_job_config(const std::string& text);
JobConfig load_job_config(const std::string& path);

// "I<r>", inline rows "a,b;c,d", or a JSON file {"frame": [[row], ...]}.
ErrorFunctionFrame parse_frame(const std::string& spec);

// Runs the command line (args excludes the program name). Structured output
// goes to `out`, human summaries and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace thetaforge::cli
