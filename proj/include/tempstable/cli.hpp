#pragma once

// Command-line workflows: fit, measure, price, stability.
// Exit codes: 0 success, 2 usage, 3 data/parse, 4 numeric.

#include <iosfwd>
#include <string>
#include <vector>

#include "tempstable/measures.hpp"
#include "tempstable/pricing.hpp"

namespace tempstable::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

struct RunConfig {
    double beta = 0.1;
    double annual_rate = 0.01;
    double dividend_rate = 0.0;
    int days_per_year = 255;
    double s0 = 7500.0;
    unsigned threads = 1;
    MeasureSpec measure{MeasureKind::MinEntropyBilateral, 2.0};
    ContourConfig contour;
};

/// Reads a JSON config; unknown keys are rejected with ParseError.
RunConfig load_config(const std::string& text);

/// Exit code for an error raised by the library.
int exit_code_for(const std::exception& e);

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tempstable::cli
