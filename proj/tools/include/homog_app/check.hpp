#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace homog::app {

struct CheckOptions {
    std::uint64_t seed = 1;
    int trials = 10;  ///< random cases per randomized property
    int mesh_n = 64;  ///< mesh for the bound-ordering property
};

struct CheckOutcome {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Quick self-test of the installed library: reference values, counts and
/// randomized invariants. Prints one PASS/FAIL line per property to `log`.
std::vector<CheckOutcome> run_property_checks(const CheckOptions& options, std::ostream& log);

}  // namespace homog::app
