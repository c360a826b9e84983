#pragma once

namespace naqs::acceptance {

// Runs the ten acceptance criteria in order, printing one PASS/FAIL line
// each; returns the number of failures.
int run_all();

} // namespace naqs::acceptance
