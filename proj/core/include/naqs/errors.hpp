#pragma once

#include <stdexcept>
#include <string>

namespace naqs {

// Estimator asked for a combination the model cannot provide, e.g.
// conditional sampling on a translationally symmetrized state.
class UnsupportedConfiguration : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A sampled configuration has zero probability under the distribution it
// was supposedly drawn from; indicates a broken sampler or state table.
class DegenerateSample : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Reverse-network conditional vanished on a drawn sample (support mismatch).
class WeightSingularity : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Requested system size exceeds what the dense/enumeration code guards allow.
class SizeLimit : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Monte Carlo trace came out non-positive; entropy undefined.
class NonPositiveTrace : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Usable fit window shrank below the minimum subset length.
class FitWindowError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Non-finite quantity encountered during optimization.
class NumericalFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Run configuration failed schema validation.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A referenced file (checkpoint, records, config) does not exist or cannot
// be opened.
class MissingArtifact : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace naqs
