#pragma once

#include <stdexcept>
#include <string>

namespace fsd {

// Configuration rejected before a run starts (bad SMART string, double
// normalization, decay parameters out of range).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Unsmoothed IDF variants evaluated at df values where the log degenerates
// (t at df=0, p at df=0 or df=N).
struct DegenerateFrequency : std::domain_error {
    using std::domain_error::domain_error;
};

// Normalization of an empty document under a variant other than "none".
struct ZeroNorm : std::domain_error {
    using std::domain_error::domain_error;
};

// Decay factor queried outside [1, N].
struct DeltaOutOfRange : std::domain_error {
    using std::domain_error::domain_error;
};

// KL divergence hit a zero probability in the reference model; only possible
// when smoothing was bypassed (lambda = 1) or the corpus lacks the term.
struct ZeroProbability : std::domain_error {
    using std::domain_error::domain_error;
};

// Language model requested for an empty document over an empty corpus.
struct EmptyModel : std::domain_error {
    using std::domain_error::domain_error;
};

// Threshold sweep over a score set with no target documents.
struct NoTargets : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Threshold sweep over a score set with no non-target documents.
struct NoNonTargets : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A cross-validation fold is missing targets or non-targets.
struct FoldTooSmall : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace fsd
