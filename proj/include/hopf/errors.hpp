#pragma once

#include <stdexcept>
#include <string>

namespace hopf {

/// Requested parameters do not define a Hopf point (no purely imaginary
/// eigenvalue pair within tolerance).
struct NotHopfPointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// More eigenvalues on the imaginary axis than the single critical pair.
struct DegenerateSpectrumError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A non-resonant homological system turned out singular: the spectrum
/// carries an additional resonance at (j-k)*i*omega0.
struct ResonanceError : std::runtime_error {
    int j, k;
    ResonanceError(int j_, int k_, const std::string& msg)
        : std::runtime_error(msg), j(j_), k(k_) {}
};

/// Adaptive integration could not proceed (step size underflow).
struct StiffnessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-finite values encountered in a numeric kernel.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Continuation/Newton failed to converge; carries the last accepted point.
struct ContinuationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace hopf
