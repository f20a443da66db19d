#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rmf {

// Base for every error raised by the library. Callers that do not care about
// the category can catch this one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class UnsupportedModel : public Error {
public:
    using Error::Error;
};

class GridCoverageError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : Error(what), residual_(last_residual) {}
    double last_residual() const noexcept { return residual_; }

private:
    double residual_;
};

// A state component became NaN/Inf. `step` is the fine-grid step index at
// which it was detected; `particle` is set when raised from a particle filter.
class NumericalBlowup : public Error {
public:
    static constexpr std::size_t kNoParticle = static_cast<std::size_t>(-1);

    NumericalBlowup(const std::string& what, std::size_t step,
                    std::size_t particle = kNoParticle)
        : Error(what), step_(step), particle_(particle) {}
    std::size_t step() const noexcept { return step_; }
    std::size_t particle() const noexcept { return particle_; }

private:
    std::size_t step_;
    std::size_t particle_;
};

class DegenerateEnsemble : public Error {
public:
    using Error::Error;
};

} // namespace rmf
