// Copyright 2026 The kesten authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace kesten {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed, missing or degenerate input. The CLI maps these to exit code 2.
class InputError : public Error {
public:
    using Error::Error;
};

/// Numeric or regime failure (overflow, non-convergence, ...). Exit code 3.
class NumericError : public Error {
public:
    using Error::Error;
};

#define KESTEN_DEFINE_ERROR(Name, Base)                                       \
    class Name : public Base {                                                \
    public:                                                                   \
        explicit Name(const std::string& what) : Base(#Name ": " + what) {}   \
    };

KESTEN_DEFINE_ERROR(EmptyInput, InputError)
KESTEN_DEFINE_ERROR(InvalidArgument, InputError)
KESTEN_DEFINE_ERROR(InsufficientPoints, InputError)
KESTEN_DEFINE_ERROR(InsufficientBins, InputError)
KESTEN_DEFINE_ERROR(ZeroVariance, InputError)
KESTEN_DEFINE_ERROR(EmptyTail, InputError)
KESTEN_DEFINE_ERROR(NonMonotoneWealth, InputError)
KESTEN_DEFINE_ERROR(ZeroBucket, InputError)
KESTEN_DEFINE_ERROR(Overlap, InputError)
KESTEN_DEFINE_ERROR(MissingPercentile, InputError)
KESTEN_DEFINE_ERROR(AllNonPositive, InputError)
KESTEN_DEFINE_ERROR(MissingArtifact, InputError)
KESTEN_DEFINE_ERROR(GammaIsOne, NumericError)
KESTEN_DEFINE_ERROR(WrongRegime, NumericError)
KESTEN_DEFINE_ERROR(NoRoot, NumericError)

#undef KESTEN_DEFINE_ERROR

/// Parse failure with file/line context.
class ParseError : public InputError {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : InputError("ParseError: " + file + (line ? ":" + std::to_string(line) : std::string{}) +
                     ": " + what),
          file_(file), line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

/// Wealth left the representable range. Carries the agent and the step.
class OverflowError : public NumericError {
public:
    OverflowError(std::size_t agent, std::uint64_t step, double value)
        : NumericError("Overflow: agent " + std::to_string(agent) + " reached " +
                       std::to_string(value) + " at step " + std::to_string(step)),
          agent_(agent), step_(step) {}

    std::size_t agent() const noexcept { return agent_; }
    std::uint64_t step() const noexcept { return step_; }

private:
    std::size_t agent_;
    std::uint64_t step_;
};

/// R3 replacement found no solvent donor.
class AllBankrupt : public NumericError {
public:
    explicit AllBankrupt(std::uint64_t step)
        : NumericError("AllBankrupt: no agent with positive wealth at step " +
                       std::to_string(step)),
          step_(step) {}

    std::uint64_t step() const noexcept { return step_; }

private:
    std::uint64_t step_;
};

/// An optimizer gave up. Holds the best parameters it reached.
template <class Params>
class FitDidNotConverge : public NumericError {
public:
    FitDidNotConverge(const std::string& what, Params best)
        : NumericError("FitDidNotConverge: " + what), best_(best) {}

    const Params& best() const noexcept { return best_; }

private:
    Params best_;
};

}  // namespace kesten
