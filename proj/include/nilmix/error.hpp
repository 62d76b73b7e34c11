#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nilmix {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input that cannot describe a valid object (bad shape, non-monic polynomial, ...).
/// The CLI maps these to exit code 2.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A well-formed input that violates a mathematical precondition of an operation.
/// The CLI maps these to exit code 3.
class PreconditionFailure : public Error {
public:
    using Error::Error;
};

class NonMonic : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class ReduciblePolynomial : public InvalidInput {
public:
    ReduciblePolynomial(const std::string& what, std::vector<std::string> factors)
        : InvalidInput(what), factors_(std::move(factors)) {}
    const std::vector<std::string>& factors() const noexcept { return factors_; }

private:
    std::vector<std::string> factors_;
};

class NotSquarefree : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class NotAUnit : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class DimensionMismatch : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class NotUnimodular : public InvalidInput {
public:
    NotUnimodular(const std::string& what, std::size_t index)
        : InvalidInput(what), index_(index) {}
    std::size_t generator() const noexcept { return index_; }

private:
    std::size_t index_;
};

class NotCommuting : public InvalidInput {
public:
    NotCommuting(const std::string& what, std::size_t first, std::size_t second)
        : InvalidInput(what), first_(first), second_(second) {}
    std::size_t first() const noexcept { return first_; }
    std::size_t second() const noexcept { return second_; }

private:
    std::size_t first_;
    std::size_t second_;
};

class AllZero : public PreconditionFailure {
public:
    using PreconditionFailure::PreconditionFailure;
};

class DegreeTooLarge : public PreconditionFailure {
public:
    using PreconditionFailure::PreconditionFailure;
};

class DegenerateCombination : public PreconditionFailure {
public:
    using PreconditionFailure::PreconditionFailure;
};

class NotTotallyErgodic : public PreconditionFailure {
public:
    NotTotallyErgodic(const std::string& what, std::vector<long> witness)
        : PreconditionFailure(what), witness_(std::move(witness)) {}
    const std::vector<long>& witness() const noexcept { return witness_; }

private:
    std::vector<long> witness_;
};

class InsufficientData : public PreconditionFailure {
public:
    using PreconditionFailure::PreconditionFailure;
};

class InstanceTooLarge : public PreconditionFailure {
public:
    using PreconditionFailure::PreconditionFailure;
};

class RankNotSupported : public PreconditionFailure {
public:
    using PreconditionFailure::PreconditionFailure;
};

} // namespace nilmix
