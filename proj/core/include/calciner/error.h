#pragma once

#include <stdexcept>
#include <string>

namespace calciner {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (property documents, scenarios, specs).
class ValidationError : public Error
{
public:
    using Error::Error;
};

/// A scalar root solve could not bracket or converge on a solution.
class BracketError : public Error
{
public:
    using Error::Error;
};

/// A model evaluation left its domain of validity (negative concentration,
/// temperature outside the clamp, suspension model pole, ...).
class DomainError : public Error
{
public:
    using Error::Error;
};

/// Time integration failed (step size underflow, initialization failure).
class SolverError : public Error
{
public:
    using Error::Error;
};

} // namespace calciner
