#pragma once

#include <stdexcept>
#include <string>

namespace spmtnet {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a formula (e.g. T <= 0).
class DomainError : public Error
{
public:
    using Error::Error;
};

/// A concentration left [0, c_s_max]; the solver state is no longer physical.
class SaturationError : public Error
{
public:
    SaturationError(const std::string& what, double time = 0.0)
        : Error(what), time_(time)
    {
    }
    double time() const { return time_; }

private:
    double time_;
};

/// Exchange current density is not positive, so the overpotential is undefined.
class KineticsError : public Error
{
public:
    using Error::Error;
};

class DimensionError : public Error
{
public:
    using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error
{
public:
    using Error::Error;
};

/// Malformed or inconsistent input file.
class FormatError : public Error
{
public:
    using Error::Error;
};

} // namespace spmtnet
