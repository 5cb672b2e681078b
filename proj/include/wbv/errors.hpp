#pragma once

#include <stdexcept>
#include <string>

namespace wbv {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input outside the domain of an operation (|beta| >= 1, bad lambda, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// (kappa, beta) violates the sign condition that keeps the vortex strength finite.
class AdmissibilityError : public DomainError {
public:
    using DomainError::DomainError;
};

class PoleError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    NumericalError(const std::string& what, long index = -1) : Error(what), index_(index) {}
    long index() const { return index_; }

private:
    long index_;
};

class NonconvergenceError : public Error {
public:
    NonconvergenceError(const std::string& what, double residual, int iterations)
        : Error(what), residual_(residual), iterations_(iterations) {}
    double residual() const { return residual_; }
    int iterations() const { return iterations_; }

private:
    double residual_;
    int iterations_;
};

class SingularJacobianError : public Error {
public:
    SingularJacobianError(const std::string& what, double rcond) : Error(what), rcond_(rcond) {}
    double rcond() const { return rcond_; }

private:
    double rcond_;
};

class DegeneratePointError : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace wbv
