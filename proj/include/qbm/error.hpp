#pragma once

#include <stdexcept>
#include <string>

namespace qbm {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the documented domain of an operation.
class domain_error : public error {
public:
    using error::error;
};

/// Argument lies on a branch cut or at a pole of a multivalued function.
class branch_cut_error : public domain_error {
public:
    using domain_error::domain_error;
};

/// A numerical procedure did not reach its tolerance.
class numeric_error : public error {
public:
    numeric_error(const std::string& what, double achieved_error = 0.0)
        : error(what), m_achieved(achieved_error) {}

    double achieved_error() const noexcept { return m_achieved; }

private:
    double m_achieved;
};

/// An intermediate quantity exceeds the representable double range.
class overflow_error : public numeric_error {
public:
    using numeric_error::numeric_error;
};

/// The Fock-space truncation is too small for the requested evolution.
class truncation_error : public error {
public:
    using error::error;
};

}  // namespace qbm
