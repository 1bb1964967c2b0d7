#pragma once

#include <stdexcept>
#include <string>

namespace weilfield {

/// Operands live in different Weil algebras.
class AlgebraMismatch : public std::invalid_argument {
public:
    explicit AlgebraMismatch(const std::string& what) : std::invalid_argument(what) {}
};

/// A multi-index or array index outside the algebra basis / lattice.
class OutOfBasis : public std::out_of_range {
public:
    explicit OutOfBasis(const std::string& what) : std::out_of_range(what) {}
};

/// A SmoothMap was asked for a derivative order it cannot supply.
class DerivativeOrderUnavailable : public std::domain_error {
public:
    explicit DerivativeOrderUnavailable(const std::string& what) : std::domain_error(what) {}
};

/// Bad configuration or violated precondition (CFL, support rules, descriptors).
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Nilpotent data would reach the guard band of a line lattice during a run.
class ConeEscape : public std::runtime_error {
public:
    explicit ConeEscape(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace weilfield
