#pragma once

#include <stdexcept>
#include <string>

namespace goalrl {

// Argument outside its mathematical domain (gamma > 1, negative contribution, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Mismatched dimensions between tables, vectors or networks.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid profile, goal set or configuration document.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Operation called in the wrong lifecycle state (e.g. step after done).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Replay buffer does not yet hold enough transitions for a batch.
class NotReadyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CompatibilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace goalrl
