#pragma once

#include <stdexcept>
#include <string>

namespace punct {

// Base class for all toolkit failures. CLI catches these and prints
// a single "error: ..." line on stderr.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

// Input data violated a file format contract.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& message) : Error(message) {}
};

// A function was called outside its documented precondition.
class ContractError : public Error {
public:
    explicit ContractError(const std::string& message) : Error(message) {}
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ContractError(message);
}

}  // namespace punct
