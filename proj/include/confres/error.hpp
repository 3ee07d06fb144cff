#pragma once
// Error types shared by all confres modules.
//
// InputError and ParameterError describe bad caller input and map to exit
// code 2 in the CLI; everything else is treated as an internal failure.

#include <stdexcept>
#include <string>

namespace confres {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or out-of-range data (non-finite coordinates, bad indices, ...).
class InputError : public Error {
public:
    using Error::Error;
};

// A parameter outside its documented domain (k >= n, gamma < 0, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

// A computation that cannot produce a meaningful result from valid input.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace confres
