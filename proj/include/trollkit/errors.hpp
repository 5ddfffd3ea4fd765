#pragma once

#include <stdexcept>
#include <string>

namespace trollkit {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The input stream or file could not be read.
class IngestionError : public Error {
public:
    using Error::Error;
};

// More than half of a dump's records failed to parse under the declared format.
class FormatMismatchError : public Error {
public:
    using Error::Error;
};

// Reply graph is not a forest, or ids collide.
class StructuralError : public Error {
public:
    using Error::Error;
};

// Malformed or inconsistent caller-supplied data.
class InputError : public Error {
public:
    using Error::Error;
};

// Training data carries fewer than two classes.
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

// Agreement over zero paired items.
class UndefinedAgreementError : public Error {
public:
    using Error::Error;
};

} // namespace trollkit
