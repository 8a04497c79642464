#pragma once

#include <stdexcept>
#include <string>

namespace sylcap {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input data: bad file formats, bad rows, bad encodings.
struct DataError : Error {
    using Error::Error;
};

struct EncodingError : DataError {
    using DataError::DataError;
};

} // namespace sylcap
