#pragma once

#include <stdexcept>
#include <string>

namespace brakeonset {

/// Base class for all data-shaped failures raised by this library.
/// Structural misuse (bad configuration, violated call preconditions)
/// throws std::invalid_argument instead.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Series construction or parsing failed (non-monotone time, too few
/// samples, non-finite values, non-uniform sampling, unreadable file).
class SeriesError : public Error {
public:
    using Error::Error;
};

/// A queried window contains too few samples.
class EmptyWindow : public Error {
public:
    using Error::Error;
};

/// A derived fit window collapsed (t_end <= t_start).
class InvalidWindow : public Error {
public:
    using Error::Error;
};

/// A search grid axis produced zero values.
class EmptyGrid : public Error {
public:
    using Error::Error;
};

/// A variance-based statistic is undefined because the input is constant.
class DegenerateVariance : public Error {
public:
    using Error::Error;
};

/// A classification rate is undefined because one class is empty.
class UndefinedRate : public Error {
public:
    using Error::Error;
};

/// Two events in one batch share an id.
class DuplicateEventId : public Error {
public:
    using Error::Error;
};

/// The manifest document itself could not be parsed or is schema-invalid.
class ManifestParseError : public Error {
public:
    using Error::Error;
};

}  // namespace brakeonset
