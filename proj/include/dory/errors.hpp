#pragma once

#include <stdexcept>
#include <string>

namespace dory {

/// Base class for every error the toolkit raises on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// -- gateway ----------------------------------------------------------------

/// Transport or HTTP failure talking to a live endpoint.
class EndpointError : public Error {
 public:
  using Error::Error;
};

/// The endpoint ignored the logprob request (or a replayed entry lacks tokens).
class MissingLogprobs : public Error {
 public:
  using Error::Error;
};

/// Replay mode and the request fingerprint is not in the cassette.
/// Signals an incomplete fixture; never falls through to the network.
class CassetteMiss : public Error {
 public:
  using Error::Error;
};

// -- uncertainty ------------------------------------------------------------

class EmptySequence : public Error {
 public:
  using Error::Error;
};

/// A token carried a logprob > 0, which cannot be the log of a probability.
class PositiveLogprob : public Error {
 public:
  using Error::Error;
};

/// Shared/non-shared gap is undefined when either class is empty.
class DegeneratePartition : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class ZeroVariance : public Error {
 public:
  using Error::Error;
};

// -- metrics ----------------------------------------------------------------

/// Text normalizes to zero words, so the metric is undefined.
class EmptyText : public Error {
 public:
  using Error::Error;
};

class EmbedderUnavailable : public Error {
 public:
  using Error::Error;
};

// -- recovery / baselines ---------------------------------------------------

class EmptyOutput : public Error {
 public:
  using Error::Error;
};

class BankError : public Error {
 public:
  using Error::Error;
};

// -- bench ------------------------------------------------------------------

/// Dataset line failed to parse; the message names the line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

class DuplicateId : public Error {
 public:
  using Error::Error;
};

}  // namespace dory
