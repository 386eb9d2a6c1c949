#pragma once

#include <stdexcept>
#include <string>

namespace ssparse {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Grammar file syntax or well-formedness problem.
class GrammarError : public Error {
 public:
  using Error::Error;
};

/// Input token not in the grammar's terminal vocabulary.
class TokenError : public Error {
 public:
  TokenError(std::string token, int position)
      : Error("unknown token '" + token + "' at position " +
              std::to_string(position)),
        token_(std::move(token)),
        position_(position) {}

  const std::string& token() const { return token_; }
  int position() const { return position_; }

 private:
  std::string token_;
  int position_;
};

/// The start symbol does not cover the full input span.
class NoParseError : public Error {
 public:
  using Error::Error;
};

/// MTheory syntax, validation, or grounding problem.
class MebnError : public Error {
 public:
  using Error::Error;
};

/// Exact inference failure: inconsistent evidence or state-space cap.
class InferenceError : public Error {
 public:
  using Error::Error;
};

/// Conflation of contradictory certainties or entity registration clash.
class BridgeError : public Error {
 public:
  using Error::Error;
};

}  // namespace ssparse
