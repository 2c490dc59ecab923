#ifndef VISEMELAB_ERROR_HPP_
#define VISEMELAB_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace visemelab {

// Base for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (lexicon, CSV, JSON documents).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Inconsistent configuration detected before any work starts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Numerical or structural failure inside the HMM engine.
class ModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace visemelab

#endif  // VISEMELAB_ERROR_HPP_
