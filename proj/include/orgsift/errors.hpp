#pragma once

#include <stdexcept>
#include <string>

namespace orgsift {

// Base for everything thrown by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad files, malformed records, incompatible artifacts.
class InputError : public Error {
public:
  using Error::Error;
};

// Statistically unusable inputs: too few samples, empty vocabularies,
// zero-variance training features.
class StatsError : public Error {
public:
  using Error::Error;
};

class DegenerateInput : public StatsError {
public:
  using StatsError::StatsError;
};

class InsufficientSample : public StatsError {
public:
  using StatsError::StatsError;
};

class EmptyText : public StatsError {
public:
  using StatsError::StatsError;
};

class DegenerateVocabulary : public StatsError {
public:
  using StatsError::StatsError;
};

class InsufficientTraining : public StatsError {
public:
  using StatsError::StatsError;
};

class DegenerateFeature : public StatsError {
public:
  explicit DegenerateFeature(const std::string& feature)
      : StatsError("zero variance among organic training values of feature: " + feature),
        feature_(feature) {}
  const std::string& feature() const { return feature_; }

private:
  std::string feature_;
};

class MaskMismatch : public InputError {
public:
  using InputError::InputError;
};

}  // namespace orgsift
