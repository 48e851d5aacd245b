#pragma once

#include <stdexcept>
#include <string>

namespace lsl {

struct NonFiniteState : std::runtime_error {
  explicit NonFiniteState(const std::string& what) : std::runtime_error(what) {}
};

struct DomainEscape : std::runtime_error {
  explicit DomainEscape(const std::string& what) : std::runtime_error(what) {}
};

struct MaxStepsExceeded : std::runtime_error {
  explicit MaxStepsExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct NotOnBoundary : std::runtime_error {
  explicit NotOnBoundary(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateGradient : std::runtime_error {
  explicit DegenerateGradient(const std::string& what) : std::runtime_error(what) {}
};

struct TubeDegenerate : std::runtime_error {
  explicit TubeDegenerate(const std::string& what) : std::runtime_error(what) {}
};

struct SanityBoundViolated : std::runtime_error {
  explicit SanityBoundViolated(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyInterface : std::runtime_error {
  explicit EmptyInterface(const std::string& what) : std::runtime_error(what) {}
};

struct BandEmpty : std::runtime_error {
  explicit BandEmpty(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

struct UnknownKey : std::runtime_error {
  explicit UnknownKey(const std::string& what) : std::runtime_error(what) {}
};

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lsl
