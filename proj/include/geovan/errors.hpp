#pragma once

#include <stdexcept>
#include <string>

namespace geovan {

// Base class for every error this library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file or JSON document.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A value breaks a documented type invariant.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

// Two constructs in one road network share an id.
class DuplicateConstructId : public Error {
 public:
  using Error::Error;
};

// A world may hold at most one road network.
class DuplicateRoadNetwork : public Error {
 public:
  using Error::Error;
};

// Detection stream references frames the camera config does not have.
class FrameMismatch : public Error {
 public:
  using Error::Error;
};

// A filter references an object or construct variable never declared.
class UnknownReference : public Error {
 public:
  using Error::Error;
};

// Predicate evaluation at a frame where a bound object has no sample.
class MissingSample : public Error {
 public:
  using Error::Error;
};

// pixel_to_world requires a strictly positive camera depth.
class NonPositiveDepth : public Error {
 public:
  using Error::Error;
};

// polygon_ray_exit requires the ray origin inside the polygon.
class OriginOutside : public Error {
 public:
  using Error::Error;
};

// Lane exit estimation requires at least one lane heading.
class NoHeading : public Error {
 public:
  using Error::Error;
};

}  // namespace geovan
