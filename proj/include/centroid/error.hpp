#ifndef CENTROID_ERROR_HPP
#define CENTROID_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace centroid {

enum class ErrorKind {
  Domain,                      // argument outside a function's domain
  InvalidArgument,             // malformed input (shapes, sizes, parse)
  MismatchedDomains,           // step functions over different intervals
  DependentChannels,           // responsivities linearly dependent
  BoundaryOrExteriorResponse,  // response not strictly inside the zonotope
  UnsupportedDimension,        // membership test requested for m > 3
  Infeasible,                  // iterate left the unbounded-regime cone
  NotEstimable,                // unbounded saddlepoint equation has no root
  NonPositiveCombination,      // equalization weight not positive on a piece
  RankDeficient,               // finite reduction W lost rank
  MaxIterations,               // solver ran out of iterations
  Io,                          // file could not be read or written
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "Domain";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::MismatchedDomains: return "MismatchedDomains";
    case ErrorKind::DependentChannels: return "DependentChannels";
    case ErrorKind::BoundaryOrExteriorResponse: return "BoundaryOrExteriorResponse";
    case ErrorKind::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::NotEstimable: return "NotEstimable";
    case ErrorKind::NonPositiveCombination: return "NonPositiveCombination";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::MaxIterations: return "MaxIterations";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Every library failure is reported as an Error carrying a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace centroid

#endif  // CENTROID_ERROR_HPP
