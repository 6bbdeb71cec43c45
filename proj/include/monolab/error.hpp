#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace monolab {

// All library failures derive from Error so callers (the scenario runner in
// particular) can isolate one failing cell without catching std::exception.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A model that violates the hypotheses (Ric >= 0, nonparabolic, n >= 3).
class InadmissibleModel : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  RangeError(const std::string& what, double lo, double hi)
      : Error(what + " (valid interval [" + fmt(lo) + ", " + fmt(hi) + "])"),
        lo_(lo),
        hi_(hi) {}
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }
  double lo_;
  double hi_;
};

class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double achieved, double requested)
      : Error(what + ": achieved relative error " + fmt(achieved) +
              " > requested " + fmt(requested)),
        achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }
  double achieved_;
};

/// Raised when a discretisation is too coarse or unstable for the request.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace monolab
