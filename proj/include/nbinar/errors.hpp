#ifndef NBINAR_ERRORS_HPP
#define NBINAR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nbinar {

// A parameter or argument lies outside its admissible domain.
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// The data cannot support the requested estimator (e.g. a constant series).
class DegenerateSeriesError : public std::runtime_error {
 public:
  explicit DegenerateSeriesError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nbinar

#endif  // NBINAR_ERRORS_HPP
