#pragma once

#include <stdexcept>
#include <string>

namespace thetaforge {

// Base of every error raised by the library. Subclasses name the violated
// precondition so callers (the CLI in particular) can map them to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateForm : public Error { using Error::Error; };
class SingularFrame : public Error { using Error::Error; };
class WallTooClose : public Error { using Error::Error; };
class RankTooLarge : public Error { using Error::Error; };
class NotTimelike : public Error { using Error::Error; };
class DegenerateGram : public Error { using Error::Error; };
class NonExactInput : public Error { using Error::Error; };
class ZeroDelta : public Error { using Error::Error; };
class GenericityViolated : public Error { using Error::Error; };
class ValidationError : public Error { using Error::Error; };

}  // namespace thetaforge
