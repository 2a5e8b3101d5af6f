#pragma once

#include <stdexcept>
#include <string>

namespace qtomo {

// Base class for every error the library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct DegenerateRow : Error { using Error::Error; };
struct DegenerateReference : Error { using Error::Error; };
struct DegenerateHistogram : Error { using Error::Error; };
struct EncodingError : Error { using Error::Error; };
struct TooLarge : Error { using Error::Error; };
struct IndexError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// Parse failures report the 1-based line number of the offending line.
class ParseError : public Error {
  public:
    ParseError(const std::string& what, long line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    long line() const noexcept { return line_; }

  private:
    long line_;
};

} // namespace qtomo
