#pragma once

#include <stdexcept>
#include <string>

namespace eyectl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownTask : public Error {
 public:
  using Error::Error;
};

/// Config parse or validation failure. `field` and `line` locate the offending entry
/// (line is 0 when the value did not come from a file).
class ConfigError : public Error {
 public:
  ConfigError(std::string field, int line, const std::string& what)
      : Error("config error in '" + field + "'" + (line > 0 ? " (line " + std::to_string(line) + ")" : "") +
              ": " + what),
        field_(std::move(field)),
        line_(line) {}

  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

class EmptyStream : public Error {
 public:
  using Error::Error;
};

class ImageTooSmall : public Error {
 public:
  using Error::Error;
};

class WidthMismatch : public Error {
 public:
  using Error::Error;
};

class TooFewPoints : public Error {
 public:
  using Error::Error;
};

class NoCandidates : public Error {
 public:
  using Error::Error;
};

class NoDetections : public Error {
 public:
  using Error::Error;
};

class OutOfBounds : public Error {
 public:
  using Error::Error;
};

class EmptyCloud : public Error {
 public:
  using Error::Error;
};

class InvalidCalibration : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ScenarioError : public Error {
 public:
  ScenarioError(const std::string& what, long frame = -1)
      : Error(frame >= 0 ? what + " (frame " + std::to_string(frame) + ")" : what), frame_(frame) {}
  long frame() const noexcept { return frame_; }

 private:
  long frame_;
};

class CorpusError : public Error {
 public:
  using Error::Error;
};

}  // namespace eyectl
