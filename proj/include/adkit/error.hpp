#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace adkit {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on a plain input value does not hold.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A geometric quantity is degenerate (non-positive extent, empty region).
class InvalidGeometry : public Error {
 public:
  using Error::Error;
};

// Matrix / embedding dimensions are inconsistent.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A JSON document violates the layout / dataset schema. Carries the JSON
// path of the offending node.
class SchemaViolation : public Error {
 public:
  SchemaViolation(std::string path, const std::string& detail)
      : Error(path + ": " + detail), path_(std::move(path)) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// A pipeline stage backend failed. Carries the stage name.
class BackendError : public Error {
 public:
  BackendError(std::string stage, const std::string& detail)
      : Error("backend " + stage + ": " + detail), stage_(std::move(stage)) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

class BackendTimeout : public BackendError {
 public:
  BackendTimeout(std::string stage, const std::string& detail)
      : BackendError(std::move(stage), "timeout: " + detail) {}
};

// Non-fatal events (clamped coordinates, fallback choices, overflow text).
// Operations that can warn take an optional `Warnings*`; passing nullptr
// discards the messages.
struct Warnings {
  std::vector<std::string> messages;

  void add(std::string message) { messages.push_back(std::move(message)); }
  bool empty() const { return messages.empty(); }
  std::size_t size() const { return messages.size(); }

  bool contains(std::string_view needle) const {
    for (const auto& m : messages)
      if (m.find(needle) != std::string::npos) return true;
    return false;
  }
};

inline void warn(Warnings* sink, std::string message) {
  if (sink) sink->add(std::move(message));
}

}  // namespace adkit
