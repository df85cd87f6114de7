#pragma once

#include <stdexcept>
#include <string>

namespace fracfv {

/// Failure categories; the CLI maps each to a distinct exit code.
enum class ErrorCategory { Mesh = 2, Format = 3, Assembly = 4, Solver = 5, Usage = 6, Io = 7 };

class Error : public std::runtime_error {
public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

private:
  ErrorCategory category_;
};

class MeshError : public Error {
public:
  explicit MeshError(const std::string& what) : Error(ErrorCategory::Mesh, what) {}
};

class FormatError : public Error {
public:
  explicit FormatError(const std::string& what) : Error(ErrorCategory::Format, what) {}
};

class AssemblyError : public Error {
public:
  explicit AssemblyError(const std::string& what) : Error(ErrorCategory::Assembly, what) {}
};

class SolverError : public Error {
public:
  explicit SolverError(const std::string& what) : Error(ErrorCategory::Solver, what) {}
};

class UsageError : public Error {
public:
  explicit UsageError(const std::string& what) : Error(ErrorCategory::Usage, what) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::Io, what) {}
};

}  // namespace fracfv
