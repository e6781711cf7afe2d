/* Copyright 2026 The Seedscan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <stdexcept>
#include <string>

namespace seedscan {

/// Broad failure classes. The CLI maps each class onto a process exit code.
enum class ErrorKind {
  kUsage,       // API misuse or bad command line
  kValidation,  // a value or dataset violates a documented constraint
  kIo,          // the filesystem refused a read or write
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message)
      : Error(ErrorKind::kUsage, message) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ErrorKind::kValidation, message) {}
};

/// Tensor shapes do not agree.
class DimensionError : public ValidationError {
 public:
  explicit DimensionError(const std::string& message)
      : ValidationError("dimension error: " + message) {}
};

class ConfigError : public ValidationError {
 public:
  explicit ConfigError(const std::string& message)
      : ValidationError("config error: " + message) {}
};

/// Dataset directory tree does not follow split/class layout.
class LayoutError : public ValidationError {
 public:
  explicit LayoutError(const std::string& message)
      : ValidationError("layout error: " + message) {}
};

/// An image file exists but cannot be decoded.
class IngestionError : public ValidationError {
 public:
  explicit IngestionError(const std::string& message)
      : ValidationError("ingestion error: " + message) {}
};

/// Scene placement ran out of attempts.
class CapacityError : public ValidationError {
 public:
  explicit CapacityError(const std::string& message)
      : ValidationError("capacity error: " + message) {}
};

/// Checkpoint bytes are truncated or fail the checksum.
class IntegrityError : public ValidationError {
 public:
  explicit IntegrityError(const std::string& message)
      : ValidationError("integrity error: " + message) {}
};

class VersionError : public ValidationError {
 public:
  explicit VersionError(const std::string& message)
      : ValidationError("version error: " + message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message)
      : Error(ErrorKind::kIo, "I/O error: " + message) {}
};

}  // namespace seedscan
