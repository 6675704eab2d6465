// Copyright 2026 The chdet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace chdet {

// Two error families, matching the CLI exit codes: ValidationError and its
// subclasses exit with 1, FileError and its subclasses with 2.

class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad option values, singular transforms, windows larger than the image.
class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Array dimensions that do not line up (band counts, mask shapes, channels).
class ShapeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Rasters that are not on the same grid (pixel size or sub-pixel phase).
class GridMismatchError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Extents with no common area.
class EmptyOverlapError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Input features that cannot be interpreted (e.g. malformed class labels).
class IngestError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Values outside an operation's documented domain.
class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class FileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failure to open, read or write a file.
class IoError : public FileError {
public:
    using FileError::FileError;
};

/// A file that opened fine but does not parse: bad magic, truncated payload,
/// unknown dtype, values outside the format's contract.
class FormatError : public FileError {
public:
    using FileError::FileError;
};

} // namespace chdet
