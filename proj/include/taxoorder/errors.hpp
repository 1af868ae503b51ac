#pragma once

#include <stdexcept>
#include <string>

namespace taxoorder {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File that cannot be opened, read, or written.
struct IoError final : Error { using Error::Error; };

// Graph / taxonomy errors.
struct UnknownConcept final : Error { using Error::Error; };
struct SelfLoop final : Error { using Error::Error; };
struct CyclicGraph final : Error { using Error::Error; };

// Embedding errors.
struct MalformedHeader final : Error { using Error::Error; };
struct DimensionMismatch final : Error { using Error::Error; };
struct DuplicateToken final : Error { using Error::Error; };
struct MissingEmbedding final : Error { using Error::Error; };
struct ZeroVector final : Error { using Error::Error; };
struct EmptyTaxonomy final : Error { using Error::Error; };

// Scorer errors.
struct ShapeMismatch final : Error { using Error::Error; };
struct EmptyBatch final : Error { using Error::Error; };
struct NoParent final : Error { using Error::Error; };
struct InsufficientNegatives final : Error { using Error::Error; };
struct NonFiniteLoss final : Error { using Error::Error; };

// Expansion errors.
struct UnknownParent final : Error { using Error::Error; };
struct DuplicateConcept final : Error { using Error::Error; };

// Eval errors.
struct UnknownQuery final : Error { using Error::Error; };
struct FractionUnreachable final : Error { using Error::Error; };

// Line-numbered loader error for malformed input files.
struct ParseError final : Error {
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what) {}
  using Error::Error;
};

}  // namespace taxoorder
