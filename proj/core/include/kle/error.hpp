// Copyright 2026 The kle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kle {

enum class ErrorKind {
  // hilbert_space
  NonSPDGram,
  BlockMismatch,
  DimMismatch,
  DegenerateBasis,
  // ensemble / kle_engine
  InvalidEnsemble,
  NonFiniteInput,
  MOutOfRange,
  // vector_field
  NoBlocks,
  R0OutOfRange,
  CrossBlockGram,
  // data_io
  MissingCell,
  DuplicateCell,
  MalformedRow,
  NegativeValue,
  SpectrumTooLong,
  BadMagic,
  DimensionMismatch,
  MaxvalZero,
  ParseError,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` carries the category.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace kle
