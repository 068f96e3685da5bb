// Copyright 2026 The kle Authors
// SPDX-License-Identifier: Apache-2.0

#include "kle/error.hpp"

namespace kle {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonSPDGram: return "NonSPDGram";
    case ErrorKind::BlockMismatch: return "BlockMismatch";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::DegenerateBasis: return "DegenerateBasis";
    case ErrorKind::InvalidEnsemble: return "InvalidEnsemble";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::MOutOfRange: return "MOutOfRange";
    case ErrorKind::NoBlocks: return "NoBlocks";
    case ErrorKind::R0OutOfRange: return "R0OutOfRange";
    case ErrorKind::CrossBlockGram: return "CrossBlockGram";
    case ErrorKind::MissingCell: return "MissingCell";
    case ErrorKind::DuplicateCell: return "DuplicateCell";
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::NegativeValue: return "NegativeValue";
    case ErrorKind::SpectrumTooLong: return "SpectrumTooLong";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::MaxvalZero: return "MaxvalZero";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace kle
