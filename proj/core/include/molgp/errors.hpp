#ifndef MOLGP_ERRORS_HPP
#define MOLGP_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace molgp {

// Base class of every structured error thrown by the library. Messages are
// prefixed with the error-kind name.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// SMILES tokenizing/parsing failures. `position` is a character offset into
// the source string; `ring_index` is set for UnmatchedRingClosure.
class ParseError : public Error {
 public:
  enum class Kind {
    UnknownCharacter,
    UnterminatedBracket,
    UnmatchedRingClosure,
    UnbalancedParenthesis,
    InvalidBracketAtom,
    InvalidSyntax,
  };

  static const char* name(Kind k) {
    switch (k) {
      case Kind::UnknownCharacter: return "UnknownCharacter";
      case Kind::UnterminatedBracket: return "UnterminatedBracket";
      case Kind::UnmatchedRingClosure: return "UnmatchedRingClosure";
      case Kind::UnbalancedParenthesis: return "UnbalancedParenthesis";
      case Kind::InvalidBracketAtom: return "InvalidBracketAtom";
      case Kind::InvalidSyntax: return "InvalidSyntax";
    }
    return "ParseError";
  }

  ParseError(Kind kind, std::size_t position, const std::string& msg)
      : Error(std::string(name(kind)) + ": " + msg), kind(kind), position(position) {}

  Kind kind;
  std::size_t position = 0;
  int ring_index = -1;
};

class FingerprintError : public Error {
 public:
  enum class Kind { EmptyMolecule, BadConfig, BadHexLine };

  static const char* name(Kind k) {
    switch (k) {
      case Kind::EmptyMolecule: return "EmptyMolecule";
      case Kind::BadConfig: return "BadConfig";
      case Kind::BadHexLine: return "BadHexLine";
    }
    return "FingerprintError";
  }

  FingerprintError(Kind kind, const std::string& msg)
      : Error(std::string(name(kind)) + ": " + msg), kind(kind) {}

  Kind kind;
  // Index of the offending molecule/line for batch operations, -1 otherwise.
  long index = -1;
};

class KernelError : public Error {
 public:
  enum class Kind { WidthMismatch, EmptySequence, InputTooLarge, PairFailure };

  static const char* name(Kind k) {
    switch (k) {
      case Kind::WidthMismatch: return "WidthMismatch";
      case Kind::EmptySequence: return "EmptySequence";
      case Kind::InputTooLarge: return "InputTooLarge";
      case Kind::PairFailure: return "PairFailure";
    }
    return "KernelError";
  }

  KernelError(Kind kind, const std::string& msg)
      : Error(std::string(name(kind)) + ": " + msg), kind(kind) {}

  Kind kind;
  // Pair indices for errors propagated out of a Gram computation.
  long row = -1;
  long col = -1;
};

class GpError : public Error {
 public:
  enum class Kind {
    CholeskyFailure,
    ConstantTargets,
    DimensionMismatch,
    RepresentationMismatch,
    AllRestartsFailed,
  };

  static const char* name(Kind k) {
    switch (k) {
      case Kind::CholeskyFailure: return "CholeskyFailure";
      case Kind::ConstantTargets: return "ConstantTargets";
      case Kind::DimensionMismatch: return "DimensionMismatch";
      case Kind::RepresentationMismatch: return "RepresentationMismatch";
      case Kind::AllRestartsFailed: return "AllRestartsFailed";
    }
    return "GpError";
  }

  GpError(Kind kind, const std::string& msg)
      : Error(std::string(name(kind)) + ": " + msg), kind(kind) {}

  Kind kind;
};

class EvalError : public Error {
 public:
  enum class Kind {
    DatasetTooSmall,
    LengthMismatch,
    EmptyInput,
    InvalidQuantile,
    DomainError,
  };

  static const char* name(Kind k) {
    switch (k) {
      case Kind::DatasetTooSmall: return "DatasetTooSmall";
      case Kind::LengthMismatch: return "LengthMismatch";
      case Kind::EmptyInput: return "EmptyInput";
      case Kind::InvalidQuantile: return "InvalidQuantile";
      case Kind::DomainError: return "DomainError";
    }
    return "EvalError";
  }

  EvalError(Kind kind, const std::string& msg)
      : Error(std::string(name(kind)) + ": " + msg), kind(kind) {}

  Kind kind;
};

class DataError : public Error {
 public:
  enum class Kind {
    FileNotFound,
    MissingColumn,
    NoValidRows,
    VersionMismatch,
    CorruptFile,
  };

  static const char* name(Kind k) {
    switch (k) {
      case Kind::FileNotFound: return "FileNotFound";
      case Kind::MissingColumn: return "MissingColumn";
      case Kind::NoValidRows: return "NoValidRows";
      case Kind::VersionMismatch: return "VersionMismatch";
      case Kind::CorruptFile: return "CorruptFile";
    }
    return "DataError";
  }

  DataError(Kind kind, const std::string& msg)
      : Error(std::string(name(kind)) + ": " + msg), kind(kind) {}

  Kind kind;
};

}  // namespace molgp

#endif
