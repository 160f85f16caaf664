#pragma once

#include <stdexcept>
#include <string>

namespace cpx {

enum class ErrorCode {
  // crypto
  EmptyStatement,
  // registry
  DuplicateDid,
  BadSignature,
  NotFound,
  DuplicateSchema,
  UnknownAuthor,
  ValidationError,
  StaleVersion,
  ShrinkingSet,
  // connections
  NoPublicDid,
  InvitationReused,
  AnchorUnresolvable,
  ReplayedOrOutOfOrder,
  ConnectionClosed,
  // credentials
  UnknownSchema,
  MissingAttribute,
  ProofBindingMismatch,
  BadRequestProof,
  // presentation
  EmptyRequest,
  ConsentMissing,
  SelectionInvalid,
  UnknownRequest,
  // agents
  UnknownCredential,
  UnsupportedVersion,
  CorruptExport,
  // audit
  ChainBroken,
  // scenario
  ConfigInvalid,
  StepFailed,
  // io
  IoError,
};

const char* error_code_name(ErrorCode code);

class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_code_name(code)) +
                           (detail.empty() ? "" : ": " + detail)),
        code_(code) {}
  explicit ProtocolError(ErrorCode code) : ProtocolError(code, "") {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyStatement: return "EmptyStatement";
    case ErrorCode::DuplicateDid: return "DuplicateDid";
    case ErrorCode::BadSignature: return "BadSignature";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::DuplicateSchema: return "DuplicateSchema";
    case ErrorCode::UnknownAuthor: return "UnknownAuthor";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::StaleVersion: return "StaleVersion";
    case ErrorCode::ShrinkingSet: return "ShrinkingSet";
    case ErrorCode::NoPublicDid: return "NoPublicDid";
    case ErrorCode::InvitationReused: return "InvitationReused";
    case ErrorCode::AnchorUnresolvable: return "AnchorUnresolvable";
    case ErrorCode::ReplayedOrOutOfOrder: return "ReplayedOrOutOfOrder";
    case ErrorCode::ConnectionClosed: return "ConnectionClosed";
    case ErrorCode::UnknownSchema: return "UnknownSchema";
    case ErrorCode::MissingAttribute: return "MissingAttribute";
    case ErrorCode::ProofBindingMismatch: return "ProofBindingMismatch";
    case ErrorCode::BadRequestProof: return "BadRequestProof";
    case ErrorCode::EmptyRequest: return "EmptyRequest";
    case ErrorCode::ConsentMissing: return "ConsentMissing";
    case ErrorCode::SelectionInvalid: return "SelectionInvalid";
    case ErrorCode::UnknownRequest: return "UnknownRequest";
    case ErrorCode::UnknownCredential: return "UnknownCredential";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::CorruptExport: return "CorruptExport";
    case ErrorCode::ChainBroken: return "ChainBroken";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::StepFailed: return "StepFailed";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace cpx
