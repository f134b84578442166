#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace iotfp {

enum class ErrorKind {
  FrameTooShort,
  TruncatedHeader,
  BadMagic,
  UnsupportedLinkType,
  TruncatedFile,
  IoFailure,
  BadFormat,
  InvalidArgument,
  EmptyInput,
  InsufficientTraffic,
  EmptyData,
  SingleClassData,
  DimensionMismatch,
  KTooLarge,
  UnknownLabel,
  NoNegatives,
  ClassTooSmall,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (the CLI in
// particular) can map it to an exit code without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace iotfp
