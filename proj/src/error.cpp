#include "iotfp/error.hpp"

namespace iotfp {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::FrameTooShort: return "frame_too_short";
    case ErrorKind::TruncatedHeader: return "truncated_header";
    case ErrorKind::BadMagic: return "bad_magic";
    case ErrorKind::UnsupportedLinkType: return "unsupported_link_type";
    case ErrorKind::TruncatedFile: return "truncated_file";
    case ErrorKind::IoFailure: return "io_failure";
    case ErrorKind::BadFormat: return "bad_format";
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::EmptyInput: return "empty_input";
    case ErrorKind::InsufficientTraffic: return "insufficient_traffic";
    case ErrorKind::EmptyData: return "empty_data";
    case ErrorKind::SingleClassData: return "single_class_data";
    case ErrorKind::DimensionMismatch: return "dimension_mismatch";
    case ErrorKind::KTooLarge: return "k_too_large";
    case ErrorKind::UnknownLabel: return "unknown_label";
    case ErrorKind::NoNegatives: return "no_negatives";
    case ErrorKind::ClassTooSmall: return "class_too_small";
  }
  return "unknown";
}

}  // namespace iotfp
