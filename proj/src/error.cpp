#include "fsl/error.hpp"

namespace fsl {

const char* to_string(FormatErrorKind kind) {
    switch (kind) {
        case FormatErrorKind::Io: return "io";
        case FormatErrorKind::BadMagic: return "bad magic";
        case FormatErrorKind::UnsupportedVersion: return "unsupported version";
        case FormatErrorKind::Truncated: return "truncated";
        case FormatErrorKind::DimensionMismatch: return "dimension mismatch";
        case FormatErrorKind::Malformed: return "malformed";
    }
    return "unknown";
}

}  // namespace fsl
