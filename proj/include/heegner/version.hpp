#pragma once

namespace heegner {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kCertificateSchemaVersion = 1;

} // namespace heegner
