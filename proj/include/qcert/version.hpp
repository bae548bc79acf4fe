#pragma once

namespace qcert {

inline constexpr const char* kVersion = "0.1.0";

} // namespace qcert
