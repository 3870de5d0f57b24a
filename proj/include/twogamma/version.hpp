#pragma once

namespace twogamma {
inline constexpr const char *version = "1.0.0";
} // namespace twogamma
