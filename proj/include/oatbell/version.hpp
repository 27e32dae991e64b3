#pragma once

namespace oatbell {

inline constexpr const char* version_string = "1.0.0";
inline constexpr const char* csv_schema_version = "1";

}  // namespace oatbell
