#ifndef RETOOL_VERSION_HPP
#define RETOOL_VERSION_HPP

namespace retool {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace retool

#endif
