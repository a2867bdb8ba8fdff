#ifndef TSE_VERSION_HPP
#define TSE_VERSION_HPP

namespace tse {

inline constexpr char kVersion[] = "0.1.0";

}  // namespace tse

#endif  // TSE_VERSION_HPP
