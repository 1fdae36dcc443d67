#ifndef NPN_UTF8_HPP_
#define NPN_UTF8_HPP_

#include <string>
#include <string_view>

namespace npn::utf8 {

// Throws std::invalid_argument on malformed input or surrogate code points.
std::u32string decode(std::string_view bytes);
std::string encode(std::u32string_view text);
std::string encode(char32_t c);

}  // namespace npn::utf8

#endif  // NPN_UTF8_HPP_
