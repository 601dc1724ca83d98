#include "peacegrid/crc64.hpp"

#include <array>

namespace peacegrid {

namespace {

std::array<std::uint64_t, 256> make_table() {
    // Reflected form of 0x42F0E1EBA9EA3693.
    constexpr std::uint64_t poly = 0xC96C5795D7870F42ull;
    std::array<std::uint64_t, 256> t{};
    for (std::uint64_t i = 0; i < 256; ++i) {
        std::uint64_t c = i;
        for (int b = 0; b < 8; ++b)
            c = (c & 1) ? (c >> 1) ^ poly : (c >> 1);
        t[i] = c;
    }
    return t;
}

}  // namespace

const std::uint64_t* Crc64::table() {
    static const std::array<std::uint64_t, 256> t = make_table();
    return t.data();
}

}  // namespace peacegrid
