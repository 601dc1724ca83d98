#pragma once

#include <cstddef>
#include <cstdint>

namespace peacegrid {

// CRC-64/XZ: poly 0x42F0E1EBA9EA3693 reflected, init/xorout all-ones.
// crc64("123456789") == 0x995DC9BBDF1939FA.
class Crc64 {
public:
    Crc64() = default;

    void update(const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        std::uint64_t c = crc_;
        for (std::size_t i = 0; i < len; ++i)
            c = table()[(c ^ p[i]) & 0xFF] ^ (c >> 8);
        crc_ = c;
    }

    std::uint64_t value() const { return crc_ ^ 0xFFFFFFFFFFFFFFFFull; }

private:
    static const std::uint64_t* table();
    std::uint64_t crc_ = 0xFFFFFFFFFFFFFFFFull;
};

inline std::uint64_t crc64(const void* data, std::size_t len) {
    Crc64 c;
    c.update(data, len);
    return c.value();
}

}  // namespace peacegrid
