#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "panelsde/errors.hpp"

namespace panelsde {

inline std::string base64_encode(const std::vector<uint8_t>& bytes) {
    static const char* tbl = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        const uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out.push_back(tbl[(v >> 18) & 63]);
        out.push_back(tbl[(v >> 12) & 63]);
        out.push_back(tbl[(v >> 6) & 63]);
        out.push_back(tbl[v & 63]);
    }
    const size_t rem = bytes.size() - i;
    if (rem == 1) {
        const uint32_t v = bytes[i] << 16;
        out.push_back(tbl[(v >> 18) & 63]);
        out.push_back(tbl[(v >> 12) & 63]);
        out += "==";
    } else if (rem == 2) {
        const uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out.push_back(tbl[(v >> 18) & 63]);
        out.push_back(tbl[(v >> 12) & 63]);
        out.push_back(tbl[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

inline std::vector<uint8_t> base64_decode(const std::string& s) {
    auto val = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        if (c == '=') return -1;
        throw ParseError("invalid base64 character");
    };
    if (s.size() % 4 != 0) throw ParseError("base64 length not a multiple of 4");
    std::vector<uint8_t> out;
    out.reserve(s.size() / 4 * 3);
    for (size_t i = 0; i < s.size(); i += 4) {
        int v[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            v[k] = val(s[i + k]);
            if (v[k] < 0) {
                v[k] = 0;
                ++pad;
            }
        }
        const uint32_t w = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
        out.push_back((w >> 16) & 0xff);
        if (pad < 2) out.push_back((w >> 8) & 0xff);
        if (pad < 1) out.push_back(w & 0xff);
    }
    return out;
}

// Little-endian packing of doubles, the wire format for parameter blobs.
inline std::string encode_doubles(const std::vector<double>& v) {
    std::vector<uint8_t> bytes(v.size() * 8);
    for (size_t i = 0; i < v.size(); ++i) {
        uint64_t bits;
        std::memcpy(&bits, &v[i], 8);
        for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = (bits >> (8 * b)) & 0xff;
    }
    return base64_encode(bytes);
}

inline std::vector<double> decode_doubles(const std::string& s) {
    const std::vector<uint8_t> bytes = base64_decode(s);
    if (bytes.size() % 8 != 0) throw ParseError("parameter blob is not a whole number of doubles");
    std::vector<double> v(bytes.size() / 8);
    for (size_t i = 0; i < v.size(); ++i) {
        uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<uint64_t>(bytes[i * 8 + b]) << (8 * b);
        std::memcpy(&v[i], &bits, 8);
    }
    return v;
}

}  // namespace panelsde
