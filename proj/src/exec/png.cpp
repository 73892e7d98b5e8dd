#include "ezb/exec/png.hpp"

#include "ezb/core/errors.hpp"

#include <zlib.h>

#include <array>
#include <cstdio>

namespace ezb::exec {

namespace {

constexpr std::array<std::uint8_t, 8> kSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
    return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) |
           std::uint32_t{b[at + 3]};
}

void put_chunk(std::vector<std::uint8_t>& out, std::string_view type, std::span<const std::uint8_t> data) {
    put_u32(out, static_cast<std::uint32_t>(data.size()));
    std::size_t type_at = out.size();
    out.insert(out.end(), type.begin(), type.end());
    out.insert(out.end(), data.begin(), data.end());
    auto crc = crc32(0L, out.data() + type_at, static_cast<uInt>(out.size() - type_at));
    put_u32(out, static_cast<std::uint32_t>(crc));
}

constexpr std::string_view kB64 = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

} // namespace

std::vector<std::uint8_t> encode_png(int width, int height, std::span<const std::uint8_t> rgb,
                                     const std::map<std::string, std::string>& text_chunks) {
    if (width <= 0 || height <= 0 || rgb.size() != static_cast<std::size_t>(width) * height * 3)
        throw Error(ErrorKind::invalid_argument, "pixel buffer does not match image size");
    std::vector<std::uint8_t> out(kSignature.begin(), kSignature.end());

    std::vector<std::uint8_t> ihdr;
    put_u32(ihdr, static_cast<std::uint32_t>(width));
    put_u32(ihdr, static_cast<std::uint32_t>(height));
    ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0}); // 8-bit depth, truecolour, deflate, adaptive, no interlace
    put_chunk(out, "IHDR", ihdr);

    for (const auto& [key, value] : text_chunks) {
        std::vector<std::uint8_t> t(key.begin(), key.end());
        t.push_back(0);
        t.insert(t.end(), value.begin(), value.end());
        put_chunk(out, "tEXt", t);
    }

    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(height) * (width * 3 + 1));
    for (int y = 0; y < height; ++y) {
        raw.push_back(0); // filter: none
        auto row = rgb.subspan(static_cast<std::size_t>(y) * width * 3, static_cast<std::size_t>(width) * 3);
        raw.insert(raw.end(), row.begin(), row.end());
    }
    uLongf packed_len = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> packed(packed_len);
    if (compress2(packed.data(), &packed_len, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw Error(ErrorKind::render_failed, "deflate failed");
    packed.resize(packed_len);
    put_chunk(out, "IDAT", packed);
    put_chunk(out, "IEND", {});
    return out;
}

PngInfo read_png_info(std::span<const std::uint8_t> png) {
    if (png.size() < 8 + 25 || !std::equal(kSignature.begin(), kSignature.end(), png.begin()))
        throw Error(ErrorKind::parse_error, "not a PNG stream");
    PngInfo info;
    std::size_t at = 8;
    while (at + 12 <= png.size()) {
        auto len = get_u32(png, at);
        if (at + 12 + len > png.size()) throw Error(ErrorKind::parse_error, "truncated PNG chunk");
        std::string type(reinterpret_cast<const char*>(png.data() + at + 4), 4);
        auto data = png.subspan(at + 8, len);
        if (type == "IHDR" && len >= 8) {
            info.width = static_cast<int>(get_u32(data, 0));
            info.height = static_cast<int>(get_u32(data, 4));
        } else if (type == "tEXt") {
            auto nul = std::find(data.begin(), data.end(), std::uint8_t{0});
            if (nul != data.end())
                info.text[std::string(data.begin(), nul)] = std::string(nul + 1, data.end());
        } else if (type == "IEND") {
            return info;
        }
        at += 12 + len;
    }
    throw Error(ErrorKind::parse_error, "PNG stream without IEND");
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        std::uint32_t n = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8) | bytes[i + 2];
        for (int s = 18; s >= 0; s -= 6) out.push_back(kB64[(n >> s) & 63]);
    }
    if (i < bytes.size()) {
        std::uint32_t n = std::uint32_t{bytes[i]} << 16;
        if (i + 1 < bytes.size()) n |= std::uint32_t{bytes[i + 1]} << 8;
        out.push_back(kB64[(n >> 18) & 63]);
        out.push_back(kB64[(n >> 12) & 63]);
        out.push_back(i + 1 < bytes.size() ? kB64[(n >> 6) & 63] : '=');
        out.push_back('=');
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    std::vector<std::uint8_t> out;
    std::uint32_t acc = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=') break;
        auto pos = kB64.find(c);
        if (pos == std::string_view::npos) throw Error(ErrorKind::parse_error, "invalid base64 character");
        acc = (acc << 6) | static_cast<std::uint32_t>(pos);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
        }
    }
    return out;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace ezb::exec
