#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ezb::exec {

// 8-bit RGB, row-major, width*height*3 bytes.
std::vector<std::uint8_t> encode_png(int width, int height, std::span<const std::uint8_t> rgb,
                                     const std::map<std::string, std::string>& text_chunks = {});

struct PngInfo {
    int width = 0;
    int height = 0;
    std::map<std::string, std::string> text;
};

// Reads the header and tEXt chunks; throws Error(parse_error) on a malformed stream.
PngInfo read_png_info(std::span<const std::uint8_t> png);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::string hex64(std::uint64_t v);

} // namespace ezb::exec
