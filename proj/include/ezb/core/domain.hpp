#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ezb {

// The five editing domains. The enumerator value is the canonical ordering index.
enum class Domain : std::uint8_t { geo = 0, mat = 1, light = 2, cam = 3, bg = 4 };

inline constexpr std::array<Domain, 5> kAllDomains = {Domain::geo, Domain::mat, Domain::light,
                                                      Domain::cam, Domain::bg};

constexpr std::size_t domain_index(Domain d) { return static_cast<std::size_t>(d); }

std::string_view to_string(Domain d);
std::optional<Domain> parse_domain(std::string_view tag);
// Throws Error(invalid_argument) on anything outside the closed set.
Domain domain_from_string(std::string_view tag);

// Sorted by canonical index with duplicates removed.
std::vector<Domain> canonical_domain_order(std::span<const Domain> domains);

} // namespace ezb
