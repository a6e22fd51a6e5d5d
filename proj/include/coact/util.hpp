#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace coact {

// RFC 1321 MD5, lowercase hex. Used for content-addressing screenshots,
// evaluator digests, and backend request digests.
std::string md5_hex(std::span<const uint8_t> data);
std::string md5_hex(const std::string& data);

std::string base64_encode(std::span<const uint8_t> data);
std::vector<uint8_t> base64_decode(const std::string& text);

// Caps `text` at `max_bytes`, appending a marker when truncation occurred.
// Returns true when the text was truncated.
bool truncate_output(std::string& text, size_t max_bytes);

inline constexpr size_t kOutputCapBytes = 32 * 1024;
inline constexpr const char* kTruncationMarker = "\n[...output truncated]";

double monotonic_seconds();

}  // namespace coact
