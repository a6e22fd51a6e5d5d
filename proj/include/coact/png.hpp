#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace coact {

// Plain RGB8 raster. Pixel (x, y) lives at rgb[3 * (y * width + x)].
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> rgb;

  static Raster filled(int w, int h, uint8_t r, uint8_t g, uint8_t b);
  void set_pixel(int x, int y, uint8_t r, uint8_t g, uint8_t b);
  void fill_rect(int x, int y, int w, int h, uint8_t r, uint8_t g, uint8_t b);
};

// Deterministic PNG encoding: fixed zlib settings, no ancillary chunks.
// The same raster always encodes to identical bytes.
std::vector<uint8_t> encode_png(const Raster& img);

struct PngDims {
  int width;
  int height;
};

// Parses the IHDR header only. nullopt when the bytes are not a PNG.
std::optional<PngDims> png_dimensions(std::span<const uint8_t> bytes);

}  // namespace coact
