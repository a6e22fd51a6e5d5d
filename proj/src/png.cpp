#include "coact/png.hpp"

#include <zlib.h>

#include <cstring>
#include <stdexcept>

namespace coact {

Raster Raster::filled(int w, int h, uint8_t r, uint8_t g, uint8_t b) {
  Raster img;
  img.width = w;
  img.height = h;
  img.rgb.resize(size_t(w) * h * 3);
  for (size_t i = 0; i < img.rgb.size(); i += 3) {
    img.rgb[i] = r;
    img.rgb[i + 1] = g;
    img.rgb[i + 2] = b;
  }
  return img;
}

void Raster::set_pixel(int x, int y, uint8_t r, uint8_t g, uint8_t b) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  size_t off = 3 * (size_t(y) * width + x);
  rgb[off] = r;
  rgb[off + 1] = g;
  rgb[off + 2] = b;
}

void Raster::fill_rect(int x, int y, int w, int h, uint8_t r, uint8_t g,
                       uint8_t b) {
  int x0 = std::max(x, 0), y0 = std::max(y, 0);
  int x1 = std::min(x + w, width), y1 = std::min(y + h, height);
  for (int yy = y0; yy < y1; ++yy) {
    size_t off = 3 * (size_t(yy) * width + x0);
    for (int xx = x0; xx < x1; ++xx) {
      rgb[off] = r;
      rgb[off + 1] = g;
      rgb[off + 2] = b;
      off += 3;
    }
  }
}

namespace {

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(uint8_t(v >> 24));
  out.push_back(uint8_t(v >> 16));
  out.push_back(uint8_t(v >> 8));
  out.push_back(uint8_t(v));
}

void put_chunk(std::vector<uint8_t>& out, const char type[4],
               std::span<const uint8_t> payload) {
  put_u32(out, uint32_t(payload.size()));
  size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  uint32_t crc = uint32_t(
      crc32(0, out.data() + crc_start, uInt(out.size() - crc_start)));
  put_u32(out, crc);
}

}  // namespace

std::vector<uint8_t> encode_png(const Raster& img) {
  if (img.width <= 0 || img.height <= 0 ||
      img.rgb.size() != size_t(img.width) * img.height * 3) {
    throw std::invalid_argument("encode_png: inconsistent raster");
  }
  // Scanlines with filter byte 0 (none).
  std::vector<uint8_t> raw;
  raw.reserve(size_t(img.height) * (size_t(img.width) * 3 + 1));
  for (int y = 0; y < img.height; ++y) {
    raw.push_back(0);
    const uint8_t* row = img.rgb.data() + 3 * size_t(y) * img.width;
    raw.insert(raw.end(), row, row + size_t(img.width) * 3);
  }

  uLongf comp_cap = compressBound(uLong(raw.size()));
  std::vector<uint8_t> comp(comp_cap);
  if (compress2(comp.data(), &comp_cap, raw.data(), uLong(raw.size()), 1) !=
      Z_OK) {
    throw std::runtime_error("encode_png: deflate failed");
  }
  comp.resize(comp_cap);

  std::vector<uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<uint8_t> ihdr;
  put_u32(ihdr, uint32_t(img.width));
  put_u32(ihdr, uint32_t(img.height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // color type: truecolor
  ihdr.push_back(0);  // compression
  ihdr.push_back(0);  // filter
  ihdr.push_back(0);  // interlace
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", comp);
  put_chunk(out, "IEND", {});
  return out;
}

std::optional<PngDims> png_dimensions(std::span<const uint8_t> bytes) {
  static const uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() < 24 || std::memcmp(bytes.data(), sig, 8) != 0)
    return std::nullopt;
  if (std::memcmp(bytes.data() + 12, "IHDR", 4) != 0) return std::nullopt;
  auto u32 = [&](size_t off) {
    return uint32_t(bytes[off]) << 24 | uint32_t(bytes[off + 1]) << 16 |
           uint32_t(bytes[off + 2]) << 8 | uint32_t(bytes[off + 3]);
  };
  return PngDims{int(u32(16)), int(u32(20))};
}

}  // namespace coact
