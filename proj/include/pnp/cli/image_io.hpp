#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "pnp/image.hpp"

namespace pnp::cli {

/// Malformed or truncated image file. offset() is the byte position where
/// parsing failed.
class ImageIoError : public Error {
public:
  ImageIoError(const std::filesystem::path &file, std::uint64_t offset, const std::string &what);
  std::uint64_t offset() const { return offset_; }

private:
  std::uint64_t offset_;
};

enum class PgmEncoding { Ascii, Binary };

/// Netpbm graymap. Values are scaled by 1 / maxval into [0, 1]; the image has
/// shape {height, width}.
Image read_pgm(const std::filesystem::path &file);
/// Clips to [0, 1] and rounds to the nearest level. maxval in [1, 65535];
/// samples above 255 are written as two bytes, most significant first.
void write_pgm(const std::filesystem::path &file, const Image &image, std::uint16_t maxval = 255,
               PgmEncoding encoding = PgmEncoding::Binary);

/// Raw little-endian float64 samples in row-major order, with the shape in a
/// sidecar file `<file>.json`: {"shape": [...], "dtype": "f64le"}.
Image read_rawf64(const std::filesystem::path &file);
void write_rawf64(const std::filesystem::path &file, const Image &image);
std::filesystem::path rawf64_sidecar(const std::filesystem::path &file);

/// Dispatches on the extension: .pgm, otherwise RAWF64.
Image read_image(const std::filesystem::path &file);

} // namespace pnp::cli
