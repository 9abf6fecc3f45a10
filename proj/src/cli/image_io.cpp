#include "pnp/cli/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include <json.hpp>

namespace pnp::cli {

ImageIoError::ImageIoError(const std::filesystem::path &file, std::uint64_t offset,
                           const std::string &what)
    : Error(file.string() + ": byte " + std::to_string(offset) + ": " + what), offset_(offset) {}

namespace {

std::vector<unsigned char> slurp(const std::filesystem::path &file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw ImageIoError(file, 0, "cannot open file");
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spill(const std::filesystem::path &file, const std::string &bytes) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ImageIoError(file, 0, "cannot open file for writing");
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw ImageIoError(file, 0, "write failed");
  }
}

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

/// Header tokenizer: whitespace separated, '#' starts a comment to end of line.
class PgmHeader {
public:
  PgmHeader(const std::filesystem::path &file, const std::vector<unsigned char> &bytes)
      : file_(file), bytes_(bytes) {}

  std::size_t pos() const { return pos_; }

  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') {
          ++pos_;
        }
      } else if (is_space(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  unsigned long number(const char *what) {
    skip_space();
    const std::size_t start = pos_;
    unsigned long v = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 0xFFFFFFFFul) {
        throw ImageIoError(file_, start, std::string(what) + " is too large");
      }
      ++pos_;
    }
    if (pos_ == start) {
      throw ImageIoError(file_, start,
                         pos_ >= bytes_.size() ? std::string("unexpected end of file reading ") + what
                                               : std::string("expected ") + what);
    }
    return v;
  }

  /// Exactly one whitespace byte separates the header from binary samples.
  void single_space() {
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) {
      throw ImageIoError(file_, pos_, "expected whitespace after maxval");
    }
    ++pos_;
  }

private:
  const std::filesystem::path &file_;
  const std::vector<unsigned char> &bytes_;
  std::size_t pos_ = 2;
};

std::string rawf64_bytes(const Image &image) {
  std::string out(image.size() * 8, '\0');
  for (std::size_t i = 0; i < image.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(image[i]);
    for (int b = 0; b < 8; ++b) {
      out[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xFFu);
    }
  }
  return out;
}

} // namespace

Image read_pgm(const std::filesystem::path &file) {
  const auto bytes = slurp(file);
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    throw ImageIoError(file, 0, "not a PGM file (expected magic P2 or P5)");
  }
  const bool binary = bytes[1] == '5';
  PgmHeader h(file, bytes);
  const std::size_t width_at = h.pos();
  const unsigned long width = h.number("width");
  const unsigned long height = h.number("height");
  if (width == 0 || height == 0) {
    throw ImageIoError(file, width_at, "image dimensions must be positive");
  }
  const std::size_t maxval_at = h.pos();
  const unsigned long maxval = h.number("maxval");
  if (maxval == 0 || maxval > 65535) {
    throw ImageIoError(file, maxval_at, "maxval must lie in [1, 65535]");
  }
  const std::size_t n = width * height;
  std::vector<double> data(n);
  const double scale = 1.0 / static_cast<double>(maxval);

  if (binary) {
    h.single_space();
    const std::size_t sample_bytes = maxval > 255 ? 2 : 1;
    const std::size_t start = h.pos();
    const std::size_t need = n * sample_bytes;
    if (bytes.size() - start < need) {
      throw ImageIoError(file, bytes.size(),
                         "truncated pixel data: expected " + std::to_string(need) +
                             " bytes after the header, found " +
                             std::to_string(bytes.size() - start));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t at = start + i * sample_bytes;
      unsigned long v = bytes[at];
      if (sample_bytes == 2) {
        v = (v << 8) | bytes[at + 1];
      }
      if (v > maxval) {
        throw ImageIoError(file, at, "sample exceeds maxval");
      }
      data[i] = static_cast<double>(v) * scale;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      h.skip_space();
      const std::size_t at = h.pos();
      const unsigned long v = h.number("pixel value");
      if (v > maxval) {
        throw ImageIoError(file, at, "sample exceeds maxval");
      }
      data[i] = static_cast<double>(v) * scale;
    }
  }
  return Image(Shape{height, width}, std::move(data));
}

void write_pgm(const std::filesystem::path &file, const Image &image, std::uint16_t maxval,
               PgmEncoding encoding) {
  if (image.ndim() != 2) {
    throw ArgumentError("write_pgm: expected a 2D image, got shape " + to_string(image.shape()));
  }
  if (maxval == 0) {
    throw ArgumentError("write_pgm: maxval must be >= 1");
  }
  const std::size_t height = image.shape()[0];
  const std::size_t width = image.shape()[1];
  std::string out = (encoding == PgmEncoding::Binary ? "P5\n" : "P2\n") + std::to_string(width) +
                    " " + std::to_string(height) + "\n" + std::to_string(maxval) + "\n";
  const bool wide = maxval > 255;
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double clipped = std::clamp(image[i], 0.0, 1.0);
    const auto level = static_cast<unsigned>(std::lround(clipped * maxval));
    if (encoding == PgmEncoding::Binary) {
      if (wide) {
        out.push_back(static_cast<char>(level >> 8));
      }
      out.push_back(static_cast<char>(level & 0xFFu));
    } else {
      out += std::to_string(level);
      out.push_back((i + 1) % width == 0 ? '\n' : ' ');
    }
  }
  spill(file, out);
}

std::filesystem::path rawf64_sidecar(const std::filesystem::path &file) {
  return std::filesystem::path(file.string() + ".json");
}

Image read_rawf64(const std::filesystem::path &file) {
  const auto sidecar = rawf64_sidecar(file);
  const auto meta_bytes = slurp(sidecar);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_bytes.begin(), meta_bytes.end());
  } catch (const nlohmann::json::parse_error &e) {
    throw ImageIoError(sidecar, e.byte, "malformed sidecar JSON");
  }
  if (!meta.is_object() || !meta.contains("shape") || !meta["shape"].is_array()) {
    throw ImageIoError(sidecar, 0, "sidecar lacks a \"shape\" array");
  }
  if (meta.value("dtype", std::string()) != "f64le") {
    throw ImageIoError(sidecar, 0, "unsupported dtype (expected \"f64le\")");
  }
  Shape shape;
  for (const auto &e : meta["shape"]) {
    if (!e.is_number_integer() || e.get<long long>() <= 0) {
      throw ImageIoError(sidecar, 0, "shape entries must be positive integers");
    }
    shape.push_back(e.get<std::size_t>());
  }
  validate_shape(shape);

  const auto bytes = slurp(file);
  const std::size_t n = element_count(shape);
  if (bytes.size() != n * 8) {
    throw ImageIoError(file, std::min(bytes.size(), n * 8),
                       (bytes.size() < n * 8 ? "truncated data: expected " : "trailing data: expected ") +
                           std::to_string(n * 8) + " bytes, found " + std::to_string(bytes.size()));
  }
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) {
      bits = (bits << 8) | bytes[i * 8 + b];
    }
    data[i] = std::bit_cast<double>(bits);
    if (!std::isfinite(data[i])) {
      throw ImageIoError(file, i * 8, "non-finite sample");
    }
  }
  return Image(std::move(shape), std::move(data));
}

void write_rawf64(const std::filesystem::path &file, const Image &image) {
  spill(file, rawf64_bytes(image));
  const nlohmann::json meta{{"shape", image.shape()}, {"dtype", "f64le"}};
  spill(rawf64_sidecar(file), meta.dump() + "\n");
}

Image read_image(const std::filesystem::path &file) {
  auto ext = file.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".pgm") {
    return read_pgm(file);
  }
  return read_rawf64(file);
}

} // namespace pnp::cli
