#include <openssl/evp.h>
#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>

#include "copaint/io.hpp"
#include "copaint/metrics.hpp"

namespace copaint {

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_file(const std::filesystem::path& path, std::string_view text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

Bytes base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw FormatError("base64: length is not a multiple of 4");
  Bytes out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw FormatError("base64: invalid input");
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

namespace {

// libpng reports errors through longjmp; nothing with a destructor may live in
// the frames between setjmp and the libpng calls.
struct ReadCursor {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void read_cb(png_structp png, png_bytep out, png_size_t n) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + n > cur->size) png_error(png, "unexpected end of data");
  std::memcpy(out, cur->data + cur->pos, n);
  cur->pos += n;
}

void write_cb(png_structp png, png_bytep in, png_size_t n) {
  auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), in, in + n);
}

void flush_cb(png_structp) {}

struct ErrorSlot {
  char message[256] = "png error";
};

void error_cb(png_structp png, png_const_charp msg) {
  auto* slot = static_cast<ErrorSlot*>(png_get_error_ptr(png));
  std::snprintf(slot->message, sizeof(slot->message), "%s", msg);
  png_longjmp(png, 1);
}

void warning_cb(png_structp, png_const_charp) {}

struct ReadInfo {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
  int channels = 0;
  png_colorp palette = nullptr;
  int palette_size = 0;
};

// Returns false on a libpng error. `rows` is allocated by the caller once the
// header is known, via the `alloc` callback.
bool read_png_raw(png_structp png, png_infop info, ReadCursor* cur, ReadInfo* ri,
                  std::vector<png_bytep>* rows, Bytes* pixels) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_read_fn(png, cur, read_cb);
  png_read_info(png, info);
  png_get_IHDR(png, info, &ri->width, &ri->height, &ri->bit_depth, &ri->color_type, nullptr,
               nullptr, nullptr);
  if (ri->color_type == PNG_COLOR_TYPE_PALETTE) {
    png_get_PLTE(png, info, &ri->palette, &ri->palette_size);
    if (ri->bit_depth < 8) png_set_packing(png);
  } else if (ri->bit_depth != 8 && ri->bit_depth != 16) {
    return true;  // unsupported depth, reported by the caller
  }
  if (png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) png_set_interlace_handling(png);
  png_read_update_info(png, info);
  ri->channels = png_get_channels(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  pixels->resize(stride * ri->height);
  rows->resize(ri->height);
  for (png_uint_32 y = 0; y < ri->height; ++y) (*rows)[y] = pixels->data() + y * stride;
  png_read_image(png, rows->data());
  png_read_end(png, nullptr);
  return true;
}

bool write_png_raw(png_structp png, png_infop info, Bytes* out, const PngRaster* r,
                   int color_type, std::vector<png_color>* palette,
                   std::vector<png_bytep>* rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_write_fn(png, out, write_cb, flush_cb);
  png_set_IHDR(png, info, static_cast<png_uint_32>(r->width), static_cast<png_uint_32>(r->height),
               r->bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  if (color_type == PNG_COLOR_TYPE_PALETTE)
    png_set_PLTE(png, info, palette->data(), static_cast<int>(palette->size()));
  png_write_info(png, info);
  png_write_image(png, rows->data());
  png_write_end(png, nullptr);
  return true;
}

}  // namespace

PngRaster decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
    throw FormatError("png: not a PNG stream");
  ErrorSlot err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, error_cb, warning_cb);
  if (!png) throw std::runtime_error("png: out of memory");
  png_infop info = png_create_info_struct(png);
  ReadCursor cur{bytes.data(), bytes.size(), 0};
  ReadInfo ri;
  std::vector<png_bytep> rows;
  Bytes pixels;
  const bool ok = read_png_raw(png, info, &cur, &ri, &rows, &pixels);

  PngRaster out;
  if (ok && ri.channels > 0) {
    out.width = static_cast<int>(ri.width);
    out.height = static_cast<int>(ri.height);
    out.channels = ri.channels;
    out.paletted = ri.color_type == PNG_COLOR_TYPE_PALETTE;
    out.bit_depth = out.paletted ? 8 : ri.bit_depth;
    for (int i = 0; i < ri.palette_size; ++i)
      out.palette.push_back({ri.palette[i].red, ri.palette[i].green, ri.palette[i].blue});
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (!ok) throw FormatError(std::string("png: ") + err.message);
  if (out.channels == 0)
    throw FormatError("png: unsupported bit depth " + std::to_string(ri.bit_depth));

  const std::size_t count = static_cast<std::size_t>(out.width) * out.height * out.channels;
  out.samples.resize(count);
  if (out.bit_depth == 16) {
    for (std::size_t i = 0; i < count; ++i)
      out.samples[i] = static_cast<std::uint16_t>((pixels[2 * i] << 8) | pixels[2 * i + 1]);
  } else {
    std::copy(pixels.begin(), pixels.begin() + static_cast<std::ptrdiff_t>(count),
              out.samples.begin());
  }
  if (out.paletted)
    for (std::uint16_t v : out.samples)
      if (v >= out.palette.size()) throw FormatError("png: palette index out of range");
  return out;
}

Bytes encode_png(const PngRaster& r) {
  if (r.width <= 0 || r.height <= 0) throw std::invalid_argument("png: empty raster");
  if (r.bit_depth != 8 && r.bit_depth != 16) throw std::invalid_argument("png: bit depth");
  if (r.paletted && (r.channels != 1 || r.bit_depth != 8 || r.palette.empty() ||
                     r.palette.size() > 256))
    throw std::invalid_argument("png: bad palette raster");
  if (r.samples.size() != static_cast<std::size_t>(r.width) * r.height * r.channels)
    throw std::invalid_argument("png: sample count mismatch");
  int color_type = 0;
  switch (r.channels) {
    case 1: color_type = r.paletted ? PNG_COLOR_TYPE_PALETTE : PNG_COLOR_TYPE_GRAY; break;
    case 2: color_type = PNG_COLOR_TYPE_GRAY_ALPHA; break;
    case 3: color_type = PNG_COLOR_TYPE_RGB; break;
    case 4: color_type = PNG_COLOR_TYPE_RGBA; break;
    default: throw std::invalid_argument("png: channel count");
  }
  const std::size_t bps = r.bit_depth == 16 ? 2 : 1;
  const std::size_t stride = static_cast<std::size_t>(r.width) * r.channels * bps;
  Bytes pixels(stride * r.height);
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    if (bps == 2) {
      pixels[2 * i] = static_cast<std::uint8_t>(r.samples[i] >> 8);
      pixels[2 * i + 1] = static_cast<std::uint8_t>(r.samples[i] & 0xff);
    } else {
      if (r.samples[i] > 255) throw std::invalid_argument("png: 8-bit sample above 255");
      pixels[i] = static_cast<std::uint8_t>(r.samples[i]);
    }
  }
  std::vector<png_bytep> rows(r.height);
  for (int y = 0; y < r.height; ++y) rows[y] = pixels.data() + y * stride;
  std::vector<png_color> palette;
  for (const auto& c : r.palette) palette.push_back({c[0], c[1], c[2]});

  ErrorSlot err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, error_cb, warning_cb);
  if (!png) throw std::runtime_error("png: out of memory");
  png_infop info = png_create_info_struct(png);
  Bytes out;
  const bool ok = write_png_raw(png, info, &out, &r, color_type, &palette, &rows);
  png_destroy_write_struct(&png, &info);
  if (!ok) throw std::runtime_error(std::string("png: ") + err.message);
  return out;
}

double srgb_to_linear(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double v) {
  return v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

namespace {

// Raw values of pixel (x, y) as rgb in [0,1], before any transfer curve.
Rgb raw_rgb(const PngRaster& r, int x, int y) {
  if (r.paletted) {
    const auto& c = r.palette[r.at(x, y, 0)];
    return {c[0] / 255.0, c[1] / 255.0, c[2] / 255.0};
  }
  const double m = r.max_value();
  if (r.channels <= 2) {
    const double g = r.at(x, y, 0) / m;
    return {g, g, g};
  }
  return {r.at(x, y, 0) / m, r.at(x, y, 1) / m, r.at(x, y, 2) / m};
}

std::uint16_t to_code(double v, int max_value) {
  return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * max_value));
}

}  // namespace

Canvas import_image(std::span<const std::uint8_t> png) {
  const PngRaster r = decode_png(png);
  Canvas out(r.width, r.height);
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x) {
      const Rgb c = raw_rgb(r, x, y);
      out(x, y) = {srgb_to_linear(c.r), srgb_to_linear(c.g), srgb_to_linear(c.b)};
    }
  return out;
}

Bytes export_image(const Canvas& canvas, int bit_depth) {
  PngRaster r;
  r.width = canvas.width();
  r.height = canvas.height();
  r.channels = 3;
  r.bit_depth = bit_depth;
  r.samples.reserve(canvas.size() * 3);
  for (const Rgb& c : canvas.data())
    for (int ch = 0; ch < 3; ++ch)
      r.samples.push_back(to_code(linear_to_srgb(std::clamp(c[ch], 0.0, 1.0)), r.max_value()));
  return encode_png(r);
}

GrayImage import_gray(std::span<const std::uint8_t> png) {
  const PngRaster r = decode_png(png);
  GrayImage out(r.width, r.height);
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x)
      out(x, y) = (r.channels <= 2 && !r.paletted) ? r.at(x, y, 0) / double(r.max_value())
                                                   : luminance(raw_rgb(r, x, y));
  return out;
}

Bytes export_gray(const GrayImage& image, int bit_depth) {
  PngRaster r;
  r.width = image.width();
  r.height = image.height();
  r.channels = 1;
  r.bit_depth = bit_depth;
  for (double v : image.data()) r.samples.push_back(to_code(v, r.max_value()));
  return encode_png(r);
}

}  // namespace copaint
