#include "ucstereo/raster_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

namespace ucs {

std::size_t DisparityRaster::valid_count() const {
  return static_cast<std::size_t>(
      std::count_if(values().begin(), values().end(), [](float v) { return !std::isnan(v); }));
}

void validate_image(const RasterImage& image) {
  for (float v : image.data())
    require(std::isfinite(v) && v >= 0.0f && v <= 1.0f, "image intensities must lie in [0,1]");
}

void validate_disparity(const DisparityRaster& raster, double d_max) {
  for (float v : raster.data()) {
    if (std::isnan(v)) continue;
    require(v >= 0.0f && v < d_max, "disparity outside [0, d_max)");
  }
}

namespace {

std::string quoted(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) fail(ErrorKind::Io, "cannot open " + quoted(path));
  return f;
}

// ---------------------------------------------------------------------------
// PFM

float byteswap_float(float v) {
  auto bits = std::bit_cast<std::uint32_t>(v);
  bits = ((bits & 0x000000FFu) << 24) | ((bits & 0x0000FF00u) << 8) |
         ((bits & 0x00FF0000u) >> 8) | ((bits & 0xFF000000u) >> 24);
  return std::bit_cast<float>(bits);
}

}  // namespace

DisparityRaster read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + quoted(path));
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  // Header: three whitespace-separated fields after the magic, then exactly
  // one whitespace byte before the payload.
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  };
  auto token = [&] {
    skip_ws();
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };

  const std::string magic = token();
  if (magic == "PF") fail(ErrorKind::Format, "colour PFM (PF) is not supported: " + quoted(path));
  if (magic != "Pf") fail(ErrorKind::Format, "malformed PFM header in " + quoted(path));

  int width = 0, height = 0;
  double scale = 0.0;
  try {
    std::size_t used = 0;
    const std::string w = token(), h = token(), s = token();
    width = std::stoi(w, &used);
    if (used != w.size()) throw std::invalid_argument(w);
    height = std::stoi(h, &used);
    if (used != h.size()) throw std::invalid_argument(h);
    scale = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
  } catch (const std::logic_error&) {
    fail(ErrorKind::Format, "malformed PFM header in " + quoted(path));
  }
  if (width <= 0 || height <= 0 || scale == 0.0 || pos >= bytes.size() ||
      !std::isspace(static_cast<unsigned char>(bytes[pos])))
    fail(ErrorKind::Format, "malformed PFM header in " + quoted(path));
  ++pos;

  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (bytes.size() - pos != count * sizeof(float))
    fail(ErrorKind::Format, "payload mismatch in " + quoted(path));

  const bool file_little = scale < 0.0;
  const bool swap = file_little != (std::endian::native == std::endian::little);
  DisparityRaster out(width, height);
  for (int row = 0; row < height; ++row) {
    const int y = height - 1 - row;
    for (int x = 0; x < width; ++x) {
      float v;
      std::memcpy(&v, bytes.data() + pos + (static_cast<std::size_t>(row) * width + x) * 4, 4);
      if (swap) v = byteswap_float(v);
      out(x, y) = std::isinf(v) ? kInvalidDisparity : v;
    }
  }
  return out;
}

void write_pfm(const DisparityRaster& raster, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + quoted(path));
  const float scale = std::endian::native == std::endian::little ? -1.0f : 1.0f;
  out << "Pf\n" << raster.width() << ' ' << raster.height() << '\n' << scale << '\n';
  std::vector<float> row(raster.width());
  for (int y = raster.height() - 1; y >= 0; --y) {
    for (int x = 0; x < raster.width(); ++x) {
      const float v = raster(x, y);
      row[x] = std::isnan(v) ? std::numeric_limits<float>::infinity() : v;
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) fail(ErrorKind::Io, "write failed for " + quoted(path));
}

// ---------------------------------------------------------------------------
// PNG (classic libpng API; setjmp frames hold no objects with destructors)

namespace {

struct PngHeader {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
  int channels = 0;
  std::size_t rowbytes = 0;
};

bool png_read_header(png_structp png, png_infop info, std::FILE* fp, PngHeader* h) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_init_io(png, fp);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);
  h->width = png_get_image_width(png, info);
  h->height = png_get_image_height(png, info);
  h->bit_depth = png_get_bit_depth(png, info);
  h->color_type = color;
  h->channels = png_get_channels(png, info);
  h->rowbytes = png_get_rowbytes(png, info);
  return true;
}

bool png_read_rows(png_structp png, png_infop info, png_bytepp rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_read_image(png, rows);
  png_read_end(png, info);
  return true;
}

struct PngPixels {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  int source_color_type = 0;
  std::vector<std::uint16_t> samples;  // channels per pixel, row-major
};

PngPixels load_png(const std::filesystem::path& path) {
  FilePtr fp = open_file(path, "rb");
  unsigned char signature[8] = {};
  if (std::fread(signature, 1, 8, fp.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0)
    fail(ErrorKind::Format, "not a PNG file: " + quoted(path));

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(ErrorKind::Internal, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  auto cleanup = [&] { png_destroy_read_struct(&png, &info, nullptr); };

  PngHeader h;
  if (!info || !png_read_header(png, info, fp.get(), &h)) {
    cleanup();
    fail(ErrorKind::Format, "corrupt PNG header in " + quoted(path));
  }
  std::vector<png_byte> buffer(h.rowbytes * h.height);
  std::vector<png_bytep> rows(h.height);
  for (png_uint_32 y = 0; y < h.height; ++y) rows[y] = buffer.data() + y * h.rowbytes;
  if (!png_read_rows(png, info, rows.data())) {
    cleanup();
    fail(ErrorKind::Format, "corrupt PNG data in " + quoted(path));
  }
  cleanup();

  PngPixels out;
  out.width = static_cast<int>(h.width);
  out.height = static_cast<int>(h.height);
  out.channels = h.channels;
  out.bit_depth = h.bit_depth;
  out.source_color_type = h.color_type;
  const std::size_t count = static_cast<std::size_t>(out.width) * out.height * out.channels;
  out.samples.resize(count);
  for (int y = 0; y < out.height; ++y) {
    const png_byte* row = rows[y];
    const std::size_t n = static_cast<std::size_t>(out.width) * out.channels;
    for (std::size_t i = 0; i < n; ++i) {
      out.samples[y * n + i] =
          h.bit_depth == 16
              ? static_cast<std::uint16_t>((row[2 * i] << 8) | row[2 * i + 1])
              : static_cast<std::uint16_t>(row[i]);
    }
  }
  return out;
}

bool png_write_rows(png_structp png, png_infop info, std::FILE* fp, png_uint_32 width,
                    png_uint_32 height, png_bytepp rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_init_io(png, fp);
  png_set_IHDR(png, info, width, height, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  return true;
}

void save_png16(const Grid<std::uint16_t>& pixels, const std::filesystem::path& path) {
  FilePtr fp = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(ErrorKind::Internal, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);

  std::vector<png_byte> buffer(pixels.size() * 2);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    buffer[2 * i] = static_cast<png_byte>(pixels[i] >> 8);
    buffer[2 * i + 1] = static_cast<png_byte>(pixels[i] & 0xFF);
  }
  std::vector<png_bytep> rows(pixels.height());
  for (int y = 0; y < pixels.height(); ++y)
    rows[y] = buffer.data() + static_cast<std::size_t>(y) * pixels.width() * 2;

  const bool ok = info && png_write_rows(png, info, fp.get(), pixels.width(), pixels.height(),
                                         rows.data());
  png_destroy_write_struct(&png, &info);
  if (!ok) fail(ErrorKind::Io, "PNG write failed for " + quoted(path));
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

RasterImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + quoted(path));
  std::string magic;
  int width = 0, height = 0, maxval = 0;
  auto next_int = [&](int& v) {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
      in >> std::ws;
    }
    in >> v;
  };
  in >> magic;
  if (magic != "P5") fail(ErrorKind::Format, "only binary PGM (P5) is supported: " + quoted(path));
  next_int(width);
  next_int(height);
  next_int(maxval);
  if (!in || width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
    fail(ErrorKind::Format, "malformed PGM header in " + quoted(path));
  in.get();
  const int bytes_per = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(static_cast<std::size_t>(width) * height * bytes_per);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size() || in.peek() != EOF)
    fail(ErrorKind::Format, "payload mismatch in " + quoted(path));
  RasterImage out(width, height);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int v = bytes_per == 2 ? (raw[2 * i] << 8) | raw[2 * i + 1] : raw[i];
    out[i] = static_cast<float>(static_cast<double>(v) / maxval);
  }
  return out;
}

}  // namespace

std::uint16_t encode_kitti_disparity(float disparity) {
  if (std::isnan(disparity)) return 0;
  const double scaled = std::round(static_cast<double>(disparity) * 256.0);
  return static_cast<std::uint16_t>(std::clamp(scaled, 0.0, 65535.0));
}

float decode_kitti_disparity(std::uint16_t stored) {
  return stored == 0 ? kInvalidDisparity : static_cast<float>(stored / 256.0);
}

DisparityRaster read_kitti_png(const std::filesystem::path& path) {
  const PngPixels png = load_png(path);
  if (png.bit_depth != 16 || png.channels != 1 || png.source_color_type != PNG_COLOR_TYPE_GRAY)
    fail(ErrorKind::Format, "KITTI disparity PNG must be 16-bit greyscale: " + quoted(path));
  DisparityRaster out(png.width, png.height);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = decode_kitti_disparity(png.samples[i]);
  return out;
}

void write_kitti_png(const DisparityRaster& raster, const std::filesystem::path& path) {
  Grid<std::uint16_t> pixels(raster.width(), raster.height());
  for (std::size_t i = 0; i < raster.size(); ++i) pixels[i] = encode_kitti_disparity(raster[i]);
  save_png16(pixels, path);
}

DisparityRaster read_disparity(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".pfm") return read_pfm(path);
  if (ext == ".png") return read_kitti_png(path);
  fail(ErrorKind::InvalidArgument, "unsupported disparity format " + quoted(path));
}

void write_disparity(const DisparityRaster& raster, const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".pfm") return write_pfm(raster, path);
  if (ext == ".png") return write_kitti_png(raster, path);
  fail(ErrorKind::InvalidArgument, "unsupported disparity format " + quoted(path));
}

RasterImage read_image(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".pgm") return read_pgm(path);
  if (ext != ".png") fail(ErrorKind::InvalidArgument, "unsupported image format " + quoted(path));

  const PngPixels png = load_png(path);
  const double max_value = png.bit_depth == 16 ? 65535.0 : 255.0;
  // Grey(+alpha) uses channel 0; RGB(A) averages the three colour channels.
  const int colour_channels = png.channels >= 3 ? 3 : 1;
  RasterImage out(png.width, png.height);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double sum = 0.0;
    for (int c = 0; c < colour_channels; ++c) sum += png.samples[i * png.channels + c];
    out[i] = static_cast<float>(sum / (colour_channels * max_value));
  }
  return out;
}

void write_image_png16(const RasterImage& image, const std::filesystem::path& path) {
  Grid<std::uint16_t> pixels(image.width(), image.height());
  for (std::size_t i = 0; i < image.size(); ++i)
    pixels[i] = static_cast<std::uint16_t>(
        std::lround(std::clamp(static_cast<double>(image[i]), 0.0, 1.0) * 65535.0));
  save_png16(pixels, path);
}

}  // namespace ucs
