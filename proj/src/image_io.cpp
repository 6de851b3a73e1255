#include "sirf/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <png.h>
#include <tiffio.h>

namespace sirf {

namespace {

void put_u32le(std::vector<std::uint8_t>& buf, std::uint32_t v) {
  buf.push_back(v & 0xff);
  buf.push_back((v >> 8) & 0xff);
  buf.push_back((v >> 16) & 0xff);
  buf.push_back((v >> 24) & 0xff);
}

std::uint32_t get_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t get_u64le(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int k = 7; k >= 0; --k) v = (v << 8) | p[k];
  return v;
}

std::string lower_ext(const std::string& path) {
  auto pos = path.find_last_of('.');
  if (pos == std::string::npos) return "";
  std::string e = path.substr(pos + 1);
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  in.seekg(0, std::ios::end);
  std::streamoff len = in.tellg();
  in.seekg(0);
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(len));
  if (len > 0) in.read(reinterpret_cast<char*>(buf.data()), len);
  if (!in) throw std::runtime_error("failed to read " + path);
  return buf;
}

int quantize(double v, int peak) {
  double r = std::round(v);
  if (r < 0.0) return 0;
  if (r > peak) return peak;
  return static_cast<int>(r);
}

// ---- PNG ----

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

MultiBandImage load_png(const std::string& path) {
  PngReader rd;
  rd.fp = std::fopen(path.c_str(), "rb");
  if (!rd.fp) throw std::runtime_error("cannot open " + path);
  rd.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  rd.info = png_create_info_struct(rd.png);
  if (!rd.png || !rd.info) throw std::runtime_error("png: allocation failure");
  if (setjmp(png_jmpbuf(rd.png))) throw std::runtime_error("png: failed to decode " + path);
  png_init_io(rd.png, rd.fp);
  png_read_png(rd.png, rd.info,
               PNG_TRANSFORM_EXPAND | PNG_TRANSFORM_SWAP_ENDIAN | PNG_TRANSFORM_PACKING,
               nullptr);

  int m = png_get_image_height(rd.png, rd.info);
  int n = png_get_image_width(rd.png, rd.info);
  int channels = png_get_channels(rd.png, rd.info);
  int depth = png_get_bit_depth(rd.png, rd.info);
  if (channels < 1 || channels > 4)
    throw std::runtime_error("png: unsupported channel count " + std::to_string(channels));
  if (depth != 8 && depth != 16)
    throw std::runtime_error("png: unsupported bit depth " + std::to_string(depth));

  png_bytepp rows = png_get_rows(rd.png, rd.info);
  MultiBandImage img(m, n, channels);
  for (int i = 0; i < m; ++i) {
    const png_byte* row = rows[i];
    for (int j = 0; j < n; ++j) {
      for (int d = 0; d < channels; ++d) {
        double v;
        if (depth == 8) {
          v = row[j * channels + d];
        } else {
          const std::uint16_t* r16 = reinterpret_cast<const std::uint16_t*>(row);
          v = r16[j * channels + d];
        }
        img.at(i, j, d) = v;
      }
    }
  }
  return img;
}

void save_png(const MultiBandImage& img, const std::string& path, int bit_depth) {
  int channels = img.bands;
  if (channels > 3) channels = 3;  // RGB subset of multi-band data
  int color_type;
  switch (channels) {
    case 1: color_type = PNG_COLOR_TYPE_GRAY; break;
    case 2: color_type = PNG_COLOR_TYPE_GRAY_ALPHA; break;
    default: color_type = PNG_COLOR_TYPE_RGB; break;
  }
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw std::runtime_error("cannot open " + path + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info) {
    std::fclose(fp);
    throw std::runtime_error("png: allocation failure");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw std::runtime_error("png: failed to encode " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, img.cols, img.rows, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);

  const int peak = bit_depth == 8 ? 255 : 65535;
  std::vector<std::uint8_t> row8(static_cast<std::size_t>(img.cols) * channels);
  std::vector<std::uint16_t> row16(static_cast<std::size_t>(img.cols) * channels);
  for (int i = 0; i < img.rows; ++i) {
    for (int j = 0; j < img.cols; ++j)
      for (int d = 0; d < channels; ++d) {
        int q = quantize(img.at(i, j, d), peak);
        if (bit_depth == 8)
          row8[static_cast<std::size_t>(j) * channels + d] = static_cast<std::uint8_t>(q);
        else
          row16[static_cast<std::size_t>(j) * channels + d] = static_cast<std::uint16_t>(q);
      }
    png_write_row(png, bit_depth == 8 ? reinterpret_cast<png_bytep>(row8.data())
                                      : reinterpret_cast<png_bytep>(row16.data()));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

// ---- TIFF ----

thread_local std::string g_tiff_error;

void tiff_error_handler(const char*, const char* fmt, va_list ap) {
  char buf[512];
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  g_tiff_error = buf;
}

void tiff_warn_handler(const char*, const char*, va_list) {}

struct TiffGuard {
  TIFF* tif = nullptr;
  ~TiffGuard() {
    if (tif) TIFFClose(tif);
  }
};

MultiBandImage load_tiff(const std::string& path) {
  TIFFSetErrorHandler(tiff_error_handler);
  TIFFSetWarningHandler(tiff_warn_handler);
  TiffGuard tg;
  tg.tif = TIFFOpen(path.c_str(), "r");
  if (!tg.tif) throw std::runtime_error("tiff: cannot open " + path + ": " + g_tiff_error);
  TIFF* tif = tg.tif;

  std::uint32_t w = 0, h = 0;
  std::uint16_t spp = 1, bps = 8, planar = PLANARCONFIG_CONTIG, fmt = SAMPLEFORMAT_UINT;
  TIFFGetField(tif, TIFFTAG_IMAGEWIDTH, &w);
  TIFFGetField(tif, TIFFTAG_IMAGELENGTH, &h);
  TIFFGetFieldDefaulted(tif, TIFFTAG_SAMPLESPERPIXEL, &spp);
  TIFFGetFieldDefaulted(tif, TIFFTAG_BITSPERSAMPLE, &bps);
  TIFFGetFieldDefaulted(tif, TIFFTAG_PLANARCONFIG, &planar);
  TIFFGetFieldDefaulted(tif, TIFFTAG_SAMPLEFORMAT, &fmt);
  if (w == 0 || h == 0) throw std::runtime_error("tiff: empty image in " + path);
  if (spp < 1 || spp > 4)
    throw std::runtime_error("tiff: unsupported sample count " + std::to_string(spp));
  if (bps != 8 && bps != 16)
    throw std::runtime_error("tiff: unsupported bit depth " + std::to_string(bps));
  if (fmt != SAMPLEFORMAT_UINT)
    throw std::runtime_error("tiff: only unsigned integer samples are supported");

  MultiBandImage img(static_cast<int>(h), static_cast<int>(w), spp);
  std::vector<std::uint8_t> scan(TIFFScanlineSize(tif));
  if (planar == PLANARCONFIG_CONTIG) {
    for (std::uint32_t i = 0; i < h; ++i) {
      if (TIFFReadScanline(tif, scan.data(), i) < 0)
        throw std::runtime_error("tiff: read error in " + path + ": " + g_tiff_error);
      for (std::uint32_t j = 0; j < w; ++j)
        for (int d = 0; d < spp; ++d)
          img.at(i, j, d) =
              bps == 8 ? scan[j * spp + d]
                       : reinterpret_cast<const std::uint16_t*>(scan.data())[j * spp + d];
    }
  } else {
    for (int d = 0; d < spp; ++d)
      for (std::uint32_t i = 0; i < h; ++i) {
        if (TIFFReadScanline(tif, scan.data(), i, static_cast<std::uint16_t>(d)) < 0)
          throw std::runtime_error("tiff: read error in " + path + ": " + g_tiff_error);
        for (std::uint32_t j = 0; j < w; ++j)
          img.at(i, j, d) = bps == 8
                                ? scan[j]
                                : reinterpret_cast<const std::uint16_t*>(scan.data())[j];
      }
  }
  return img;
}

void save_tiff(const MultiBandImage& img, const std::string& path, int bit_depth) {
  if (img.bands > 4)
    throw std::invalid_argument("tiff: at most 4 bands supported, use MBF1 for " +
                                img.shape_string());
  TIFFSetErrorHandler(tiff_error_handler);
  TIFFSetWarningHandler(tiff_warn_handler);
  TiffGuard tg;
  tg.tif = TIFFOpen(path.c_str(), "w");
  if (!tg.tif) throw std::runtime_error("tiff: cannot open " + path + " for writing");
  TIFF* tif = tg.tif;

  const int spp = img.bands;
  TIFFSetField(tif, TIFFTAG_IMAGEWIDTH, static_cast<std::uint32_t>(img.cols));
  TIFFSetField(tif, TIFFTAG_IMAGELENGTH, static_cast<std::uint32_t>(img.rows));
  TIFFSetField(tif, TIFFTAG_SAMPLESPERPIXEL, static_cast<std::uint16_t>(spp));
  TIFFSetField(tif, TIFFTAG_BITSPERSAMPLE, static_cast<std::uint16_t>(bit_depth));
  TIFFSetField(tif, TIFFTAG_SAMPLEFORMAT, SAMPLEFORMAT_UINT);
  TIFFSetField(tif, TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
  TIFFSetField(tif, TIFFTAG_COMPRESSION, COMPRESSION_NONE);
  TIFFSetField(tif, TIFFTAG_PHOTOMETRIC,
               spp >= 3 ? PHOTOMETRIC_RGB : PHOTOMETRIC_MINISBLACK);
  TIFFSetField(tif, TIFFTAG_ROWSPERSTRIP, 1u);
  if (spp == 2 || spp == 4) {
    std::uint16_t extra = EXTRASAMPLE_UNSPECIFIED;
    TIFFSetField(tif, TIFFTAG_EXTRASAMPLES, 1, &extra);
  }

  const int peak = bit_depth == 8 ? 255 : 65535;
  std::vector<std::uint8_t> row8(static_cast<std::size_t>(img.cols) * spp);
  std::vector<std::uint16_t> row16(static_cast<std::size_t>(img.cols) * spp);
  for (int i = 0; i < img.rows; ++i) {
    for (int j = 0; j < img.cols; ++j)
      for (int d = 0; d < spp; ++d) {
        int q = quantize(img.at(i, j, d), peak);
        if (bit_depth == 8)
          row8[static_cast<std::size_t>(j) * spp + d] = static_cast<std::uint8_t>(q);
        else
          row16[static_cast<std::size_t>(j) * spp + d] = static_cast<std::uint16_t>(q);
      }
    void* buf = bit_depth == 8 ? static_cast<void*>(row8.data())
                               : static_cast<void*>(row16.data());
    if (TIFFWriteScanline(tif, buf, i) < 0)
      throw std::runtime_error("tiff: write error in " + path + ": " + g_tiff_error);
  }
}

}  // namespace

MultiBandImage load_mbf1(const std::string& path) {
  std::vector<std::uint8_t> buf = read_file(path);
  if (buf.size() < 16 || std::memcmp(buf.data(), "MBF1", 4) != 0)
    throw std::runtime_error("mbf1: bad magic in " + path);
  std::uint32_t m = get_u32le(buf.data() + 4);
  std::uint32_t n = get_u32le(buf.data() + 8);
  std::uint32_t s = get_u32le(buf.data() + 12);
  if (m < 1 || n < 1 || s < 1 || m > (1u << 20) || n > (1u << 20) || s > (1u << 16))
    throw std::runtime_error("mbf1: implausible dimensions in " + path);
  std::uint64_t count = static_cast<std::uint64_t>(m) * n * s;
  if (buf.size() != 16 + count * 8)
    throw std::runtime_error("mbf1: truncated payload in " + path + " (header says " +
                             std::to_string(count) + " values)");
  MultiBandImage img(static_cast<int>(m), static_cast<int>(n), static_cast<int>(s));
  for (std::uint64_t k = 0; k < count; ++k) {
    std::uint64_t bits = get_u64le(buf.data() + 16 + k * 8);
    double v;
    std::memcpy(&v, &bits, 8);
    if (!std::isfinite(v)) throw std::runtime_error("mbf1: non-finite value in " + path);
    img.data[k] = v;
  }
  return img;
}

void save_mbf1(const MultiBandImage& img, const std::string& path) {
  std::vector<std::uint8_t> buf;
  buf.reserve(16 + img.data.size() * 8);
  buf.insert(buf.end(), {'M', 'B', 'F', '1'});
  put_u32le(buf, static_cast<std::uint32_t>(img.rows));
  put_u32le(buf, static_cast<std::uint32_t>(img.cols));
  put_u32le(buf, static_cast<std::uint32_t>(img.bands));
  for (double v : img.data) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int k = 0; k < 8; ++k) buf.push_back((bits >> (8 * k)) & 0xff);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("failed to write " + path);
}

MultiBandImage load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::uint8_t magic[8] = {0};
  in.read(reinterpret_cast<char*>(magic), 8);
  in.close();

  static const std::uint8_t png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (std::memcmp(magic, png_sig, 8) == 0) return load_png(path);
  if ((magic[0] == 'I' && magic[1] == 'I' && magic[2] == 42) ||
      (magic[0] == 'M' && magic[1] == 'M' && magic[3] == 42))
    return load_tiff(path);
  if (std::memcmp(magic, "MBF1", 4) == 0) return load_mbf1(path);
  throw std::runtime_error("unrecognized image format in " + path);
}

void save_image(const MultiBandImage& img, const std::string& path, int bit_depth) {
  ensure_valid(img, "save_image");
  std::string ext = lower_ext(path);
  if (ext == "mbf1" || ext == "mbf") {
    save_mbf1(img, path);
    return;
  }
  if (bit_depth != 8 && bit_depth != 16)
    throw std::invalid_argument("save_image: bit depth must be 8 or 16");
  if (ext == "png") {
    save_png(img, path, bit_depth);
    return;
  }
  if (ext == "tif" || ext == "tiff") {
    save_tiff(img, path, bit_depth);
    return;
  }
  throw std::invalid_argument("save_image: unknown extension ." + ext +
                              " (use .mbf1, .png, .tif)");
}

}  // namespace sirf
