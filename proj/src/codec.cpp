#include "pipeseg/codec.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

// jpeglib.h needs size_t/FILE declared first.
#include <jpeglib.h>

#include "pipeseg/errors.hpp"

namespace pipeseg {

namespace {

using Kind = ImageIoError::Kind;

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError(Kind::unreadable, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw ImageIoError(Kind::unreadable, "read error on " + path.string());
  return bytes;
}

ImageBuffer decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    std::string msg = image.message;
    png_image_free(&image);
    throw ImageIoError(Kind::corrupt_stream, "PNG: " + msg);
  }
  const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  const int channels = gray ? 1 : 3;
  if (image.width == 0 || image.height == 0) {
    png_image_free(&image);
    throw ImageIoError(Kind::corrupt_stream, "PNG: zero-sized image");
  }
  std::vector<std::uint8_t> samples(PNG_IMAGE_SIZE(image));
  // A null background composes alpha onto black; the palette/16-bit cases are converted by libpng.
  if (!png_image_finish_read(&image, nullptr, samples.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw ImageIoError(Kind::corrupt_stream, "PNG: " + msg);
  }
  return ImageBuffer(static_cast<int>(image.width), static_cast<int>(image.height), channels,
                     std::move(samples));
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& img) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = img.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, img.samples().data(), 0, nullptr)) {
    throw ImageIoError(Kind::unwritable, std::string("PNG encode: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, img.samples().data(), 0, nullptr)) {
    throw ImageIoError(Kind::unwritable, std::string("PNG encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

// libjpeg reports fatal errors through error_exit; jump back out instead of calling exit().
struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_silence(j_common_ptr, int) {}

ImageBuffer decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo;
  JpegError err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_exit;
  err.mgr.emit_message = jpeg_silence;
  err.message[0] = '\0';

  // Nothing with a destructor may live between setjmp and the last libjpeg call.
  std::uint8_t* volatile pixels = nullptr;
  int width = 0, height = 0, channels = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    std::free(pixels);
    throw ImageIoError(Kind::corrupt_stream, std::string("JPEG: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  channels = cinfo.output_components;
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  pixels = static_cast<std::uint8_t*>(std::malloc(stride * height));
  if (pixels == nullptr) {
    jpeg_destroy_decompress(&cinfo);
    throw ImageIoError(Kind::corrupt_stream, "JPEG: out of memory");
  }
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = static_cast<std::uint8_t*>(pixels) + stride * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  // Truncated streams are padded by libjpeg with a warning; treat them as corrupt.
  const bool truncated = err.mgr.num_warnings > 0;
  jpeg_destroy_decompress(&cinfo);

  std::uint8_t* data = pixels;
  std::vector<std::uint8_t> samples(data, data + stride * height);
  std::free(data);
  if (truncated) throw ImageIoError(Kind::corrupt_stream, "JPEG: truncated or damaged stream");
  if (channels != 1 && channels != 3) {
    throw ImageIoError(Kind::unsupported_format, "JPEG: unsupported component count");
  }
  return ImageBuffer(width, height, channels, std::move(samples));
}

std::vector<std::uint8_t> encode_jpeg(const ImageBuffer& img, int quality) {
  jpeg_compress_struct cinfo;
  JpegError err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_exit;
  err.mgr.emit_message = jpeg_silence;
  err.message[0] = '\0';

  // Address-taken, so libjpeg's writes stay visible after a longjmp.
  unsigned char* dest = nullptr;
  unsigned long size = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(dest);
    throw ImageIoError(Kind::unwritable, std::string("JPEG encode: ") + err.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &dest, &size);
  cinfo.image_width = static_cast<JDIMENSION>(img.width());
  cinfo.image_height = static_cast<JDIMENSION>(img.height());
  cinfo.input_components = img.channels();
  cinfo.in_color_space = img.channels() == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  const std::size_t stride = static_cast<std::size_t>(img.width()) * img.channels();
  auto* base = const_cast<std::uint8_t*>(img.samples().data());
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = base + stride * cinfo.next_scanline;
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);

  std::vector<std::uint8_t> out(dest, dest + size);
  std::free(dest);
  return out;
}

}  // namespace

ImageFormat detect_format(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t png_magic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), png_magic, 8) == 0) return ImageFormat::png;
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) {
    return ImageFormat::jpeg;
  }
  throw ImageIoError(Kind::unsupported_format, "not a PNG or JPEG stream");
}

ImageBuffer decode_image(std::span<const std::uint8_t> bytes) {
  return detect_format(bytes) == ImageFormat::png ? decode_png(bytes) : decode_jpeg(bytes);
}

ImageBuffer load_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_image(bytes);
  } catch (const ImageIoError& e) {
    throw ImageIoError(e.kind(), path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_image(const ImageBuffer& img, ImageFormat format, int quality) {
  if (img.empty()) throw std::invalid_argument("cannot encode an empty buffer");
  if (format == ImageFormat::png) return encode_png(img);
  if (quality < 1 || quality > 100) throw std::invalid_argument("JPEG quality must be in 1..100");
  return encode_jpeg(img, quality);
}

void save_image(const ImageBuffer& img, const std::filesystem::path& path, ImageFormat format,
                int quality) {
  const auto bytes = encode_image(img, format, quality);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ImageIoError(Kind::unwritable, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ImageIoError(Kind::unwritable, "write error on " + path.string());
}

}  // namespace pipeseg
