#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "pipeseg/image.hpp"

namespace pipeseg {

enum class ImageFormat { png, jpeg };

/// Decodes a PNG or JPEG file. Gray files come back with one channel; alpha is dropped.
/// Throws ImageIoError whose kind() separates unreadable files, unknown formats and corrupt streams.
ImageBuffer load_image(const std::filesystem::path& path);
ImageBuffer decode_image(std::span<const std::uint8_t> bytes);

/// quality only affects JPEG (1-100).
void save_image(const ImageBuffer& img, const std::filesystem::path& path,
                ImageFormat format = ImageFormat::png, int quality = 95);
std::vector<std::uint8_t> encode_image(const ImageBuffer& img, ImageFormat format, int quality = 95);

/// Sniffs the magic bytes. Anything but PNG or JPEG throws ImageIoError(unsupported_format).
ImageFormat detect_format(std::span<const std::uint8_t> bytes);

}  // namespace pipeseg
