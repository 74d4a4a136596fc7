// Copyright 2026 The apiprompt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "apiprompt/containers.hpp"

namespace apiprompt {

/// Reads any 8/16-bit PNG and converts it to 8-bit RGB (alpha dropped,
/// gray expanded).
RgbImage read_png(const std::filesystem::path& path);

/// Writes an 8-bit RGB PNG. Output bytes are a pure function of the pixels:
/// no timestamp or text chunks, filter NONE and stored (level 0) deflate
/// blocks, so files compare bytewise across zlib versions.
void write_png(const RgbImage& image, const std::filesystem::path& path);

/// Writes a mask as 8-bit grayscale, 255 for set pixels and 0 otherwise.
void write_mask_png(const BinaryMask& mask, const std::filesystem::path& path);

/// Reads a grayscale or RGB PNG as a mask: a pixel is set when its first
/// channel is >= 128.
BinaryMask read_mask_png(const std::filesystem::path& path);

}  // namespace apiprompt
