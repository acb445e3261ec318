#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bioreg/core.hpp"

namespace bioreg::cli {

// On-disk layout:
//
//   magic: BIOREG1
//   kind: image | field | mask
//   width: <n>
//   height: <n>
//   channels: <n>
//   spacing_x_mm: <real>
//   spacing_y_mm: <real>
//   dtype: f32 | u8
//   byte_order: little
//   labels: a,b,...        (masks only, one label per channel)
//   <empty line>
//   <payload: row-major, channel-interleaved, little-endian>
//
// Images and fields are f32, masks are u8.

enum class RasterKind { Image, Field, Mask };
enum class DType { F32, U8 };

std::string_view to_string(RasterKind kind) noexcept;
std::string_view to_string(DType dtype) noexcept;

struct RasterFile {
    RasterKind kind = RasterKind::Image;
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 1;
    Spacing spacing{};
    DType dtype = DType::F32;
    std::vector<std::string> labels;  // mask channel names
    std::vector<float> f32;           // payload when dtype == F32
    std::vector<std::uint8_t> u8;     // payload when dtype == U8

    std::size_t element_count() const noexcept { return width * height * channels; }

    friend bool operator==(const RasterFile&, const RasterFile&) = default;
};

/// Throws ParseError when the header is inconsistent with the payload or
/// violates the kind/dtype/channel rules.
void validate_raster(const RasterFile& r);

std::string serialize(const RasterFile& r);
/// Throws ParseError.
RasterFile parse_raster(std::string_view bytes);

/// Writes to a temporary file next to `path`, then renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
/// Throws ParseError when the file cannot be read.
std::string read_file(const std::filesystem::path& path);

void write_raster(const std::filesystem::path& path, const RasterFile& r);
RasterFile read_raster(const std::filesystem::path& path);

// Conversions between in-memory types and rasters. Doubles are narrowed to
// f32 on the way out.
RasterFile to_raster(const ScalarImage2D& img);
RasterFile to_raster(const DisplacementField2D& u);
RasterFile to_raster(const SegMaskSet& masks);

/// Each converter throws ParseError when the raster has the wrong kind.
ScalarImage2D image_from_raster(const RasterFile& r);
DisplacementField2D field_from_raster(const RasterFile& r);
SegMaskSet masks_from_raster(const RasterFile& r);

}  // namespace bioreg::cli
