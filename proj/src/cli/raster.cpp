#include "bioreg/cli/raster.hpp"

#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace bioreg::cli {

namespace {

constexpr std::string_view kMagic = "BIOREG1";

[[noreturn]] void parse_fail(const std::string& m) { fail(ErrorKind::ParseError, m); }

std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_real(std::string_view s, const char* field) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        parse_fail(std::string("bad number for ") + field + ": '" + std::string(s) + "'");
    return v;
}

std::size_t parse_count(std::string_view s, const char* field) {
    std::size_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        parse_fail(std::string("bad integer for ") + field + ": '" + std::string(s) + "'");
    return v;
}

std::size_t expected_channels(const RasterFile& r) {
    switch (r.kind) {
        case RasterKind::Image: return 1;
        case RasterKind::Field: return 2;
        case RasterKind::Mask: return r.labels.size();
    }
    return 0;
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

Grid grid_of(const RasterFile& r) { return Grid{{r.width, r.height}, r.spacing}; }

void require_kind(const RasterFile& r, RasterKind k) {
    if (r.kind != k)
        parse_fail("expected a " + std::string(to_string(k)) + " raster, got " + std::string(to_string(r.kind)));
}

}  // namespace

std::string_view to_string(RasterKind kind) noexcept {
    switch (kind) {
        case RasterKind::Image: return "image";
        case RasterKind::Field: return "field";
        case RasterKind::Mask: return "mask";
    }
    return "?";
}

std::string_view to_string(DType dtype) noexcept { return dtype == DType::F32 ? "f32" : "u8"; }

void validate_raster(const RasterFile& r) {
    if (r.width < 2 || r.height < 2) parse_fail("raster must be at least 2x2");
    if (!(r.spacing.sx > 0.0) || !(r.spacing.sy > 0.0) || !std::isfinite(r.spacing.sx) ||
        !std::isfinite(r.spacing.sy))
        parse_fail("raster spacing must be positive and finite");
    if (r.channels < 1) parse_fail("raster needs at least one channel");
    if (r.kind == RasterKind::Mask) {
        if (r.dtype != DType::U8) parse_fail("mask rasters must be u8");
        if (r.labels.empty()) parse_fail("mask raster without labels");
        for (const auto& l : r.labels) {
            if (l.empty() || l.find_first_of(",\n\r") != std::string::npos)
                parse_fail("mask labels must be non-empty and free of commas and newlines");
        }
        for (std::size_t a = 0; a < r.labels.size(); ++a)
            for (std::size_t b = a + 1; b < r.labels.size(); ++b)
                if (r.labels[a] == r.labels[b]) parse_fail("duplicate mask label '" + r.labels[a] + "'");
    } else {
        if (r.dtype != DType::F32) parse_fail(std::string(to_string(r.kind)) + " rasters must be f32");
        if (!r.labels.empty()) parse_fail("labels are only allowed on mask rasters");
    }
    if (r.channels != expected_channels(r))
        parse_fail("channel count " + std::to_string(r.channels) + " does not match kind " +
                   std::string(to_string(r.kind)));
    const std::size_t n = r.element_count();
    if (r.dtype == DType::F32 && (r.f32.size() != n || !r.u8.empty()))
        parse_fail("f32 payload has the wrong length");
    if (r.dtype == DType::U8 && (r.u8.size() != n || !r.f32.empty())) parse_fail("u8 payload has the wrong length");
    if (r.kind == RasterKind::Mask)
        for (auto v : r.u8)
            if (v > 1) parse_fail("mask entries must be 0 or 1");
}

std::string serialize(const RasterFile& r) {
    validate_raster(r);
    std::string out;
    out += "magic: " + std::string(kMagic) + "\n";
    out += "kind: " + std::string(to_string(r.kind)) + "\n";
    out += "width: " + std::to_string(r.width) + "\n";
    out += "height: " + std::to_string(r.height) + "\n";
    out += "channels: " + std::to_string(r.channels) + "\n";
    out += "spacing_x_mm: " + format_real(r.spacing.sx) + "\n";
    out += "spacing_y_mm: " + format_real(r.spacing.sy) + "\n";
    out += "dtype: " + std::string(to_string(r.dtype)) + "\n";
    out += "byte_order: little\n";
    if (!r.labels.empty()) {
        out += "labels: ";
        for (std::size_t k = 0; k < r.labels.size(); ++k) out += (k ? "," : "") + r.labels[k];
        out += "\n";
    }
    out += "\n";
    if (r.dtype == DType::F32) {
        out.reserve(out.size() + 4 * r.f32.size());
        for (float v : r.f32) put_u32(out, std::bit_cast<std::uint32_t>(v));
    } else {
        out.append(reinterpret_cast<const char*>(r.u8.data()), r.u8.size());
    }
    return out;
}

RasterFile parse_raster(std::string_view bytes) {
    const auto end = bytes.find("\n\n");
    if (end == std::string_view::npos) parse_fail("header is not terminated by an empty line");
    std::string_view header = bytes.substr(0, end + 1);
    const std::string_view payload = bytes.substr(end + 2);

    std::map<std::string, std::string, std::less<>> fields;
    while (!header.empty()) {
        const auto nl = header.find('\n');
        const std::string_view line = header.substr(0, nl);
        header.remove_prefix(nl + 1);
        const auto colon = line.find(": ");
        if (colon == std::string_view::npos) parse_fail("malformed header line '" + std::string(line) + "'");
        std::string key(line.substr(0, colon));
        if (!fields.emplace(key, std::string(line.substr(colon + 2))).second)
            parse_fail("duplicate header field '" + key + "'");
    }

    auto take = [&](const char* key) -> std::string {
        const auto it = fields.find(key);
        if (it == fields.end()) parse_fail(std::string("missing header field '") + key + "'");
        std::string v = it->second;
        fields.erase(it);
        return v;
    };

    if (take("magic") != kMagic) parse_fail("bad magic");
    RasterFile r;
    const std::string kind = take("kind");
    if (kind == "image") r.kind = RasterKind::Image;
    else if (kind == "field") r.kind = RasterKind::Field;
    else if (kind == "mask") r.kind = RasterKind::Mask;
    else parse_fail("unknown kind '" + kind + "'");
    r.width = parse_count(take("width"), "width");
    r.height = parse_count(take("height"), "height");
    r.channels = parse_count(take("channels"), "channels");
    r.spacing.sx = parse_real(take("spacing_x_mm"), "spacing_x_mm");
    r.spacing.sy = parse_real(take("spacing_y_mm"), "spacing_y_mm");
    const std::string dtype = take("dtype");
    if (dtype == "f32") r.dtype = DType::F32;
    else if (dtype == "u8") r.dtype = DType::U8;
    else parse_fail("unknown dtype '" + dtype + "'");
    if (take("byte_order") != "little") parse_fail("only little-endian payloads are supported");
    if (fields.contains("labels")) {
        std::stringstream ss(take("labels"));
        for (std::string l; std::getline(ss, l, ',');) r.labels.push_back(l);
    }
    if (!fields.empty()) parse_fail("unknown header field '" + fields.begin()->first + "'");

    if (r.width == 0 || r.height == 0 || r.channels == 0) parse_fail("zero raster dimension");
    const std::size_t n = r.element_count();
    const std::size_t elem = r.dtype == DType::F32 ? 4 : 1;
    if (n / r.channels / r.height != r.width || payload.size() / elem != n || payload.size() % elem != 0)
        parse_fail("payload is " + std::to_string(payload.size()) + " bytes, expected " + std::to_string(n * elem));

    const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
    if (r.dtype == DType::F32) {
        r.f32.resize(n);
        for (std::size_t k = 0; k < n; ++k) r.f32[k] = std::bit_cast<float>(get_u32(p + 4 * k));
    } else {
        r.u8.assign(p, p + n);
    }
    validate_raster(r);
    return r;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    static std::atomic<unsigned long> counter{0};
    const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(tid) + "." + std::to_string(counter++);
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) parse_fail("cannot open '" + tmp.string() + "' for writing");
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        f.flush();
        if (!f) parse_fail("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        parse_fail("cannot move output into place at '" + path.string() + "'");
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) parse_fail("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_raster(const std::filesystem::path& path, const RasterFile& r) { write_file_atomic(path, serialize(r)); }

RasterFile read_raster(const std::filesystem::path& path) {
    try {
        return parse_raster(read_file(path));
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::ParseError) throw;
        parse_fail(path.string() + ": " + e.what());
    }
}

RasterFile to_raster(const ScalarImage2D& img) {
    RasterFile r;
    r.kind = RasterKind::Image;
    r.width = img.width();
    r.height = img.height();
    r.spacing = img.spacing();
    r.f32.assign(img.data().begin(), img.data().end());
    return r;
}

RasterFile to_raster(const DisplacementField2D& u) {
    RasterFile r;
    r.kind = RasterKind::Field;
    r.width = u.width();
    r.height = u.height();
    r.channels = 2;
    r.spacing = u.spacing();
    r.f32.resize(2 * u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
        r.f32[2 * k] = static_cast<float>(u.u1()[k]);
        r.f32[2 * k + 1] = static_cast<float>(u.u2()[k]);
    }
    return r;
}

RasterFile to_raster(const SegMaskSet& masks) {
    RasterFile r;
    r.kind = RasterKind::Mask;
    r.dtype = DType::U8;
    r.width = masks.grid().width();
    r.height = masks.grid().height();
    r.spacing = masks.grid().spacing;
    r.channels = masks.size();
    r.labels = masks.labels();
    r.u8.resize(r.element_count());
    for (std::size_t c = 0; c < masks.size(); ++c) {
        const auto d = masks[c].mask.data();
        for (std::size_t k = 0; k < d.size(); ++k) r.u8[k * r.channels + c] = d[k];
    }
    return r;
}

ScalarImage2D image_from_raster(const RasterFile& r) {
    require_kind(r, RasterKind::Image);
    for (float v : r.f32)
        if (!std::isfinite(v)) parse_fail("image raster has non-finite values");
    return ScalarImage2D(grid_of(r), std::vector<double>(r.f32.begin(), r.f32.end()));
}

DisplacementField2D field_from_raster(const RasterFile& r) {
    require_kind(r, RasterKind::Field);
    const std::size_t n = r.width * r.height;
    std::vector<double> u1(n), u2(n);
    for (std::size_t k = 0; k < n; ++k) {
        u1[k] = r.f32[2 * k];
        u2[k] = r.f32[2 * k + 1];
        if (!std::isfinite(u1[k]) || !std::isfinite(u2[k])) parse_fail("field raster has non-finite values");
    }
    return DisplacementField2D(grid_of(r), std::move(u1), std::move(u2));
}

SegMaskSet masks_from_raster(const RasterFile& r) {
    require_kind(r, RasterKind::Mask);
    const Grid g = grid_of(r);
    const std::size_t n = r.width * r.height;
    std::vector<LabeledMask> s;
    for (std::size_t c = 0; c < r.channels; ++c) {
        std::vector<std::uint8_t> bits(n);
        for (std::size_t k = 0; k < n; ++k) bits[k] = r.u8[k * r.channels + c];
        s.push_back({r.labels[c], BinaryMask(g, std::move(bits))});
    }
    return SegMaskSet(g, std::move(s));
}

}  // namespace bioreg::cli
