// Image, phase-map and metrics persistence.
//
// Formats: 8-bit grayscale/RGB PNG and binary PGM (P5) for images, the raw
// HOLOPHS1 container for full-precision phase masks, and CSV for metric
// histories. The phase container is the format of record; PNG previews are
// lossy by construction.
#pragma once

#include <png.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "holo/errors.hpp"
#include "holo/pipeline.hpp"
#include "holo/types.hpp"

namespace holo {

namespace detail {

struct RawImage {
    int height = 0;
    int width = 0;
    int channels = 0;  // 1 = gray, 3 = rgb
    std::vector<unsigned char> pixels;  // row-major, interleaved
};

inline RawImage read_png_file(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    if (fp == nullptr) throw IoError("cannot open image: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
    RawImage out;
    bool failed = false;
    std::string reason;

    if (png == nullptr || info == nullptr) {
        failed = true;
        reason = "libpng initialization failed";
    } else if (setjmp(png_jmpbuf(png))) {
        failed = true;
        reason = "corrupt or unsupported PNG";
    } else {
        png_init_io(png, fp);
        png_read_png(png, info,
                     PNG_TRANSFORM_EXPAND | PNG_TRANSFORM_STRIP_16 |
                         PNG_TRANSFORM_STRIP_ALPHA | PNG_TRANSFORM_PACKING,
                     nullptr);
        out.height = static_cast<int>(png_get_image_height(png, info));
        out.width = static_cast<int>(png_get_image_width(png, info));
        out.channels = static_cast<int>(png_get_channels(png, info));
        if ((out.channels == 1 || out.channels == 3) && out.height > 0 && out.width > 0) {
            png_bytepp rows = png_get_rows(png, info);
            const size_t row_bytes = static_cast<size_t>(out.width) * out.channels;
            out.pixels.resize(static_cast<size_t>(out.height) * row_bytes);
            for (int r = 0; r < out.height; ++r) {
                std::memcpy(out.pixels.data() + static_cast<size_t>(r) * row_bytes,
                            rows[r], row_bytes);
            }
        } else {
            failed = true;
            reason = "unsupported PNG layout (want 8-bit gray or RGB)";
        }
    }
    if (png != nullptr) png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    if (failed) throw IoError(reason + ": " + path);
    return out;
}

inline void write_png_gray8(const std::string& path, int height, int width,
                            const std::vector<unsigned char>& pixels) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (fp == nullptr) throw IoError("cannot open for writing: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
    std::vector<png_bytep> rows(static_cast<size_t>(height));
    for (int r = 0; r < height; ++r) {
        rows[static_cast<size_t>(r)] =
            const_cast<png_bytep>(pixels.data() + static_cast<size_t>(r) * width);
    }
    bool failed = false;
    if (png == nullptr || info == nullptr) {
        failed = true;
    } else if (setjmp(png_jmpbuf(png))) {
        failed = true;
    } else {
        png_init_io(png, fp);
        png_set_compression_level(png, 6);  // fixed level keeps output bytes stable
        png_set_IHDR(png, info, static_cast<png_uint_32>(width),
                     static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_GRAY,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                     PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        png_write_image(png, rows.data());
        png_write_end(png, nullptr);
    }
    if (png != nullptr) png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    if (failed) {
        std::remove(path.c_str());
        throw IoError("png write failed: " + path);
    }
}

// Binary PGM (P5), maxval up to 255. '#' comments are honored in the header.
inline RawImage read_pgm_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image: " + path);

    auto next_token = [&in, &path]() {
        std::string tok;
        int ch = in.get();
        while (ch != EOF) {
            if (ch == '#') {
                while (ch != EOF && ch != '\n') ch = in.get();
            } else if (std::isspace(ch)) {
                ch = in.get();
            } else {
                break;
            }
        }
        while (ch != EOF && !std::isspace(ch)) {
            tok.push_back(static_cast<char>(ch));
            ch = in.get();
        }
        if (tok.empty()) throw FormatError("truncated PGM header: " + path);
        return tok;
    };

    if (next_token() != "P5") throw FormatError("not a binary PGM (missing P5): " + path);
    RawImage out;
    out.channels = 1;
    try {
        out.width = std::stoi(next_token());
        out.height = std::stoi(next_token());
        const int maxval = std::stoi(next_token());
        if (maxval <= 0 || maxval > 255) {
            throw FormatError("unsupported PGM maxval (want <= 255): " + path);
        }
    } catch (const std::invalid_argument&) {
        throw FormatError("malformed PGM header: " + path);
    }
    if (out.width <= 0 || out.height <= 0) {
        throw InvalidInputError("zero-size PGM image: " + path);
    }
    const size_t count = static_cast<size_t>(out.height) * out.width;
    out.pixels.resize(count);
    in.read(reinterpret_cast<char*>(out.pixels.data()),
            static_cast<std::streamsize>(count));
    if (static_cast<size_t>(in.gcount()) != count) {
        throw FormatError("truncated PGM payload: " + path);
    }
    return out;
}

inline bool has_png_signature(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image: " + path);
    unsigned char sig[8] = {};
    in.read(reinterpret_cast<char*>(sig), 8);
    return in.gcount() >= 8 && png_sig_cmp(sig, 0, 8) == 0;
}

// Box-filter resampling with fractional pixel coverage; exact for constant
// images and deterministic for any size ratio.
inline AmplitudeImage resize_area_average(const AmplitudeImage& src, int out_h, int out_w) {
    if (src.height == out_h && src.width == out_w) return src;
    AmplitudeImage out(out_h, out_w);
    const double sy = static_cast<double>(src.height) / out_h;
    const double sx = static_cast<double>(src.width) / out_w;
    for (int i = 0; i < out_h; ++i) {
        const double y0 = i * sy, y1 = (i + 1) * sy;
        for (int j = 0; j < out_w; ++j) {
            const double x0 = j * sx, x1 = (j + 1) * sx;
            double acc = 0.0;
            for (int r = static_cast<int>(y0); r < src.height && r < y1; ++r) {
                const double wy = std::min<double>(r + 1, y1) - std::max<double>(r, y0);
                if (wy <= 0.0) continue;
                for (int c = static_cast<int>(x0); c < src.width && c < x1; ++c) {
                    const double wx = std::min<double>(c + 1, x1) - std::max<double>(c, x0);
                    if (wx <= 0.0) continue;
                    acc += wy * wx * src.at(r, c);
                }
            }
            out.at(i, j) = acc / ((y1 - y0) * (x1 - x0));
        }
    }
    return out;
}

inline void append_u32_le(std::vector<unsigned char>& buf, uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

inline void append_f64_le(std::vector<unsigned char>& buf, double v) {
    const uint64_t bits = std::bit_cast<uint64_t>(v);
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xff));
}

inline uint32_t read_u32_le(const unsigned char* p) {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[i]) << (8 * i);
    return v;
}

inline double read_f64_le(const unsigned char* p) {
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(p[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

inline std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace detail

inline constexpr char kPhaseMagic[9] = "HOLOPHS1";  // 8 payload bytes

/// Loads an 8-bit grayscale or RGB image (PNG or binary PGM), converts RGB to
/// luma (0.299 R + 0.587 G + 0.114 B), resizes to the requested dimensions by
/// area averaging and scales into [0, 1].
inline AmplitudeImage load_target(const std::string& path, int out_height, int out_width) {
    if (out_height < 1 || out_width < 1) {
        throw InvalidInputError("load_target: output dimensions must be positive");
    }
    const detail::RawImage raw =
        detail::has_png_signature(path) ? detail::read_png_file(path) : detail::read_pgm_file(path);
    if (raw.height < 1 || raw.width < 1) {
        throw InvalidInputError("load_target: zero-size image: " + path);
    }

    AmplitudeImage gray(raw.height, raw.width);
    const size_t n = gray.size();
    if (raw.channels == 1) {
        for (size_t i = 0; i < n; ++i) gray.values[i] = raw.pixels[i] / 255.0;
    } else {
        for (size_t i = 0; i < n; ++i) {
            const unsigned char* px = raw.pixels.data() + 3 * i;
            gray.values[i] = (0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]) / 255.0;
        }
    }
    return detail::resize_area_average(gray, out_height, out_width);
}

/// Writes a phase mask in the HOLOPHS1 container (bit-exact round trip).
inline void save_phase(const PhaseMask& phase, const std::string& path) {
    for (double v : phase.values) {
        if (!std::isfinite(v)) throw InvalidInputError("save_phase: non-finite phase value");
    }
    std::vector<unsigned char> buf;
    buf.reserve(16 + 8 * phase.size());
    buf.insert(buf.end(), kPhaseMagic, kPhaseMagic + 8);
    detail::append_u32_le(buf, static_cast<uint32_t>(phase.height));
    detail::append_u32_le(buf, static_cast<uint32_t>(phase.width));
    for (double v : phase.values) detail::append_f64_le(buf, v);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("write failed: " + path);
}

/// Reads a HOLOPHS1 phase mask; format errors name the offending byte offset.
inline PhaseMask load_phase(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open phase file: " + path);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());

    if (buf.size() < 8 || std::memcmp(buf.data(), kPhaseMagic, 8) != 0) {
        throw FormatError("bad magic at offset 0 (want HOLOPHS1): " + path);
    }
    if (buf.size() < 16) {
        throw FormatError("truncated header at offset " + std::to_string(buf.size()) +
                          ": " + path);
    }
    const uint32_t height = detail::read_u32_le(buf.data() + 8);
    const uint32_t width = detail::read_u32_le(buf.data() + 12);
    if (height < 1 || width < 1) {
        throw FormatError("zero dimension in header at offset 8: " + path);
    }
    const size_t expected = 16 + 8 * static_cast<size_t>(height) * width;
    if (buf.size() != expected) {
        throw FormatError("truncated payload at offset " + std::to_string(buf.size()) +
                          " (want " + std::to_string(expected) + " bytes): " + path);
    }

    PhaseMask mask(static_cast<int>(height), static_cast<int>(width));
    for (size_t i = 0; i < mask.size(); ++i) {
        mask.values[i] = detail::read_f64_le(buf.data() + 16 + 8 * i);
        if (!std::isfinite(mask.values[i])) {
            throw FormatError("non-finite value at offset " + std::to_string(16 + 8 * i) +
                              ": " + path);
        }
    }
    return mask;
}

/// 8-bit preview of a phase mask: [0, 2pi) -> [0, 255] via floor(p / 2pi * 256).
inline void save_phase_preview(const PhaseMask& phase, const std::string& path) {
    std::vector<unsigned char> pixels(phase.size());
    for (size_t i = 0; i < phase.size(); ++i) {
        const double v = phase.values[i];
        if (!std::isfinite(v)) throw InvalidInputError("save_phase_preview: non-finite phase");
        const double level = std::floor(v / kTwoPi * 256.0);
        pixels[i] = static_cast<unsigned char>(std::clamp(level, 0.0, 255.0));
    }
    detail::write_png_gray8(path, phase.height, phase.width, pixels);
}

/// Saves an amplitude image as 8-bit grayscale PNG, rescaled to peak 1.
/// An all-zero image is written as all black.
inline void save_image(const AmplitudeImage& image, const std::string& path) {
    double peak = 0.0;
    for (double v : image.values) peak = std::max(peak, v);
    std::vector<unsigned char> pixels(image.size());
    if (peak > 0.0) {
        for (size_t i = 0; i < image.size(); ++i) {
            const long level = std::lround(image.values[i] / peak * 255.0);
            pixels[i] = static_cast<unsigned char>(std::clamp(level, 0L, 255L));
        }
    }
    detail::write_png_gray8(path, image.height, image.width, pixels);
}

/// Writes labeled columns as CSV: header `iteration,<labels...>`, one row per
/// index, values at 9 significant digits, UTF-8 with LF line endings.
inline void write_csv_columns(const std::string& path,
                              const std::vector<std::string>& labels,
                              const std::vector<std::vector<double>>& columns) {
    if (labels.size() != columns.size()) {
        throw ShapeError("write_csv_columns: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(columns.size()) + " columns");
    }
    for (const std::string& label : labels) {
        if (label.find(',') != std::string::npos) {
            throw InvalidInputError("write_csv_columns: label contains a comma: " + label);
        }
    }
    size_t rows = columns.empty() ? 0 : columns[0].size();
    for (const auto& col : columns) {
        if (col.size() != rows) {
            throw ShapeError("write_csv_columns: column length mismatch");
        }
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "iteration";
    for (const std::string& label : labels) out << ',' << label;
    out << '\n';
    for (size_t r = 0; r < rows; ++r) {
        out << r;
        for (const auto& col : columns) out << ',' << detail::format_g9(col[r]);
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

/// Writes the MSE history of each run as one labeled CSV column.
inline void write_loss_csv(const std::string& path,
                           const std::vector<std::string>& labels,
                           const std::vector<const RunRecord*>& records) {
    if (labels.size() != records.size()) {
        throw ShapeError("write_loss_csv: label/record count mismatch");
    }
    std::vector<std::vector<double>> columns;
    columns.reserve(records.size());
    for (const RunRecord* rec : records) columns.push_back(rec->mse_history);
    write_csv_columns(path, labels, columns);
}

}  // namespace holo
