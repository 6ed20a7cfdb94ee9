#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "glr/operators.hpp"
#include "glr/solvers.hpp"

namespace glr {

/// Element type codes of the GLRTENS1 format.
enum class Dtype : std::uint8_t { F32 = 1, F64 = 2, U8 = 3, C128 = 4 };

std::string to_string(Dtype d);
Dtype parse_dtype(const std::string& s);
std::size_t dtype_size(Dtype d);

/// Contents of a tensor file. 8-bit payloads are scaled to [0, 1] on load and
/// `source_peak` is 255; otherwise it is 1.
struct TensorFile {
    Measurement value;
    Dtype dtype = Dtype::F64;
    double source_peak = 1.0;
};

/// Layout: "GLRTENS1", u32 ndim, ndim x u32 dims, u8 dtype, row-major
/// channel-last payload, all little-endian. Real tensors are written with
/// ndim 3 (H, W, C); complex ones with ndim 2 (H, W). U8 stores
/// round(255 * clamp(v, 0, 1)).
void write_tensor(const std::filesystem::path& path, const Tensor3d& t, Dtype dtype = Dtype::F64);
void write_tensor(const std::filesystem::path& path, const ComplexTensor2& t);
void write_measurement(const std::filesystem::path& path, const Measurement& m);

/// Throws BadMagicError, TruncatedError or UnknownDtypeError.
TensorFile read_tensor_file(const std::filesystem::path& path);
/// Real tensor; ndim 1 or 2 files are read as H x 1 x 1 or H x W x 1.
Tensor3d read_tensor(const std::filesystem::path& path);
Measurement read_measurement(const std::filesystem::path& path);

/// 8-bit PNG preview of a 1- or 3-channel tensor, or of one channel of any
/// tensor, scaled so that `peak` maps to 255.
void write_png_preview(const std::filesystem::path& path, const Tensor3d& t, double peak = 1.0,
                       std::optional<int> channel = std::nullopt);

/// One CSV row per iteration. Timing columns are the *_ms ones.
void write_report_csv(const std::filesystem::path& path, const ReconReport& report);
/// One JSON object per iteration.
void write_trace_jsonl(const std::filesystem::path& path, const ReconReport& report);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace glr
