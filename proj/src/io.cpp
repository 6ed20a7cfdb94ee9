#include "glr/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace glr {

namespace {

constexpr char kMagic[8] = {'G', 'L', 'R', 'T', 'E', 'N', 'S', '1'};

template <typename T>
void put_le(std::string& out, T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    out.append(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T get_le(const unsigned char* p) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

std::string header(const std::vector<std::uint32_t>& dims, Dtype dtype) {
    std::string out(kMagic, 8);
    put_le<std::uint32_t>(out, std::uint32_t(dims.size()));
    for (auto d : dims) put_le<std::uint32_t>(out, d);
    out.push_back(char(dtype));
    return out;
}

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f.write(bytes.data(), std::streamsize(bytes.size()));
    if (!f) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_bytes(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace

std::string to_string(Dtype d) {
    switch (d) {
    case Dtype::F32: return "f32";
    case Dtype::F64: return "f64";
    case Dtype::U8: return "u8";
    case Dtype::C128: return "c128";
    }
    return "?";
}

Dtype parse_dtype(const std::string& s) {
    if (s == "f32") return Dtype::F32;
    if (s == "f64") return Dtype::F64;
    if (s == "u8") return Dtype::U8;
    if (s == "c128") return Dtype::C128;
    throw ConfigError("unknown dtype '" + s + "' (f32, f64, u8, c128)");
}

std::size_t dtype_size(Dtype d) {
    switch (d) {
    case Dtype::F32: return 4;
    case Dtype::F64: return 8;
    case Dtype::U8: return 1;
    case Dtype::C128: return 16;
    }
    return 0;
}

void write_tensor(const std::filesystem::path& path, const Tensor3d& t, Dtype dtype) {
    if (dtype == Dtype::C128) throw ConfigError("a real tensor cannot be written as c128");
    std::string out = header({std::uint32_t(t.height()), std::uint32_t(t.width()), std::uint32_t(t.channels())}, dtype);
    out.reserve(out.size() + std::size_t(t.size()) * dtype_size(dtype));
    for (Index i = 0; i < t.size(); ++i) {
        const double v = t.data()[i];
        switch (dtype) {
        case Dtype::F32: put_le<float>(out, float(v)); break;
        case Dtype::F64: put_le<double>(out, v); break;
        case Dtype::U8: out.push_back(char(std::uint8_t(std::lround(255.0 * std::clamp(v, 0.0, 1.0))))); break;
        case Dtype::C128: break;
        }
    }
    write_bytes(path, out);
}

void write_tensor(const std::filesystem::path& path, const ComplexTensor2& t) {
    std::string out = header({std::uint32_t(t.height()), std::uint32_t(t.width())}, Dtype::C128);
    for (Index i = 0; i < t.size(); ++i) {
        put_le<double>(out, t.data()[i].real());
        put_le<double>(out, t.data()[i].imag());
    }
    write_bytes(path, out);
}

void write_measurement(const std::filesystem::path& path, const Measurement& m) {
    if (const auto* r = std::get_if<Tensor3d>(&m)) write_tensor(path, *r);
    else write_tensor(path, std::get<ComplexTensor2>(m));
}

TensorFile read_tensor_file(const std::filesystem::path& path) {
    const std::string bytes = read_bytes(path);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::size_t n = bytes.size();
    const std::string where = " in '" + path.string() + "'";
    if (n < 8 || std::memcmp(p, kMagic, 8) != 0) throw BadMagicError("not a GLRTENS1 file" + where);
    if (n < 12) throw TruncatedError("truncated header" + where);
    const std::uint32_t ndim = get_le<std::uint32_t>(p + 8);
    if (ndim < 1 || ndim > 3) throw ShapeError("unsupported rank " + std::to_string(ndim) + where);
    if (n < 12 + 4 * std::size_t(ndim) + 1) throw TruncatedError("truncated header" + where);
    std::vector<std::uint32_t> dims(3, 1);
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < ndim; ++i) {
        dims[i] = get_le<std::uint32_t>(p + 12 + 4 * i);
        if (dims[i] == 0 || dims[i] > (1u << 30)) throw ShapeError("invalid dimension" + where);
        count *= dims[i];
    }
    const std::size_t off = 12 + 4 * std::size_t(ndim);
    const std::uint8_t code = p[off];
    if (code < 1 || code > 4) throw UnknownDtypeError("unknown dtype code " + std::to_string(code) + where);
    const Dtype dtype = Dtype(code);
    const std::size_t need = off + 1 + count * dtype_size(dtype);
    if (n < need)
        throw TruncatedError("payload has " + std::to_string(n - off - 1) + " bytes, expected " +
                             std::to_string(need - off - 1) + where);
    if (n > need) throw IoError("trailing bytes after the payload" + where);
    const unsigned char* d = p + off + 1;

    TensorFile tf;
    tf.dtype = dtype;
    if (dtype == Dtype::C128) {
        if (ndim == 3 && dims[2] != 1) throw ShapeError("complex tensors must be two-dimensional" + where);
        ComplexTensor2 c{int(dims[0]), int(dims[1])};
        for (std::size_t i = 0; i < count; ++i)
            c.data()[Index(i)] = {get_le<double>(d + 16 * i), get_le<double>(d + 16 * i + 8)};
        tf.value = std::move(c);
        return tf;
    }
    Tensor3d t{int(dims[0]), int(dims[1]), int(dims[2])};
    for (std::size_t i = 0; i < count; ++i) {
        switch (dtype) {
        case Dtype::F32: t.data()[Index(i)] = get_le<float>(d + 4 * i); break;
        case Dtype::F64: t.data()[Index(i)] = get_le<double>(d + 8 * i); break;
        case Dtype::U8: t.data()[Index(i)] = double(d[i]) / 255.0; break;
        case Dtype::C128: break;
        }
    }
    if (dtype == Dtype::U8) tf.source_peak = 255.0;
    tf.value = std::move(t);
    return tf;
}

Tensor3d read_tensor(const std::filesystem::path& path) {
    TensorFile tf = read_tensor_file(path);
    if (auto* t = std::get_if<Tensor3d>(&tf.value)) return std::move(*t);
    throw ShapeError("'" + path.string() + "' holds a complex tensor, expected a real one");
}

Measurement read_measurement(const std::filesystem::path& path) { return read_tensor_file(path).value; }

void write_png_preview(const std::filesystem::path& path, const Tensor3d& t, double peak, std::optional<int> channel) {
    if (!(peak > 0.0)) throw ConfigError("preview peak must be positive");
    int out_c = t.channels();
    if (channel) {
        if (*channel < 0 || *channel >= t.channels()) throw ConfigError("preview channel out of range");
        out_c = 1;
    } else if (out_c != 1 && out_c != 3) {
        throw ConfigError("PNG preview needs 1 or 3 channels; pick one with a channel index");
    }
    const int h = t.height(), w = t.width();
    std::vector<unsigned char> pixels(std::size_t(h) * w * out_c);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            for (int k = 0; k < out_c; ++k) {
                const double v = t(r, c, channel ? *channel : k) / peak;
                pixels[(std::size_t(r) * w + c) * out_c + k] = std::uint8_t(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
            }

    FILE* fp = std::fopen(path.string().c_str(), "wb");
    if (!fp) throw IoError("cannot open '" + path.string() + "' for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("libpng failed writing '" + path.string() + "'");
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, png_uint_32(w), png_uint_32(h), 8, out_c == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int r = 0; r < h; ++r) png_write_row(png, pixels.data() + std::size_t(r) * w * out_c);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

void write_report_csv(const std::filesystem::path& path, const ReconReport& report) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "iteration,sigma,residual,psnr_db,ssim,groups,rematched,match_ms,lowrank_ms,projection_ms,cumulative_ms\n";
    for (const auto& r : report.iterations) {
        os << r.iteration << ',' << r.sigma << ',' << r.residual << ',';
        if (r.psnr) os << *r.psnr;
        os << ',';
        if (r.ssim) os << *r.ssim;
        os << ',' << r.groups << ',' << (r.rematched ? 1 : 0) << ',' << r.match_ms << ',' << r.lowrank_ms << ','
           << r.projection_ms << ',' << r.cumulative_ms << '\n';
    }
    write_text_file(path, os.str());
}

void write_trace_jsonl(const std::filesystem::path& path, const ReconReport& report) {
    std::string out;
    for (const auto& r : report.iterations) {
        nlohmann::ordered_json j;
        j["iteration"] = r.iteration;
        j["sigma"] = r.sigma;
        j["residual"] = r.residual;
        j["psnr_db"] = r.psnr ? nlohmann::ordered_json(*r.psnr) : nlohmann::ordered_json();
        j["ssim"] = r.ssim ? nlohmann::ordered_json(*r.ssim) : nlohmann::ordered_json();
        j["groups"] = r.groups;
        j["rematched"] = r.rematched;
        j["match_ms"] = r.match_ms;
        j["lowrank_ms"] = r.lowrank_ms;
        j["projection_ms"] = r.projection_ms;
        j["cumulative_ms"] = r.cumulative_ms;
        out += j.dump() + '\n';
    }
    write_text_file(path, out);
}

std::string read_text_file(const std::filesystem::path& path) { return read_bytes(path); }

void write_text_file(const std::filesystem::path& path, const std::string& text) { write_bytes(path, text); }

} // namespace glr
