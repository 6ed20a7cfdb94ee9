#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "glr/tensor.hpp"

namespace glr {

enum class OperatorKind { Cacti, Fourier, Msfa };

std::string to_string(OperatorKind k);
OperatorKind parse_operator_kind(const std::string& s);

/// Real snapshot (CACTI, MSFA) or complex spectrum (Fourier).
using Measurement = std::variant<Tensor3d, ComplexTensor2>;

Measurement subtract(const Measurement& a, const Measurement& b);
double norm(const Measurement& m);
/// Real part of the inner product.
double inner(const Measurement& a, const Measurement& b);

/// Per-frame or per-channel masks stacked along channels (H x W x N).
struct MaskSet {
    Tensor3d masks;
    int count() const { return masks.channels(); }
};

/// Binary sampling map in DFT order (DC at (0, 0)), H x W x 1.
struct FourierMask {
    Tensor3d map;
    double sampling_ratio() const { return map.data().mean(); }
};

/// A linear sensing model y = Phi x with its adjoint. gram_diag() is the
/// diagonal of Phi Phi^T laid out on the H x W measurement grid.
class SensingOperator {
public:
    virtual ~SensingOperator() = default;

    virtual OperatorKind kind() const = 0;
    virtual Measurement forward(const Tensor3d& x) const = 0;
    virtual Tensor3d adjoint(const Measurement& y) const = 0;
    virtual const Tensor3d& gram_diag() const = 0;

    virtual int height() const = 0;
    virtual int width() const = 0;
    /// Channels of the signal x.
    virtual int channels() const = 0;

    /// Throws ShapeError unless `y` fits this operator's measurement domain.
    virtual void check_measurement(const Measurement& y) const = 0;

    /// z + Phi^T ((y - Phi z) / (gram_diag + rho)). Entries where the
    /// denominator is zero get no correction.
    Tensor3d project(const Tensor3d& z, const Measurement& y, double rho = 0.0) const;
};

// --- CACTI -----------------------------------------------------------------

/// y = sum_t A_t * x_t for an H x W x T video.
Tensor3d cacti_forward(const Tensor3d& x, const MaskSet& masks);
/// x_t = A_t * y.
Tensor3d cacti_adjoint(const Tensor3d& y, const MaskSet& masks);

/// i.i.d. Bernoulli(0.5) binary masks from a 64-bit Mersenne Twister.
MaskSet bernoulli_masks(int height, int width, int frames, std::uint64_t seed);

class CactiOperator final : public SensingOperator {
public:
    explicit CactiOperator(MaskSet masks);
    OperatorKind kind() const override { return OperatorKind::Cacti; }
    Measurement forward(const Tensor3d& x) const override { return cacti_forward(x, masks_); }
    Tensor3d adjoint(const Measurement& y) const override;
    const Tensor3d& gram_diag() const override { return gram_; }
    int height() const override { return masks_.masks.height(); }
    int width() const override { return masks_.masks.width(); }
    int channels() const override { return masks_.count(); }
    void check_measurement(const Measurement& y) const override;
    const MaskSet& masks() const { return masks_; }

private:
    MaskSet masks_;
    Tensor3d gram_;
};

// --- masked Fourier ----------------------------------------------------------

/// Masked orthonormal 2-D DFT of a single-channel image.
ComplexTensor2 fourier_forward(const Tensor3d& x, const FourierMask& mask);
/// Real part of the inverse orthonormal DFT of the masked spectrum.
Tensor3d fourier_adjoint(const ComplexTensor2& y, const FourierMask& mask);
/// Norm of the imaginary part discarded by fourier_adjoint.
double fourier_imaginary_residual(const ComplexTensor2& y, const FourierMask& mask);

/// `num_lines` spokes through DC at angles k*pi/num_lines, rasterized with
/// Bresenham on the centred grid, made conjugate-symmetric, DC always on.
FourierMask radial_mask(int height, int width, int num_lines);

/// Copy of `m` with the zero frequency moved to the centre, for display.
Tensor3d fftshift(const Tensor3d& m);

class FourierOperator final : public SensingOperator {
public:
    explicit FourierOperator(FourierMask mask);
    OperatorKind kind() const override { return OperatorKind::Fourier; }
    Measurement forward(const Tensor3d& x) const override { return fourier_forward(x, mask_); }
    Tensor3d adjoint(const Measurement& y) const override;
    const Tensor3d& gram_diag() const override { return mask_.map; }
    int height() const override { return mask_.map.height(); }
    int width() const override { return mask_.map.width(); }
    int channels() const override { return 1; }
    void check_measurement(const Measurement& y) const override;
    const FourierMask& mask() const { return mask_; }

private:
    FourierMask mask_;
};

// --- MSFA --------------------------------------------------------------------

/// Throws OrthogonalityError unless the masks are binary, pairwise disjoint
/// and sum to one at every pixel.
void check_partition(const MaskSet& masks);

/// y = sum_i A_i * x_i (one active channel per pixel).
Tensor3d msfa_forward(const Tensor3d& x, const MaskSet& masks);
Tensor3d msfa_adjoint(const Tensor3d& y, const MaskSet& masks);

enum class MsfaPattern { Bayer2x2, Periodic3x3, Periodic4x4, CustomTile };

std::string to_string(MsfaPattern p);
MsfaPattern parse_msfa_pattern(const std::string& s);

/// Channel index of every cell of a repeating filter tile, row-major.
struct FilterTile {
    int rows = 0;
    int cols = 0;
    std::vector<int> channel;
    int at(int r, int c) const { return channel[std::size_t(r) * cols + c]; }
};

/// Whitespace-separated integer grid, one tile row per line.
FilterTile parse_tile(const std::string& text);

MaskSet msfa_pattern(MsfaPattern kind, int channels, int height, int width,
                     const std::optional<FilterTile>& tile = std::nullopt);

class MsfaOperator final : public SensingOperator {
public:
    /// Rejects masks that are not a partition.
    explicit MsfaOperator(MaskSet masks);
    OperatorKind kind() const override { return OperatorKind::Msfa; }
    Measurement forward(const Tensor3d& x) const override { return msfa_forward(x, masks_); }
    Tensor3d adjoint(const Measurement& y) const override;
    const Tensor3d& gram_diag() const override { return gram_; }
    int height() const override { return masks_.masks.height(); }
    int width() const override { return masks_.masks.width(); }
    int channels() const override { return masks_.count(); }
    void check_measurement(const Measurement& y) const override;
    const MaskSet& masks() const { return masks_; }

private:
    MaskSet masks_;
    Tensor3d gram_;
};

} // namespace glr
