#pragma once

#include <Eigen/Core>

#include <compare>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "glr/error.hpp"

namespace glr {

using Eigen::Index;

/// Top-left corner of a patch.
struct Anchor {
    int row = 0;
    int col = 0;
    auto operator<=>(const Anchor&) const = default;
};

inline int chebyshev(Anchor a, Anchor b) {
    const int dr = a.row > b.row ? a.row - b.row : b.row - a.row;
    const int dc = a.col > b.col ? a.col - b.col : b.col - a.col;
    return dr > dc ? dr : dc;
}

/// H x W x C dense tensor, row-major with channels last:
/// element (h, w, c) lives at (h * W + w) * C + c.
template <typename Scalar>
class Tensor3 {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Tensor3() = default;

    Tensor3(int height, int width, int channels, Scalar fill = Scalar(0))
        : h_(height), w_(width), c_(channels) {
        check_dims();
        data_ = Vector::Constant(Index(h_) * w_ * c_, fill);
    }

    Tensor3(int height, int width, int channels, Vector data)
        : h_(height), w_(width), c_(channels), data_(std::move(data)) {
        check_dims();
        if (data_.size() != Index(h_) * w_ * c_)
            throw ShapeError("tensor data length does not match H*W*C");
    }

    int height() const { return h_; }
    int width() const { return w_; }
    int channels() const { return c_; }
    Index size() const { return data_.size(); }
    bool empty() const { return data_.size() == 0; }

    Index index(int h, int w, int c) const { return (Index(h) * w_ + w) * c_ + c; }

    Scalar& operator()(int h, int w, int c = 0) { return data_[index(h, w, c)]; }
    const Scalar& operator()(int h, int w, int c = 0) const { return data_[index(h, w, c)]; }

    Vector& data() { return data_; }
    const Vector& data() const { return data_; }

    Scalar* pixel(int h, int w) { return data_.data() + index(h, w, 0); }
    const Scalar* pixel(int h, int w) const { return data_.data() + index(h, w, 0); }

    bool same_shape(const Tensor3& o) const { return h_ == o.h_ && w_ == o.w_ && c_ == o.c_; }

    /// Single channel as an H x W x 1 tensor.
    Tensor3 channel(int c) const {
        Tensor3 out(h_, w_, 1);
        for (Index i = 0; i < Index(h_) * w_; ++i) out.data_[i] = data_[i * c_ + c];
        return out;
    }

    void set_channel(int c, const Tensor3& plane) {
        if (plane.h_ != h_ || plane.w_ != w_ || plane.c_ != 1)
            throw ShapeError("set_channel expects an H x W x 1 plane");
        for (Index i = 0; i < Index(h_) * w_; ++i) data_[i * c_ + c] = plane.data_[i];
    }

    /// H x W view of one channel for single-channel tensors.
    Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
    plane() const {
        if (c_ != 1) throw ShapeError("plane() requires a single-channel tensor");
        return {data_.data(), h_, w_};
    }

    template <typename Other>
    Tensor3<Other> cast() const {
        return Tensor3<Other>(h_, w_, c_, data_.template cast<Other>().eval());
    }

    bool operator==(const Tensor3& o) const { return same_shape(o) && data_ == o.data_; }

private:
    void check_dims() const {
        if (h_ <= 0 || w_ <= 0 || c_ <= 0) throw ShapeError("tensor dimensions must be positive");
    }

    int h_ = 0;
    int w_ = 0;
    int c_ = 0;
    Vector data_;
};

using Tensor3d = Tensor3<double>;
using Tensor3f = Tensor3<float>;

template <typename Scalar>
Scalar inner(const Tensor3<Scalar>& a, const Tensor3<Scalar>& b) {
    if (!a.same_shape(b)) throw ShapeError("inner product of tensors with different shapes");
    return a.data().dot(b.data());
}

template <typename Scalar>
bool all_finite(const Tensor3<Scalar>& t) {
    return t.data().allFinite();
}

/// H x W complex field, row-major.
class ComplexTensor2 {
public:
    ComplexTensor2() = default;
    ComplexTensor2(int height, int width)
        : h_(height), w_(width), data_(Eigen::VectorXcd::Zero(Index(height) * width)) {
        if (h_ <= 0 || w_ <= 0) throw ShapeError("complex tensor dimensions must be positive");
    }
    ComplexTensor2(int height, int width, Eigen::VectorXcd data)
        : h_(height), w_(width), data_(std::move(data)) {
        if (h_ <= 0 || w_ <= 0) throw ShapeError("complex tensor dimensions must be positive");
        if (data_.size() != Index(h_) * w_) throw ShapeError("complex tensor data length mismatch");
    }

    int height() const { return h_; }
    int width() const { return w_; }
    Index size() const { return data_.size(); }

    std::complex<double>& operator()(int h, int w) { return data_[Index(h) * w_ + w]; }
    const std::complex<double>& operator()(int h, int w) const { return data_[Index(h) * w_ + w]; }

    Eigen::VectorXcd& data() { return data_; }
    const Eigen::VectorXcd& data() const { return data_; }

    bool same_shape(const ComplexTensor2& o) const { return h_ == o.h_ && w_ == o.w_; }
    bool operator==(const ComplexTensor2& o) const { return same_shape(o) && data_ == o.data_; }

private:
    int h_ = 0;
    int w_ = 0;
    Eigen::VectorXcd data_;
};

/// Stack of similar patches. Column j is the vectorized P x P x C block whose
/// top-left corner is positions[j]; column 0 is the exemplar.
template <typename Scalar>
struct PatchGroup {
    int patch_size = 0;
    std::vector<Anchor> positions;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> matrix;
    /// Matching score per column (heat-map value or squared distance).
    std::vector<double> scores;
    /// Set when the separation constraint had to be dropped to fill the group.
    bool relaxed_separation = false;
    /// Number of trailing columns that repeat the exemplar.
    int repeated_exemplar = 0;
};

using PatchGroupd = PatchGroup<double>;

template <typename Scalar>
void check_anchors(const Tensor3<Scalar>& img, std::span<const Anchor> positions, int patch) {
    if (patch <= 0) throw ConfigError("patch size must be positive");
    for (std::size_t j = 0; j < positions.size(); ++j) {
        const Anchor a = positions[j];
        if (a.row < 0 || a.col < 0 || a.row > img.height() - patch || a.col > img.width() - patch)
            throw BoundsError("anchor " + std::to_string(j) + " at (" + std::to_string(a.row) + ", " +
                                  std::to_string(a.col) + ") does not fit a " + std::to_string(patch) +
                                  "-pixel patch",
                              j);
    }
}

/// Copy the blocks at `positions` into the columns of a patch matrix.
template <typename Scalar>
PatchGroup<Scalar> gather_group(const Tensor3<Scalar>& img, std::span<const Anchor> positions, int patch) {
    check_anchors(img, positions, patch);
    const int row_len = patch * img.channels();
    PatchGroup<Scalar> g;
    g.patch_size = patch;
    g.positions.assign(positions.begin(), positions.end());
    g.matrix.resize(Index(patch) * row_len, Index(positions.size()));
    for (Index j = 0; j < Index(positions.size()); ++j) {
        const Anchor a = positions[j];
        for (int p = 0; p < patch; ++p) {
            g.matrix.col(j).segment(Index(p) * row_len, row_len) =
                Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(img.pixel(a.row + p, a.col), row_len);
        }
    }
    return g;
}

/// Add every column of `group` back at its anchor and bump the per-entry counter.
template <typename Scalar>
void scatter_group(Tensor3<Scalar>& acc, Tensor3<Scalar>& cnt, const PatchGroup<Scalar>& group) {
    if (!acc.same_shape(cnt)) throw ShapeError("accumulator and counter shapes differ");
    check_anchors(acc, std::span<const Anchor>(group.positions), group.patch_size);
    const int patch = group.patch_size;
    const int row_len = patch * acc.channels();
    if (group.matrix.rows() != Index(patch) * row_len || group.matrix.cols() != Index(group.positions.size()))
        throw ShapeError("patch matrix does not match the accumulator geometry");
    for (Index j = 0; j < group.matrix.cols(); ++j) {
        const Anchor a = group.positions[j];
        for (int p = 0; p < patch; ++p) {
            Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(acc.pixel(a.row + p, a.col), row_len) +=
                group.matrix.col(j).segment(Index(p) * row_len, row_len);
            Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(cnt.pixel(a.row + p, a.col), row_len).array() +=
                Scalar(1);
        }
    }
}

/// acc / cnt where cnt > 0, `fallback` elsewhere.
template <typename Scalar>
Tensor3<Scalar> normalize_accumulator(const Tensor3<Scalar>& acc, const Tensor3<Scalar>& cnt,
                                      const Tensor3<Scalar>& fallback) {
    if (!acc.same_shape(cnt) || !acc.same_shape(fallback))
        throw ShapeError("accumulator, counter and fallback shapes differ");
    Tensor3<Scalar> out = fallback;
    out.data() = (cnt.data().array() > Scalar(0))
                     .select(acc.data().array() / cnt.data().array().max(Scalar(1)), fallback.data().array())
                     .matrix();
    return out;
}

} // namespace glr
