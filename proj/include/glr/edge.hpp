#pragma once

#include <optional>
#include <vector>

#include "glr/tensor.hpp"

namespace glr {

/// Horizontal and vertical Sobel responses, same shape as the input.
struct Gradients {
    Tensor3d horizontal;
    Tensor3d vertical;
};

/// Sign-split binary edge maps. Each entry is 0 or 1.
struct EdgeMaps {
    Tensor3d h_pos;
    Tensor3d h_neg;
    Tensor3d v_pos;
    Tensor3d v_neg;
};

/// Per-channel Sobel correlation with [[-1,0,1],[-2,0,2],[-1,0,1]] and its
/// transpose on the valid interior. Border rows and columns replicate the
/// nearest interior value. Requires H, W >= 3.
Gradients sobel_gradients(const Tensor3d& img);

/// Rectify and threshold: h_pos = [Gh > th_h], h_neg = [-Gh > th_h], and
/// likewise for the vertical map.
EdgeMaps binarize_gradients_abs(const Gradients& g, double th_h, double th_v);

/// Same as binarize_gradients_abs with each threshold taken as a fraction of
/// that map's largest absolute gradient.
EdgeMaps binarize_gradients(const Gradients& g, double relative_threshold = 0.2);

/// The four maps stacked along channels as [h_pos | h_neg | v_pos | v_neg],
/// giving an H x W x 4C tensor.
Tensor3d stack_edge_maps(const EdgeMaps& e);

/// Channel-averaged gradient magnitude, H x W x 1.
Tensor3d gradient_magnitude(const Gradients& g);

struct CornerParams {
    int max_corners = 512;
    int nms_radius = 4;
    double quality = 0.01;
};

/// Shi-Tomasi minimum-eigenvalue response of `image` (single channel) with a
/// 3x3 structure-tensor window.
Tensor3d min_eigen_response(const Tensor3d& image);

/// Corners of the gradient-magnitude map, strongest first. Ties are ordered
/// row-major. Returned corners are pairwise more than nms_radius apart in
/// Chebyshev distance.
std::vector<Anchor> detect_corners(const Gradients& g, const CornerParams& params);

enum class ExemplarOrigin { Corner, Uniform };

struct ExemplarSet {
    std::vector<Anchor> anchors;
    std::vector<ExemplarOrigin> origins;

    std::size_t size() const { return anchors.size(); }
    bool empty() const { return anchors.empty(); }
};

/// Grid of anchors with the given stride. The last row/column that fits a
/// patch is always included so the grid covers the whole image.
std::vector<Anchor> uniform_grid(int height, int width, int patch, int stride);

/// Corners become patch anchors centred on the corner (clamped, deduplicated);
/// when `uniform_interval` is set a grid with that stride is added.
ExemplarSet select_exemplars(const std::vector<Anchor>& corners, int height, int width, int patch,
                             std::optional<int> uniform_interval);

ExemplarSet uniform_exemplars(int height, int width, int patch, int stride);

} // namespace glr
