#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "glr/tensor.hpp"

namespace glr {

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

/// Video of a bright square moving across a textured background,
/// H x W x T in [0, 1].
Tensor3d moving_square_scene(int height, int width, int frames, std::uint64_t seed);

/// Piecewise-smooth single-channel phantom in [0, 1]: nested ellipses with
/// smooth shading and one striped insert.
Tensor3d smooth_phantom(int height, int width);

/// Multispectral scene in [0, 1]: a smooth background with a 3 x 3 layout of
/// textured motifs of three kinds, each kind once per row and column, so
/// copies of a motif are a third of the image apart.
Tensor3d multispectral_scene(int height, int width, int channels, std::uint64_t seed);

/// Smooth background with one textured quadrant, H x W x C in [0, 1].
Tensor3d textured_quadrant_scene(int height, int width, int channels, std::uint64_t seed);

/// Adds i.i.d. Gaussian noise of standard deviation sigma.
Tensor3d add_noise(const Tensor3d& x, double sigma, std::uint64_t seed);

/// Named scene used by the CLI `demo` subcommand: moving-square, phantom,
/// multispectral or textured-quadrant.
Tensor3d demo_scene(const std::string& name, int height, int width, int channels, std::uint64_t seed);

} // namespace glr
