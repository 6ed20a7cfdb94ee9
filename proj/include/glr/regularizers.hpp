#pragma once

#include <string>

#include "glr/tensor.hpp"

namespace glr {

/// Prior used inside the outer solver loop.
///  - Glr:                  corner + sparse-grid exemplars, global matching, WNNM
///  - NlrBm:                uniform exemplars, block matching, WNNM
///  - NlrCornerBm:          corner exemplars, block matching, WNNM
///  - NlrCornerUniformBm:   corner + sparse-grid exemplars, block matching, WNNM
///  - Tv:                   anisotropic total variation
enum class RegularizerKind { Glr, NlrBm, NlrCornerBm, NlrCornerUniformBm, Tv };

std::string to_string(RegularizerKind r);
RegularizerKind parse_regularizer(const std::string& s);

/// argmin_z 1/2 ||z - x||^2 + weight * sum |D_h z| + |D_v z| per channel,
/// computed by projected gradient on the dual with a fixed iteration count.
Tensor3d tv_prox(const Tensor3d& x, double weight, int iterations = 20);

/// Anisotropic total variation of each channel, summed.
double total_variation(const Tensor3d& x);

} // namespace glr
