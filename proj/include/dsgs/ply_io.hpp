#pragma once

#include <string>

#include "dsgs/gaussian_cloud.hpp"

namespace dsgs {

// Binary little-endian PLY, one float64 property per raw scalar:
// x y z, rot_0..3, scale_0..2, opacity, f_dc_0..2, f_rest_*.
// f_rest is coefficient-major (coeff1 r,g,b, coeff2 r,g,b, ...).
void save_ply(const GaussianCloud& cloud, const std::string& path);
GaussianCloud load_ply(const std::string& path);

}  // namespace dsgs
