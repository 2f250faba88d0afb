#include "dsgs/sh.hpp"

namespace dsgs {

namespace {
constexpr double C0 = 0.28209479177387814;
constexpr double C1 = 0.4886025119029199;
constexpr double C2[5] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                          -1.0925484305920792, 0.5462742152960396};
constexpr double C3[7] = {-0.5900435899266435, 2.890611442640554,  -0.4570457994644658,
                          0.3731763325901154,  -0.4570457994644658, 1.445305721320277,
                          -0.5900435899266435};
}  // namespace

void sh_basis(int degree, const Vec3& dir, double* b) {
  const double x = dir.x(), y = dir.y(), z = dir.z();
  b[0] = C0;
  if (degree < 1) return;
  b[1] = -C1 * y;
  b[2] = C1 * z;
  b[3] = -C1 * x;
  if (degree < 2) return;
  const double xx = x * x, yy = y * y, zz = z * z;
  b[4] = C2[0] * x * y;
  b[5] = C2[1] * y * z;
  b[6] = C2[2] * (2.0 * zz - xx - yy);
  b[7] = C2[3] * x * z;
  b[8] = C2[4] * (xx - yy);
  if (degree < 3) return;
  b[9] = C3[0] * y * (3.0 * xx - yy);
  b[10] = C3[1] * x * y * z;
  b[11] = C3[2] * y * (4.0 * zz - xx - yy);
  b[12] = C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
  b[13] = C3[4] * x * (4.0 * zz - xx - yy);
  b[14] = C3[5] * z * (xx - yy);
  b[15] = C3[6] * x * (xx - 3.0 * yy);
}

void sh_basis_grad(int degree, const Vec3& dir, double* b, double* g) {
  sh_basis(degree, dir, b);
  const int n = sh_num_coeffs(degree);
  std::fill(g, g + 3 * n, 0.0);
  auto G = [&](int k) { return g + 3 * k; };  // (dx, dy, dz)
  const double x = dir.x(), y = dir.y(), z = dir.z();
  if (degree < 1) return;
  G(1)[1] = -C1;
  G(2)[2] = C1;
  G(3)[0] = -C1;
  if (degree < 2) return;
  G(4)[0] = C2[0] * y; G(4)[1] = C2[0] * x;
  G(5)[1] = C2[1] * z; G(5)[2] = C2[1] * y;
  G(6)[0] = -2.0 * C2[2] * x; G(6)[1] = -2.0 * C2[2] * y; G(6)[2] = 4.0 * C2[2] * z;
  G(7)[0] = C2[3] * z; G(7)[2] = C2[3] * x;
  G(8)[0] = 2.0 * C2[4] * x; G(8)[1] = -2.0 * C2[4] * y;
  if (degree < 3) return;
  const double xx = x * x, yy = y * y, zz = z * z;
  G(9)[0] = C3[0] * 6.0 * x * y;
  G(9)[1] = C3[0] * (3.0 * xx - 3.0 * yy);
  G(10)[0] = C3[1] * y * z; G(10)[1] = C3[1] * x * z; G(10)[2] = C3[1] * x * y;
  G(11)[0] = C3[2] * (-2.0 * x * y);
  G(11)[1] = C3[2] * (4.0 * zz - xx - 3.0 * yy);
  G(11)[2] = C3[2] * 8.0 * y * z;
  G(12)[0] = C3[3] * (-6.0 * x * z);
  G(12)[1] = C3[3] * (-6.0 * y * z);
  G(12)[2] = C3[3] * (6.0 * zz - 3.0 * xx - 3.0 * yy);
  G(13)[0] = C3[4] * (4.0 * zz - 3.0 * xx - yy);
  G(13)[1] = C3[4] * (-2.0 * x * y);
  G(13)[2] = C3[4] * 8.0 * x * z;
  G(14)[0] = C3[5] * 2.0 * x * z;
  G(14)[1] = C3[5] * (-2.0 * y * z);
  G(14)[2] = C3[5] * (xx - yy);
  G(15)[0] = C3[6] * (3.0 * xx - 3.0 * yy);
  G(15)[1] = C3[6] * (-6.0 * x * y);
}

Vec3 eval_sh(int degree, const double* coeffs, const Vec3& dir) {
  double b[16];
  sh_basis(degree, dir, b);
  Vec3 c(0.5, 0.5, 0.5);
  const int n = sh_num_coeffs(degree);
  for (int k = 0; k < n; ++k)
    for (int ch = 0; ch < 3; ++ch) c[ch] += coeffs[3 * k + ch] * b[k];
  return c;
}

Vec3 eval_sh_backward(int degree, const double* coeffs, const Vec3& dir,
                      const Vec3& dcolor, double* dcoeffs) {
  double b[16], g[48];
  sh_basis_grad(degree, dir, b, g);
  Vec3 ddir = Vec3::Zero();
  const int n = sh_num_coeffs(degree);
  for (int k = 0; k < n; ++k) {
    for (int ch = 0; ch < 3; ++ch) {
      dcoeffs[3 * k + ch] += dcolor[ch] * b[k];
      ddir += dcolor[ch] * coeffs[3 * k + ch] * Vec3(g[3 * k], g[3 * k + 1], g[3 * k + 2]);
    }
  }
  return ddir;
}

}  // namespace dsgs
