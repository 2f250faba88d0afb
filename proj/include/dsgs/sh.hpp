#pragma once

#include "dsgs/types.hpp"

namespace dsgs {

inline int sh_num_coeffs(int degree) { return (degree + 1) * (degree + 1); }

// Real SH basis values at a unit direction, degrees 0..3.
void sh_basis(int degree, const Vec3& dir, double* out);
// d(basis)/d(dir), column k = gradient of basis k. `out` is 3 x n_coeffs.
void sh_basis_grad(int degree, const Vec3& dir, double* basis, double* grad);

// coeffs layout: n_coeffs triples (r,g,b). Returns 0.5 + sum_k c_k * b_k.
Vec3 eval_sh(int degree, const double* coeffs, const Vec3& dir);

// Accumulates d(loss)/d(coeffs) into dcoeffs and returns d(loss)/d(dir).
Vec3 eval_sh_backward(int degree, const double* coeffs, const Vec3& dir,
                      const Vec3& dcolor, double* dcoeffs);

}  // namespace dsgs
