#include "dsgs/renderer.hpp"

#include <algorithm>
#include <cmath>

#include "dsgs/sh.hpp"

namespace dsgs {

namespace {

// Jacobian of (x,y,z) -> (fx x/z + cx, fy y/z + cy) at pc.
Eigen::Matrix<double, 2, 3> proj_jacobian(const CameraView& v, const Vec3& pc) {
  Eigen::Matrix<double, 2, 3> J;
  const double z = pc.z(), z2 = z * z;
  J << v.fx / z, 0, -v.fx * pc.x() / z2,
       0, v.fy / z, -v.fy * pc.y() / z2;
  return J;
}

}  // namespace

std::optional<ProjectedGaussian> project_gaussian(const GaussianCloud& cloud, int i,
                                                  const CameraView& view,
                                                  const RenderOptions& opts) {
  ProjectedGaussian pg;
  pg.idx = i;
  const Vec3& mu = cloud.pos[i];
  pg.mu_cam = view.world_to_cam(mu);
  pg.z = pg.mu_cam.z();
  if (pg.z <= opts.near_plane) return std::nullopt;

  pg.center_px = view.project_cam(pg.mu_cam);

  Mat3 sigma = build_covariance(cloud.rot_raw[i], cloud.log_scale[i]);
  Mat3 sigma_cam = view.R_c.transpose() * sigma * view.R_c;
  Eigen::Matrix<double, 2, 3> J = proj_jacobian(view, pg.mu_cam);
  pg.cov2d = J * sigma_cam * J.transpose();

  Mat2 dilated = pg.cov2d;
  if (!opts.test_mode) dilated += opts.dilation * Mat2::Identity();
  double det = dilated.determinant();
  if (det <= 0.0 || !std::isfinite(det)) return std::nullopt;
  pg.conic = dilated.inverse();

  double mid = 0.5 * dilated.trace();
  double lambda_max = mid + std::sqrt(std::max(0.0, mid * mid - det));
  pg.radius_px = 3.0 * std::sqrt(lambda_max);
  if (!opts.test_mode) {
    if (pg.center_px.x() + pg.radius_px < 0 || pg.center_px.x() - pg.radius_px > view.width ||
        pg.center_px.y() + pg.radius_px < 0 || pg.center_px.y() - pg.radius_px > view.height)
      return std::nullopt;
  }

  pg.opacity = cloud.activated_opacity(i);
  Vec3 to_g = mu - view.T_c;
  pg.view_dist = to_g.norm();
  pg.view_dir = to_g / pg.view_dist;
  pg.color = eval_sh(cloud.sh_degree, cloud.sh_ptr(i), pg.view_dir);
  pg.normal_world = gaussian_normal_ex(cloud.rot_raw[i], cloud.log_scale[i], mu, view.T_c,
                                       pg.normal_axis, pg.normal_sign);
  pg.normal_cam = view.R_c.transpose() * pg.normal_world;
  pg.plane_dist = to_g.dot(pg.normal_world);
  return pg;
}

double alpha_at(const ProjectedGaussian& pg, const Vec2& pixel, const RenderOptions& opts) {
  Vec2 d = pixel - pg.center_px;
  double power = -0.5 * d.dot(pg.conic * d);
  if (power > 0.0) return 0.0;
  double a = pg.opacity * std::exp(power);
  if (!opts.test_mode) a = std::min(a, opts.alpha_clamp);
  return a;
}

RenderBuffers rasterize(const GaussianCloud& cloud, const CameraView& view,
                        const RenderOptions& opts, RenderCache* cache) {
  const int W = view.width, H = view.height, ts = opts.tile_size;
  RenderBuffers buf;
  buf.width = W;
  buf.height = H;
  buf.color = Image3(W, H);
  buf.normal = Image3(W, H);
  buf.distance = Image1(W, H);
  buf.depth = Image1(W, H);
  buf.acc = Image1(W, H);
  buf.depth_valid.assign(size_t(W) * H, 0);
  buf.final_T.assign(size_t(W) * H, 1.0);
  buf.n_contrib.assign(size_t(W) * H, 0);

  std::vector<ProjectedGaussian> pg;
  pg.reserve(cloud.size());
  for (int i = 0; i < cloud.size(); ++i)
    if (auto p = project_gaussian(cloud, i, view, opts)) pg.push_back(*p);

  const int tx = (W + ts - 1) / ts, ty = (H + ts - 1) / ts;
  std::vector<std::vector<int>> tile_lists(size_t(tx) * ty);
  for (int k = 0; k < int(pg.size()); ++k) {
    double r = opts.test_mode ? std::hypot(W, H) + 1.0 : pg[k].radius_px;
    int x0 = std::clamp(int((pg[k].center_px.x() - r) / ts), 0, tx - 1);
    int x1 = std::clamp(int((pg[k].center_px.x() + r) / ts), 0, tx - 1);
    int y0 = std::clamp(int((pg[k].center_px.y() - r) / ts), 0, ty - 1);
    int y1 = std::clamp(int((pg[k].center_px.y() + r) / ts), 0, ty - 1);
    for (int tyi = y0; tyi <= y1; ++tyi)
      for (int txi = x0; txi <= x1; ++txi)
        tile_lists[size_t(tyi) * tx + txi].push_back(k);
  }
  // Front-to-back order, ties broken by Gaussian index (list order is
  // already index-ascending, so a stable sort on depth suffices).
  for (auto& list : tile_lists)
    std::stable_sort(list.begin(), list.end(),
                     [&](int a, int b) { return pg[a].z < pg[b].z; });

  for (int tyi = 0; tyi < ty; ++tyi) {
    for (int txi = 0; txi < tx; ++txi) {
      const auto& list = tile_lists[size_t(tyi) * tx + txi];
      const int px0 = txi * ts, px1 = std::min(W, px0 + ts);
      const int py0 = tyi * ts, py1 = std::min(H, py0 + ts);
      for (int y = py0; y < py1; ++y) {
        for (int x = px0; x < px1; ++x) {
          const Vec2 pix(x + 0.5, y + 0.5);
          double T = 1.0;
          Vec3 c_acc = Vec3::Zero(), n_acc = Vec3::Zero();
          double l_acc = 0.0;
          size_t e = 0;
          for (; e < list.size(); ++e) {
            const ProjectedGaussian& g = pg[list[e]];
            double a = alpha_at(g, pix, opts);
            if (!opts.test_mode && a < opts.alpha_cutoff) continue;
            double w = a * T;
            c_acc += w * g.color;
            n_acc += w * g.normal_cam;
            l_acc += w * g.plane_dist;
            T *= (1.0 - a);
            if (!opts.test_mode && T < opts.transmittance_eps) { ++e; break; }
          }
          size_t pi = size_t(y) * W + x;
          buf.color.set_pixel(y, x, c_acc + T * opts.background);
          buf.normal.set_pixel(y, x, n_acc);
          buf.distance.at(y, x) = l_acc;
          buf.acc.at(y, x) = 1.0 - T;
          buf.final_T[pi] = T;
          buf.n_contrib[pi] = int(e);
        }
      }
    }
  }

  compute_unbiased_depth(buf, view, opts);

  if (cache) {
    cache->pg = std::move(pg);
    cache->tile_lists = std::move(tile_lists);
    cache->tiles_x = tx;
    cache->tiles_y = ty;
    cache->view = view;
    cache->opts = opts;
  }
  return buf;
}

void compute_unbiased_depth(RenderBuffers& buf, const CameraView& view,
                            const RenderOptions& opts) {
  for (int y = 0; y < buf.height; ++y) {
    for (int x = 0; x < buf.width; ++x) {
      Vec3 ray = view.pixel_ray(x + 0.5, y + 0.5);
      double denom = buf.normal.pixel(y, x).dot(ray);
      bool ok = buf.acc.at(y, x) >= opts.depth_acc_threshold && std::abs(denom) >= 1e-6;
      buf.depth_valid[size_t(y) * buf.width + x] = ok ? 1 : 0;
      buf.depth.at(y, x) = ok ? buf.distance.at(y, x) / denom : 0.0;
    }
  }
}

void rasterize_backward(const GaussianCloud& cloud, const RenderCache& cache,
                        const RenderBuffers& buf, const BufferGrads& up,
                        CloudGrads& grads, DensifyStats* stats) {
  if (buf.width != cache.view.width || buf.height != cache.view.height)
    throw DsgsError("rasterize_backward: buffer/view mismatch");
  const RenderOptions& opts = cache.opts;
  const CameraView& view = cache.view;
  const int W = buf.width, H = buf.height, ts = opts.tile_size;
  const auto& pg = cache.pg;

  // Per projected Gaussian accumulators, chained to raw parameters at the end.
  std::vector<Vec3> acc_dcolor(pg.size(), Vec3::Zero());
  std::vector<Vec3> acc_dnormal_cam(pg.size(), Vec3::Zero());
  std::vector<double> acc_dl(pg.size(), 0.0);
  std::vector<double> acc_dsigma(pg.size(), 0.0);  // w.r.t. activated opacity
  std::vector<Vec2> acc_dcenter(pg.size(), Vec2::Zero());
  std::vector<Mat2> acc_dA(pg.size(), Mat2::Zero());
  std::vector<Vec3> acc_dmu_cam(pg.size(), Vec3::Zero());
  std::vector<uint8_t> touched(pg.size(), 0);

  struct Contrib {
    int k;      // index into pg
    double alpha;
  };
  std::vector<Contrib> contribs;

  for (int tyi = 0; tyi < cache.tiles_y; ++tyi) {
    for (int txi = 0; txi < cache.tiles_x; ++txi) {
      const auto& list = cache.tile_lists[size_t(tyi) * cache.tiles_x + txi];
      const int px0 = txi * ts, px1 = std::min(W, px0 + ts);
      const int py0 = tyi * ts, py1 = std::min(H, py0 + ts);
      for (int y = py0; y < py1; ++y) {
        for (int x = px0; x < px1; ++x) {
          const size_t pi = size_t(y) * W + x;
          const Vec3 dC = up.d_color.pixel(y, x);
          const Vec3 dN = up.d_normal.pixel(y, x);
          const double dLd = up.d_distance.at(y, x);
          const double dAcc = up.d_acc.at(y, x);
          if (dC.isZero(0.0) && dN.isZero(0.0) && dLd == 0.0 && dAcc == 0.0) continue;

          const Vec2 pix(x + 0.5, y + 0.5);
          contribs.clear();
          for (size_t e = 0; e < size_t(buf.n_contrib[pi]); ++e) {
            const ProjectedGaussian& g = pg[list[e]];
            double a = alpha_at(g, pix, opts);
            if (!opts.test_mode && a < opts.alpha_cutoff) continue;
            contribs.push_back({list[e], a});
          }

          const double T_final = buf.final_T[pi];
          double T_behind = T_final;
          Vec3 S_c = Vec3::Zero(), S_n = Vec3::Zero();
          double S_l = 0.0;
          const double bg_dC = opts.background.dot(dC);
          for (size_t r = contribs.size(); r-- > 0;) {
            const auto& cb = contribs[r];
            const ProjectedGaussian& g = pg[cb.k];
            const double om = 1.0 - cb.alpha;
            const double T_i = T_behind / om;

            double g_alpha = T_i * (g.color.dot(dC) + g.normal_cam.dot(dN) + g.plane_dist * dLd) -
                             (S_c.dot(dC) + S_n.dot(dN) + S_l * dLd + T_final * bg_dC -
                              T_final * dAcc) / om;

            const double w = cb.alpha * T_i;
            acc_dcolor[cb.k] += w * dC;
            acc_dnormal_cam[cb.k] += w * dN;
            acc_dl[cb.k] += w * dLd;
            touched[cb.k] = 1;

            // alpha = sigma * exp(power); clamped alphas pass no gradient.
            bool clamped = !opts.test_mode && cb.alpha >= opts.alpha_clamp;
            if (!clamped) {
              const Vec2 d = pix - g.center_px;
              const double gval = cb.alpha / g.opacity;  // exp(power)
              acc_dsigma[cb.k] += g_alpha * gval;
              const double dpower = g_alpha * cb.alpha;
              const Vec2 Pd = g.conic * d;
              const Vec2 dd = -dpower * Pd;
              acc_dcenter[cb.k] -= dd;
              acc_dA[cb.k] += g.conic * (0.5 * dpower * (d * d.transpose())) * g.conic;
            }

            S_c += w * g.color;
            S_n += w * g.normal_cam;
            S_l += w * g.plane_dist;
            T_behind = T_i;
          }
        }
      }
    }
  }

  // Chain per-Gaussian accumulators to raw parameters.
  const int sh_dim = cloud.sh_dim();
  for (size_t k = 0; k < pg.size(); ++k) {
    if (!touched[k]) continue;
    const ProjectedGaussian& g = pg[k];
    const int i = g.idx;
    Vec3 dmu = Vec3::Zero();
    Vec4 drot = Vec4::Zero();
    Vec3 dls = Vec3::Zero();

    // color -> SH coefficients and view direction -> mu
    if (!acc_dcolor[k].isZero(0.0)) {
      Vec3 ddir = eval_sh_backward(cloud.sh_degree, cloud.sh_ptr(i), g.view_dir,
                                   acc_dcolor[k], grads.sh_ptr(i, sh_dim));
      dmu += (Mat3::Identity() - g.view_dir * g.view_dir.transpose()) * ddir / g.view_dist;
    }

    // normal and plane distance
    Vec3 dn_world = view.R_c * acc_dnormal_cam[k];
    dn_world += acc_dl[k] * (cloud.pos[i] - view.T_c);
    dmu += acc_dl[k] * g.normal_world;
    if (!dn_world.isZero(0.0)) {
      Mat3 dR = Mat3::Zero();
      dR.col(g.normal_axis) = g.normal_sign * dn_world;
      drot += quat_normalize_backward(cloud.rot_raw[i],
                                      rot_backward(dR, normalize_quat(cloud.rot_raw[i])));
    }

    // projected center -> mu_cam
    Vec3 dmu_cam = acc_dmu_cam[k];
    {
      const Vec2& dc = acc_dcenter[k];
      const double z = g.mu_cam.z(), z2 = z * z;
      dmu_cam.x() += view.fx / z * dc.x();
      dmu_cam.y() += view.fy / z * dc.y();
      dmu_cam.z() += -(view.fx * g.mu_cam.x() / z2) * dc.x() -
                     (view.fy * g.mu_cam.y() / z2) * dc.y();
    }

    // screen covariance -> 3D covariance and mu_cam (through J)
    if (!acc_dA[k].isZero(0.0)) {
      Mat3 sigma = build_covariance(cloud.rot_raw[i], cloud.log_scale[i]);
      Mat3 sigma_cam = view.R_c.transpose() * sigma * view.R_c;
      Eigen::Matrix<double, 2, 3> J = proj_jacobian(view, g.mu_cam);
      const Mat2& dA = acc_dA[k];
      Mat3 dsigma_cam = J.transpose() * dA * J;
      Eigen::Matrix<double, 2, 3> dJ = 2.0 * dA * J * sigma_cam;

      const double z = g.mu_cam.z(), z2 = z * z, z3 = z2 * z;
      dmu_cam.x() += dJ(0, 2) * (-view.fx / z2);
      dmu_cam.y() += dJ(1, 2) * (-view.fy / z2);
      dmu_cam.z() += dJ(0, 0) * (-view.fx / z2) + dJ(1, 1) * (-view.fy / z2) +
                     dJ(0, 2) * (2.0 * view.fx * g.mu_cam.x() / z3) +
                     dJ(1, 2) * (2.0 * view.fy * g.mu_cam.y() / z3);

      Mat3 dsigma = view.R_c * dsigma_cam * view.R_c.transpose();
      build_covariance_backward(cloud.rot_raw[i], cloud.log_scale[i], dsigma, drot, dls);
    }

    dmu += view.R_c * dmu_cam;

    // opacity logit
    const double s = g.opacity;
    grads.opacity_raw[i] += acc_dsigma[k] * s * (1.0 - s);
    grads.pos[i] += dmu;
    grads.rot_raw[i] += drot;
    grads.log_scale[i] += dls;

    if (stats && !acc_dcenter[k].isZero(0.0)) {
      Vec2 ndc_grad(acc_dcenter[k].x() * 0.5 * W, acc_dcenter[k].y() * 0.5 * H);
      stats->grad2d_accum[i] += ndc_grad.norm();
      stats->observations[i] += 1;
    }
  }
}

}  // namespace dsgs
