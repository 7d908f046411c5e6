// Building blocks of the bracket discretization: tabulated space contexts,
// mass assembly, L2 projection, the SUPG contribution S and operator s, the
// thermal transport form L, velocity recovery, and diagnostic vorticities.
#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "pbfem/fem.hpp"
#include "pbfem/linalg.hpp"
#include "pbfem/mesh.hpp"
#include "pbfem/quadrature.hpp"

namespace pbfem {

// A space bundled with its quadrature tabulations (cell rule, facet traces on
// all four local facets) and the factorized plain mass matrix. All assemblies
// in one model share a single quadrature order.
struct SpaceCtx {
  SpacePtr space;
  QuadRule rule;                      // tensor cell rule
  QuadRule1D facet_rule;              // 1D facet rule
  BasisTable cell;                    // at cell rule points
  std::array<BasisTable, 4> facet;    // per local facet
  std::vector<int> dof_flat;          // cells x nloc
  int nloc = 0;
  SpMat mass;
  CachedLDLT mass_chol;

  const int* dofs(int c) const { return &dof_flat[static_cast<size_t>(c) * nloc]; }
  int nq() const { return rule.size(); }
  int nfq() const { return facet_rule.size(); }
  const Mesh& mesh() const { return space->mesh(); }
};

namespace detail {

inline SpMat assemble_mass_matrix(const SpaceCtx& st, const std::vector<double>* weight_qpt);

}  // namespace detail

inline SpaceCtx make_space_ctx(SpacePtr space, int nq) {
  SpaceCtx st;
  st.space = std::move(space);
  const QuadRule1D r1 = gauss_legendre_1d(nq);
  st.rule = tensor_rule(r1, r1);
  st.facet_rule = r1;
  st.cell = st.space->tabulate(st.rule.x, st.rule.z);
  std::vector<double> rx, rz;
  for (int lf = 0; lf < 4; ++lf) {
    facet_ref_points(lf, r1.pts, rx, rz);
    st.facet[lf] = st.space->tabulate(rx, rz);
  }
  st.nloc = st.space->local_dim();
  const int nc = st.space->mesh().cell_count();
  st.dof_flat.resize(static_cast<size_t>(nc) * st.nloc);
  std::vector<int> dofs;
  for (int c = 0; c < nc; ++c) {
    st.space->cell_dofs(c, dofs);
    std::copy(dofs.begin(), dofs.end(), st.dof_flat.begin() + static_cast<size_t>(c) * st.nloc);
  }
  st.mass = detail::assemble_mass_matrix(st, nullptr);
  st.mass_chol.factorize(st.mass);
  return st;
}

// ---------------------------------------------------------------------------
// Per-cell field evaluation buffers.

struct ScalarAtQ {
  std::vector<double> v, dx, dz;
};
struct VectorAtQ {
  std::vector<double> x, z, dxdx, dxdz, dzdx, dzdz, div;
};

inline void eval_scalar(const SpaceCtx& st, const BasisTable& t, const Field& f, int cell, ScalarAtQ& out,
                        bool derivs) {
  const int np = t.npts, nl = t.nloc;
  out.v.assign(np, 0.0);
  if (derivs) {
    out.dx.assign(np, 0.0);
    out.dz.assign(np, 0.0);
  }
  const int* d = st.dofs(cell);
  for (int q = 0; q < np; ++q) {
    const double* row = &t.val[static_cast<size_t>(q) * nl];
    double acc = 0.0;
    for (int i = 0; i < nl; ++i) acc += f.coeffs[d[i]] * row[i];
    out.v[q] = acc;
    if (derivs) {
      const double* rx = &t.dx[static_cast<size_t>(q) * nl];
      const double* rz = &t.dz[static_cast<size_t>(q) * nl];
      double ax = 0.0, az = 0.0;
      for (int i = 0; i < nl; ++i) {
        ax += f.coeffs[d[i]] * rx[i];
        az += f.coeffs[d[i]] * rz[i];
      }
      out.dx[q] = ax;
      out.dz[q] = az;
    }
  }
}

inline void eval_vector(const SpaceCtx& st, const BasisTable& t, const Field& f, int cell, VectorAtQ& out,
                        bool derivs) {
  const int np = t.npts, nl = t.nloc;
  out.x.assign(np, 0.0);
  out.z.assign(np, 0.0);
  if (derivs) {
    out.dxdx.assign(np, 0.0);
    out.dxdz.assign(np, 0.0);
    out.dzdx.assign(np, 0.0);
    out.dzdz.assign(np, 0.0);
    out.div.assign(np, 0.0);
  }
  const int* d = st.dofs(cell);
  for (int q = 0; q < np; ++q) {
    const size_t r0 = static_cast<size_t>(q) * nl;
    double vx = 0.0, vz = 0.0, axx = 0.0, axz = 0.0, azx = 0.0, azz = 0.0;
    for (int i = 0; i < nl; ++i) {
      const double c = f.coeffs[d[i]];
      vx += c * t.vx[r0 + i];
      vz += c * t.vz[r0 + i];
      if (derivs) {
        axx += c * t.dvx_dx[r0 + i];
        axz += c * t.dvx_dz[r0 + i];
        azx += c * t.dvz_dx[r0 + i];
        azz += c * t.dvz_dz[r0 + i];
      }
    }
    out.x[q] = vx;
    out.z[q] = vz;
    if (derivs) {
      out.dxdx[q] = axx;
      out.dxdz[q] = axz;
      out.dzdx[q] = azx;
      out.dzdz[q] = azz;
      out.div[q] = axx + azz;
    }
  }
}

// ---------------------------------------------------------------------------
// Mass matrices and L2 projection.

namespace detail {

inline SpMat assemble_mass_matrix(const SpaceCtx& st, const std::vector<double>* weight_qpt) {
  const Mesh& m = st.mesh();
  const int n = st.space->ndof();
  MatrixBuilder b(n, n);
  const double area = m.dx * m.dz;
  const int nq = st.nq(), nl = st.nloc;
  const bool vec = st.space->is_vector();
  for (int c = 0; c < m.cell_count(); ++c) {
    const int* d = st.dofs(c);
    for (int q = 0; q < nq; ++q) {
      const size_t r0 = static_cast<size_t>(q) * nl;
      double w = st.rule.w[q] * area;
      if (weight_qpt) w *= (*weight_qpt)[static_cast<size_t>(c) * nq + q];
      for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nl; ++j) {
          const double vij = vec ? st.cell.vx[r0 + i] * st.cell.vx[r0 + j] + st.cell.vz[r0 + i] * st.cell.vz[r0 + j]
                                 : st.cell.val[r0 + i] * st.cell.val[r0 + j];
          if (vij != 0.0) b.add(d[i], d[j], w * vij);
        }
    }
  }
  return b.finalize();
}

}  // namespace detail

inline SpMat assemble_mass(const SpaceCtx& st) { return detail::assemble_mass_matrix(st, nullptr); }

// weight_qpt laid out [cell * nq + q]; must be positive for SPD solves.
inline SpMat assemble_weighted_mass(const SpaceCtx& st, const std::vector<double>& weight_qpt) {
  return detail::assemble_mass_matrix(st, &weight_qpt);
}

// Physical coordinates of a cell-rule quadrature point.
inline std::array<double, 2> qpt_xy(const SpaceCtx& st, int cell, int q) {
  const Mesh& m = st.mesh();
  return {m.cell_x0(cell) + m.dx * st.rule.x[q], m.cell_z0(cell) + m.dz * st.rule.z[q]};
}

inline Field l2_project(const SpaceCtx& st, const std::function<double(double, double)>& f) {
  if (st.space->is_vector()) throw std::invalid_argument("l2_project: scalar expression on vector space");
  const Mesh& m = st.mesh();
  Vec rhs = Vec::Zero(st.space->ndof());
  const double area = m.dx * m.dz;
  const int nq = st.nq(), nl = st.nloc;
  for (int c = 0; c < m.cell_count(); ++c) {
    const int* d = st.dofs(c);
    for (int q = 0; q < nq; ++q) {
      const auto xy = qpt_xy(st, c, q);
      const double w = st.rule.w[q] * area * f(xy[0], xy[1]);
      const double* row = &st.cell.val[static_cast<size_t>(q) * nl];
      for (int i = 0; i < nl; ++i) rhs[d[i]] += w * row[i];
    }
  }
  return Field(st.space, st.mass_chol.solve(rhs));
}

// Projection from values already sampled at the cell-rule points.
inline Field l2_project_qpt(const SpaceCtx& st, const std::vector<double>& values) {
  const Mesh& m = st.mesh();
  Vec rhs = Vec::Zero(st.space->ndof());
  const double area = m.dx * m.dz;
  const int nq = st.nq(), nl = st.nloc;
  for (int c = 0; c < m.cell_count(); ++c) {
    const int* d = st.dofs(c);
    for (int q = 0; q < nq; ++q) {
      const double w = st.rule.w[q] * area * values[static_cast<size_t>(c) * nq + q];
      const double* row = &st.cell.val[static_cast<size_t>(q) * nl];
      for (int i = 0; i < nl; ++i) rhs[d[i]] += w * row[i];
    }
  }
  return Field(st.space, st.mass_chol.solve(rhs));
}

inline Field l2_project_vector_qpt(const SpaceCtx& st, const std::vector<double>& vx,
                                   const std::vector<double>& vz) {
  if (!st.space->is_vector()) throw std::invalid_argument("l2_project_vector_qpt: needs a vector space");
  const Mesh& m = st.mesh();
  Vec rhs = Vec::Zero(st.space->ndof());
  const double area = m.dx * m.dz;
  const int nq = st.nq(), nl = st.nloc;
  for (int c = 0; c < m.cell_count(); ++c) {
    const int* d = st.dofs(c);
    for (int q = 0; q < nq; ++q) {
      const size_t r0 = static_cast<size_t>(q) * nl;
      const double wx = st.rule.w[q] * area * vx[static_cast<size_t>(c) * nq + q];
      const double wz = st.rule.w[q] * area * vz[static_cast<size_t>(c) * nq + q];
      for (int i = 0; i < nl; ++i) rhs[d[i]] += wx * st.cell.vx[r0 + i] + wz * st.cell.vz[r0 + i];
    }
  }
  return Field(st.space, st.mass_chol.solve(rhs));
}

// ---------------------------------------------------------------------------
// SUPG machinery.

enum class SupgMode { full_direction, vertical_only };

struct SupgConfig {
  double tau = 0.0;
  SupgMode mode = SupgMode::full_direction;
};

inline SupgMode supg_mode_for(const SpacePtr& theta_space) {
  switch (theta_space->family().type) {
    case SpaceType::CG: return SupgMode::full_direction;
    case SpaceType::CP: return SupgMode::vertical_only;
    default: throw std::invalid_argument("supg_mode_for: thermal space must be CG or CP");
  }
}

inline void check_supg_mode(const SupgConfig& cfg, const SpacePtr& theta_space) {
  if (cfg.mode != supg_mode_for(theta_space))
    throw std::invalid_argument("SUPG mode does not match the thermal space family");
}

// S(u; gamma) at a point from the velocity value and the gamma gradient.
inline double supg_S_point(SupgMode mode, double ux, double uz, double gx, double gz) {
  return mode == SupgMode::full_direction ? ux * gx + uz * gz : uz * gz;
}

// S(u; gamma) sampled at all cell quadrature points, [cell*nq + q].
inline std::vector<double> supg_S(const SpaceCtx& uctx, const SpaceCtx& thctx, const Field& u,
                                  const Field& gamma, const SupgConfig& cfg) {
  check_supg_mode(cfg, thctx.space);
  const Mesh& m = uctx.mesh();
  const int nq = uctx.nq();
  std::vector<double> out(static_cast<size_t>(m.cell_count()) * nq);
  VectorAtQ uq;
  ScalarAtQ gq;
  for (int c = 0; c < m.cell_count(); ++c) {
    eval_vector(uctx, uctx.cell, u, c, uq, false);
    eval_scalar(thctx, thctx.cell, gamma, c, gq, true);
    for (int q = 0; q < nq; ++q)
      out[static_cast<size_t>(c) * nq + q] = supg_S_point(cfg.mode, uq.x[q], uq.z[q], gq.dx[q], gq.dz[q]);
  }
  return out;
}

struct SupgMass {
  SpMat mat;            // (M_s)_ij = <gamma_j + tau S(u; gamma_j), gamma_i>
  double c1_measured = 0.0;  // sup-norm sample of div u (CG) or dz u_z (CP)
  bool coercivity_warning = false;
};

inline SupgMass assemble_supg_mass(double tau, const SpaceCtx& uctx, const Field& u, const SpaceCtx& thctx,
                                   const SupgConfig& cfg) {
  check_supg_mode(cfg, thctx.space);
  if (tau < 0.0) throw std::invalid_argument("assemble_supg_mass: tau must be >= 0");
  const Mesh& m = thctx.mesh();
  const int n = thctx.space->ndof();
  MatrixBuilder b(n, n);
  const double area = m.dx * m.dz;
  const int nq = thctx.nq(), nl = thctx.nloc;
  VectorAtQ uq;
  double c1 = 0.0;
  for (int c = 0; c < m.cell_count(); ++c) {
    eval_vector(uctx, uctx.cell, u, c, uq, true);
    const int* d = thctx.dofs(c);
    for (int q = 0; q < nq; ++q) {
      const size_t r0 = static_cast<size_t>(q) * nl;
      const double w = thctx.rule.w[q] * area;
      c1 = std::max(c1, std::abs(cfg.mode == SupgMode::full_direction ? uq.div[q] : uq.dzdz[q]));
      for (int j = 0; j < nl; ++j) {
        const double trial = thctx.cell.val[r0 + j] +
                             tau * supg_S_point(cfg.mode, uq.x[q], uq.z[q], thctx.cell.dx[r0 + j],
                                                thctx.cell.dz[r0 + j]);
        if (trial == 0.0) continue;
        for (int i = 0; i < nl; ++i) {
          const double v = thctx.cell.val[r0 + i];
          if (v != 0.0) b.add(d[i], d[j], w * trial * v);
        }
      }
    }
  }
  SupgMass out;
  out.mat = b.finalize();
  out.c1_measured = c1;
  out.coercivity_warning = (c1 * tau / 2.0 >= 1.0);
  return out;
}

// Factorized SUPG-modified mass operator. solve() returns s with
// <s + tau S(u; s), sigma> = rhs(sigma) for all sigma; solve_transpose()
// applies the inverse of the adjoint, used to assemble thermal residual rows.
class SupgOperator {
 public:
  void assemble(double tau, const SpaceCtx& uctx, const Field& u, const SpaceCtx& thctx,
                const SupgConfig& cfg) {
    ms_ = assemble_supg_mass(tau, uctx, u, thctx, cfg);
    try {
      lu_.factorize(ms_.mat);
    } catch (const std::runtime_error&) {
      throw std::runtime_error(
          "SUPG operator: modified mass matrix is numerically singular; coercivity requires tau <= 2/c1 "
          "(measured c1 = " + std::to_string(ms_.c1_measured) + "), try a smaller tau");
    }
  }
  const SupgMass& mass() const { return ms_; }
  Vec solve(const Vec& rhs) const { return lu_.solve(rhs); }
  Vec solve_transpose(const Vec& rhs) const { return lu_.solve_transpose(rhs); }

 private:
  SupgMass ms_;
  CachedLU lu_;
};

// s(tau, u; gamma) for gamma a field in the thermal space.
inline Field solve_supg_operator(double tau, const SpaceCtx& uctx, const Field& u, const SpaceCtx& thctx,
                                 const Field& gamma, const SupgConfig& cfg) {
  SupgOperator op;
  op.assemble(tau, uctx, u, thctx, cfg);
  return Field(thctx.space, op.solve(thctx.mass * gamma.coeffs));
}

// ---------------------------------------------------------------------------
// Upwind traces and the transport form L.
//
// Facet convention (see mesh.hpp): the stored n_plus points from (-) to (+),
// so flow out of the (+) cell has a . n_plus < 0 and the upwind trace is the
// (+) value. Equivalently, with the outward normal of the (+) side
// n_out = -n_plus, the upwind side is (+) when a . n_out > 0; ties take (-).

inline double upwind_select(double a_dot_nout_plus, double value_plus, double value_minus) {
  return a_dot_nout_plus > 0.0 ? value_plus : value_minus;
}

// The discrete thermal transport expression
//   L(a, theta; sigma) = <sigma, a . grad theta>                  (CG branch)
//   L(a, theta; sigma) = <sigma, a . grad theta>_cellwise
//       + sum_{vertical facets} ([[a sigma]] theta~ - [[a sigma theta]])   (CP branch)
// with a = u_adv / rho_divisor (pointwise) when a divisor is given. The
// upwind trace theta~ is selected by the sign of selector . n; the selector
// defaults to u_adv (its normal component is single-valued, so the choice is
// independent of the two-sided divisor).
//
// sigma is sigma_field + tau S(u_upw; sigma_field) when u_upw is non-null.
inline double transport_L(const SpaceCtx& uctx, const SpaceCtx& thctx, const Field& u_adv,
                          const Field* rho_divisor, const SpaceCtx* rhoctx, const Field& theta,
                          const Field& sigma_field, double tau, const Field* u_upw,
                          const SupgConfig& cfg, const FacetSet& vertical_facets,
                          const Field* selector = nullptr) {
  check_supg_mode(cfg, thctx.space);
  const Mesh& m = uctx.mesh();
  const double area = m.dx * m.dz;
  const int nq = uctx.nq();
  VectorAtQ aq, upq;
  ScalarAtQ thq, sgq, rhq;
  double acc = 0.0;
  for (int c = 0; c < m.cell_count(); ++c) {
    eval_vector(uctx, uctx.cell, u_adv, c, aq, false);
    eval_scalar(thctx, thctx.cell, theta, c, thq, true);
    eval_scalar(thctx, thctx.cell, sigma_field, c, sgq, u_upw != nullptr);
    if (u_upw) eval_vector(uctx, uctx.cell, *u_upw, c, upq, false);
    if (rho_divisor) eval_scalar(*rhoctx, rhoctx->cell, *rho_divisor, c, rhq, false);
    for (int q = 0; q < nq; ++q) {
      double sig = sgq.v[q];
      if (u_upw) sig += tau * supg_S_point(cfg.mode, upq.x[q], upq.z[q], sgq.dx[q], sgq.dz[q]);
      double ax = aq.x[q], az = aq.z[q];
      if (rho_divisor) {
        ax /= rhq.v[q];
        az /= rhq.v[q];
      }
      acc += uctx.rule.w[q] * area * sig * (ax * thq.dx[q] + az * thq.dz[q]);
    }
  }
  if (thctx.space->family().type != SpaceType::CP) return acc;

  // CP branch: vertical-facet upwind terms.
  const int nfq = uctx.nfq();
  std::vector<double> t = uctx.facet_rule.pts;
  ScalarAtQ th_p, th_m, sg_p, sg_m, rh_p, rh_m;
  VectorAtQ a_p, a_m, up_p, up_m, sel_p;
  const Field& sel = selector ? *selector : u_adv;
  for (const auto& f : vertical_facets.facets) {
    if (f.axis != 0) continue;
    const double nox = -f.n_plus[0];  // outward normal of (+), x-component
    auto eval_side = [&](int cell, int lf, ScalarAtQ& th, ScalarAtQ& sg, ScalarAtQ& rh, VectorAtQ& a,
                         VectorAtQ& up) {
      eval_scalar(thctx, thctx.facet[lf], theta, cell, th, false);
      eval_scalar(thctx, thctx.facet[lf], sigma_field, cell, sg, u_upw != nullptr);
      if (rho_divisor) eval_scalar(*rhoctx, rhoctx->facet[lf], *rho_divisor, cell, rh, false);
      eval_vector(uctx, uctx.facet[lf], u_adv, cell, a, false);
      if (u_upw) eval_vector(uctx, uctx.facet[lf], *u_upw, cell, up, false);
    };
    eval_side(f.cell_p, f.local_p, th_p, sg_p, rh_p, a_p, up_p);
    eval_side(f.cell_m, f.local_m, th_m, sg_m, rh_m, a_m, up_m);
    eval_vector(uctx, uctx.facet[f.local_p], sel, f.cell_p, sel_p, false);
    for (int q = 0; q < nfq; ++q) {
      const double w = uctx.facet_rule.wts[q] * f.length;
      double sigp = sg_p.v[q], sigm = sg_m.v[q];
      if (u_upw) {
        sigp += tau * supg_S_point(cfg.mode, up_p.x[q], up_p.z[q], sg_p.dx[q], sg_p.dz[q]);
        sigm += tau * supg_S_point(cfg.mode, up_m.x[q], up_m.z[q], sg_m.dx[q], sg_m.dz[q]);
      }
      // a sigma . n_out per side (divisor is two-sided).
      double fp = a_p.x[q] * nox * sigp;
      double fm = a_m.x[q] * (-nox) * sigm;
      if (rho_divisor) {
        fp /= rh_p.v[q];
        fm /= rh_m.v[q];
      }
      const double sel_n = sel_p.x[q] * nox;  // normal component is single-valued
      const double th_up = upwind_select(sel_n, th_p.v[q], th_m.v[q]);
      acc += w * (fp * (th_up - th_p.v[q]) + fm * (th_up - th_m.v[q]));
    }
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Velocity recovery U(rho, m): <rho v, U> = <v, m> for all v in V_u.

inline Field velocity_recovery(const SpaceCtx& uctx, const SpaceCtx& rhoctx, const Field& rho,
                               const Field& m) {
  const Mesh& msh = uctx.mesh();
  const int nq = uctx.nq();
  std::vector<double> w(static_cast<size_t>(msh.cell_count()) * nq);
  ScalarAtQ rq;
  double rmin = std::numeric_limits<double>::max();
  for (int c = 0; c < msh.cell_count(); ++c) {
    eval_scalar(rhoctx, rhoctx.cell, rho, c, rq, false);
    for (int q = 0; q < nq; ++q) {
      w[static_cast<size_t>(c) * nq + q] = rq.v[q];
      rmin = std::min(rmin, rq.v[q]);
    }
  }
  if (rmin <= 0.0)
    throw std::invalid_argument("velocity_recovery: rho changes sign or vanishes (min sampled value " +
                                std::to_string(rmin) + ")");
  const SpMat a = assemble_weighted_mass(uctx, w);
  CachedLDLT chol;
  chol.factorize(a);
  return Field(uctx.space, chol.solve(uctx.mass * m.coeffs));
}

// ---------------------------------------------------------------------------
// Diagnostic vorticities in V_q.
//
//   <eta, q rho> = -<grad-perp eta, u> + <<eta, n-perp . u>>_boundary + <eta, f>
//   <eta, omega> = -<grad-perp eta, u> + <<eta, n-perp . u>>_boundary

namespace detail {

inline Vec vorticity_rhs(const SpaceCtx& qctx, const SpaceCtx& uctx, const Field& u,
                         const std::function<double(double, double)>* coriolis) {
  const Mesh& m = qctx.mesh();
  Vec rhs = Vec::Zero(qctx.space->ndof());
  const double area = m.dx * m.dz;
  const int nq = qctx.nq(), nl = qctx.nloc;
  VectorAtQ uq;
  for (int c = 0; c < m.cell_count(); ++c) {
    eval_vector(uctx, uctx.cell, u, c, uq, false);
    const int* d = qctx.dofs(c);
    for (int q = 0; q < nq; ++q) {
      const size_t r0 = static_cast<size_t>(q) * nl;
      const double w = qctx.rule.w[q] * area;
      double fq = 0.0;
      if (coriolis) {
        const auto xy = qpt_xy(qctx, c, q);
        fq = (*coriolis)(xy[0], xy[1]);
      }
      for (int i = 0; i < nl; ++i) {
        // grad-perp eta = (-d eta/dz, d eta/dx)
        const double gp = -qctx.cell.dz[r0 + i] * uq.x[q] + qctx.cell.dx[r0 + i] * uq.z[q];
        rhs[d[i]] += w * (-gp + fq * qctx.cell.val[r0 + i]);
      }
    }
  }
  // Boundary term on slab top/bottom: n-perp = (-n_z, n_x) so n-perp . u = -n_z u_x.
  if (!m.periodic_z) {
    const FacetSet bnd = boundary_facets(m);
    const int nfq = qctx.nfq();
    ScalarAtQ etaq;
    VectorAtQ ub;
    for (const auto& f : bnd.facets) {
      eval_vector(uctx, uctx.facet[f.local_p], u, f.cell_p, ub, false);
      const int* d = qctx.dofs(f.cell_p);
      const BasisTable& tb = qctx.facet[f.local_p];
      for (int q = 0; q < nfq; ++q) {
        const double w = qctx.facet_rule.wts[q] * f.length;
        const double nperp_u = -f.n_plus[1] * ub.x[q];
        const size_t r0 = static_cast<size_t>(q) * nl;
        for (int i = 0; i < nl; ++i) rhs[d[i]] += w * nperp_u * tb.val[r0 + i];
      }
    }
  }
  return rhs;
}

}  // namespace detail

inline Field diagnostic_vorticity(const SpaceCtx& qctx, const SpaceCtx& uctx, const SpaceCtx& rhoctx,
                                  const Field& u, const Field& rho,
                                  const std::function<double(double, double)>& coriolis) {
  const Mesh& m = qctx.mesh();
  const int nq = qctx.nq();
  std::vector<double> w(static_cast<size_t>(m.cell_count()) * nq);
  ScalarAtQ rq;
  for (int c = 0; c < m.cell_count(); ++c) {
    eval_scalar(rhoctx, rhoctx.cell, rho, c, rq, false);
    for (int q = 0; q < nq; ++q) w[static_cast<size_t>(c) * nq + q] = rq.v[q];
  }
  const SpMat a = assemble_weighted_mass(qctx, w);
  CachedLDLT chol;
  chol.factorize(a);
  return Field(qctx.space, chol.solve(detail::vorticity_rhs(qctx, uctx, u, &coriolis)));
}

inline Field relative_vorticity(const SpaceCtx& qctx, const SpaceCtx& uctx, const Field& u) {
  return Field(qctx.space, qctx.mass_chol.solve(detail::vorticity_rhs(qctx, uctx, u, nullptr)));
}

}  // namespace pbfem
