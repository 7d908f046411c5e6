// Model constants, prognostic state, Exner pressure, Hamiltonians and their
// variations for the compressible Euler vertical slice and the planar thermal
// shallow water equations.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pbfem/operators.hpp"

namespace pbfem {

enum class ModelTag { euler, thermal_swe };

struct ModelConstants {
  double g = 9.810616;    // m s^-2
  double c_v = 716.5;     // m^2 s^-2 K^-1
  double R = 287.0;       // m^2 s^-2 K^-1
  double p0 = 100.0e3;    // Pa
  double f0 = 0.0;        // Coriolis parameter, planar SWE only
  Field b;                // topography (SWE); empty field means flat

  double c_p() const { return R + c_v; }
  double kappa() const { return R / c_p(); }
  bool has_topography() const { return b.space != nullptr; }
};

struct State {
  ModelTag model = ModelTag::euler;
  Field u, rho, theta;
};

// Spaces and facet sets for one model on one mesh. The vertical slice uses
// the Charney-Phillips thermal space; the planar SWE uses V_theta = V_q.
struct Discretization {
  Mesh mesh;
  ModelTag model = ModelTag::euler;
  int degree = 2;
  SpaceCtx q, u, rho, theta;
  FacetSet gv, gh, gall;
  std::vector<int> constrained_u;  // strongly-zeroed normal DOFs (slab top/bottom)

  SupgMode supg_mode() const {
    return model == ModelTag::euler ? SupgMode::vertical_only : SupgMode::full_direction;
  }
  SupgConfig supg(double tau) const { return {tau, supg_mode()}; }

  State make_state() const {
    State z;
    z.model = model;
    z.u = Field(u.space);
    z.rho = Field(rho.space);
    z.theta = Field(theta.space);
    return z;
  }
};

inline Discretization make_discretization(const Mesh& mesh, ModelTag model, int k) {
  if (k < 1) throw std::invalid_argument("make_discretization: degree must be >= 1");
  Discretization d;
  d.mesh = mesh;
  d.model = model;
  d.degree = k;
  const int nq = k + 2;  // over-integration: cubic-in-fields bracket terms exact for k = 2
  d.q = make_space_ctx(make_space(mesh, CG(k)), nq);
  d.u = make_space_ctx(make_space(mesh, RT(k)), nq);
  d.rho = make_space_ctx(make_space(mesh, DG(k - 1)), nq);
  d.theta = make_space_ctx(make_space(mesh, model == ModelTag::euler ? CP(k) : CG(k)), nq);
  d.gv = interior_facets(mesh, FacetOrientation::vertical);
  d.gh = interior_facets(mesh, FacetOrientation::horizontal);
  d.gall = interior_facets(mesh, FacetOrientation::all_interior);
  if (!mesh.periodic_z) {
    // u. n = 0 imposed strongly: zero the z-component DOFs on top and bottom.
    std::vector<int> dofs;
    std::vector<char> seen(d.u.space->ndof(), 0);
    for (int c = 0; c < mesh.cell_count(); ++c) {
      d.u.space->cell_dofs(c, dofs);
      for (int loc = 0; loc < d.u.space->local_dim(); ++loc) {
        if (d.u.space->node_component(loc) != 1) continue;
        const double z = d.u.space->node_point(c, loc)[1];
        if (std::abs(z) < 1e-9 * mesh.Lz || std::abs(z - mesh.Lz) < 1e-9 * mesh.Lz) {
          if (!seen[dofs[loc]]) {
            seen[dofs[loc]] = 1;
            d.constrained_u.push_back(dofs[loc]);
          }
        }
      }
    }
  }
  return d;
}

inline void apply_velocity_bc(const Discretization& d, Field& u) {
  for (int i : d.constrained_u) u.coeffs[i] = 0.0;
}

// ---------------------------------------------------------------------------
// Exner pressure pi = ((R/p0) rho theta)^(kappa/(1-kappa)).

inline double exner(double rho_theta, const ModelConstants& c) {
  if (rho_theta <= 0.0) throw std::domain_error("exner: rho*theta must be positive");
  return std::pow(c.R / c.p0 * rho_theta, c.R / c.c_v);  // kappa/(1-kappa) = R/c_v
}

inline double exner_drho(double rho, double theta, const ModelConstants& c) {
  return (c.R / c.c_v) * exner(rho * theta, c) / rho;
}

inline double exner_dtheta(double rho, double theta, const ModelConstants& c) {
  return (c.R / c.c_v) * exner(rho * theta, c) / theta;
}

// ---------------------------------------------------------------------------
// State values at quadrature points, shared by the energy and variation loops.

struct StateAtQ {
  VectorAtQ u;
  ScalarAtQ rho, theta, b;
};

inline void eval_state(const Discretization& d, const State& z, const ModelConstants& c, int cell,
                       StateAtQ& out) {
  eval_vector(d.u, d.u.cell, z.u, cell, out.u, false);
  eval_scalar(d.rho, d.rho.cell, z.rho, cell, out.rho, false);
  eval_scalar(d.theta, d.theta.cell, z.theta, cell, out.theta, false);
  if (c.has_topography())
    eval_scalar(d.rho, d.rho.cell, c.b, cell, out.b, false);
  else
    out.b.v.assign(d.rho.nq(), 0.0);
}

// Energy density at one quadrature point.
inline double energy_density(ModelTag model, const ModelConstants& c, double ux, double uz, double rho,
                             double theta, double b, double zcoord) {
  const double kin = 0.5 * rho * (ux * ux + uz * uz);
  if (model == ModelTag::euler)
    return kin + c.g * rho * zcoord + c.c_v * rho * theta * exner(rho * theta, c);
  return kin + rho * theta * (0.5 * rho + b);
}

struct SubEnergies {
  double kinetic = 0.0, internal = 0.0, potential = 0.0;
  double total() const { return kinetic + internal + potential; }
};

inline SubEnergies sub_energies(const Discretization& d, const State& z, const ModelConstants& c) {
  long double kin = 0.0L, intern = 0.0L, pot = 0.0L;
  const double area = d.mesh.dx * d.mesh.dz;
  StateAtQ s;
  for (int cell = 0; cell < d.mesh.cell_count(); ++cell) {
    eval_state(d, z, c, cell, s);
    for (int q = 0; q < d.u.nq(); ++q) {
      const double w = d.u.rule.w[q] * area;
      const double speed2 = s.u.x[q] * s.u.x[q] + s.u.z[q] * s.u.z[q];
      kin += w * 0.5 * s.rho.v[q] * speed2;
      if (d.model == ModelTag::euler) {
        const double zc = qpt_xy(d.u, cell, q)[1];
        pot += w * c.g * s.rho.v[q] * zc;
        intern += w * c.c_v * s.rho.v[q] * s.theta.v[q] * exner(s.rho.v[q] * s.theta.v[q], c);
      } else {
        intern += w * s.rho.v[q] * s.theta.v[q] * (0.5 * s.rho.v[q] + s.b.v[q]);
      }
    }
  }
  return {static_cast<double>(kin), static_cast<double>(intern), static_cast<double>(pot)};
}

inline double total_energy(const Discretization& d, const State& z, const ModelConstants& c) {
  return sub_energies(d, z, c).total();
}

inline double total_mass(const Discretization& d, const State& z) {
  long double mass = 0.0L;
  const double area = d.mesh.dx * d.mesh.dz;
  ScalarAtQ rq;
  for (int cell = 0; cell < d.mesh.cell_count(); ++cell) {
    eval_scalar(d.rho, d.rho.cell, z.rho, cell, rq, false);
    for (int q = 0; q < d.rho.nq(); ++q) mass += d.rho.rule.w[q] * area * rq.v[q];
  }
  return static_cast<double>(mass);
}

// ---------------------------------------------------------------------------
// Hamiltonian variations. dH/du and dH/drho are projections; the thermal
// variation is kept as the pointwise expression T (evaluated at quadrature
// points) and fed unprojected into the SUPG-modified mass solve.

struct Variations {
  Field dHdu;                  // P_Vu(rho u)
  Field dHdrho;                // P_Vrho(...)
  std::vector<double> T_qpt;   // [cell*nq + q]
};

namespace detail {

// Accumulates the variation integrands of the state z with weight w_s.
inline void accumulate_variation_exprs(const Discretization& d, const State& z, const ModelConstants& c,
                                       double w_s, std::vector<double>& mx, std::vector<double>& mz,
                                       std::vector<double>& prho, std::vector<double>& T) {
  const int nq = d.u.nq();
  StateAtQ s;
  for (int cell = 0; cell < d.mesh.cell_count(); ++cell) {
    eval_state(d, z, c, cell, s);
    for (int q = 0; q < nq; ++q) {
      const size_t at = static_cast<size_t>(cell) * nq + q;
      mx[at] += w_s * s.rho.v[q] * s.u.x[q];
      mz[at] += w_s * s.rho.v[q] * s.u.z[q];
      const double speed2 = s.u.x[q] * s.u.x[q] + s.u.z[q] * s.u.z[q];
      if (d.model == ModelTag::euler) {
        const double pi = exner(s.rho.v[q] * s.theta.v[q], c);
        const double zc = qpt_xy(d.u, cell, q)[1];
        prho[at] += w_s * (0.5 * speed2 + c.g * zc + c.c_p() * s.theta.v[q] * pi);
        T[at] += w_s * c.c_p() * s.rho.v[q] * pi;
      } else {
        prho[at] += w_s * (0.5 * speed2 + s.theta.v[q] * (s.rho.v[q] + s.b.v[q]));
        T[at] += w_s * s.rho.v[q] * (0.5 * s.rho.v[q] + s.b.v[q]);
      }
    }
  }
}

}  // namespace detail

inline Variations variations(const Discretization& d, const State& z, const ModelConstants& c) {
  const size_t n = static_cast<size_t>(d.mesh.cell_count()) * d.u.nq();
  std::vector<double> mx(n, 0.0), mz(n, 0.0), prho(n, 0.0), T(n, 0.0);
  detail::accumulate_variation_exprs(d, z, c, 1.0, mx, mz, prho, T);
  Variations v;
  v.dHdu = l2_project_vector_qpt(d.u, mx, mz);
  v.dHdrho = l2_project_qpt(d.rho, prho);
  v.T_qpt = std::move(T);
  return v;
}

// Time-averaged variations int_0^1 dH(z_n + s (z_g - z_n)) ds by n_quad-point
// Gauss quadrature in s. Exact for the thermal SWE Hamiltonian (polynomial in
// s); the Euler internal energy average carries the quadrature error of the
// rule, fourth order by default.
inline Variations time_averaged_variations(const Discretization& d, const State& z_n, const State& z_g,
                                           const ModelConstants& c, int n_quad = 4) {
  const QuadRule1D rs = gauss_legendre_1d(n_quad);
  const size_t n = static_cast<size_t>(d.mesh.cell_count()) * d.u.nq();
  std::vector<double> mx(n, 0.0), mz(n, 0.0), prho(n, 0.0), T(n, 0.0);
  State zs = z_n;
  for (int m = 0; m < rs.size(); ++m) {
    const double s = rs.pts[m];
    zs.u.coeffs = (1.0 - s) * z_n.u.coeffs + s * z_g.u.coeffs;
    zs.rho.coeffs = (1.0 - s) * z_n.rho.coeffs + s * z_g.rho.coeffs;
    zs.theta.coeffs = (1.0 - s) * z_n.theta.coeffs + s * z_g.theta.coeffs;
    detail::accumulate_variation_exprs(d, zs, c, rs.wts[m], mx, mz, prho, T);
  }
  Variations v;
  v.dHdu = l2_project_vector_qpt(d.u, mx, mz);
  v.dHdrho = l2_project_qpt(d.rho, prho);
  v.T_qpt = std::move(T);
  return v;
}

}  // namespace pbfem
