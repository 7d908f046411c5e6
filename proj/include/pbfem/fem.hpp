// Tensor-product compatible finite element spaces on structured quad meshes:
//
//   CG(k)  scalar, continuous Q_k                    (vorticity space V_q)
//   DG(m)  scalar, discontinuous Q_m                 (density space V_rho = DG(k-1))
//   RT(k)  velocity: x-component bidegree (k, k-1) continuous across vertical
//          facets, z-component bidegree (k-1, k) continuous across horizontal
//          facets                                    (velocity space V_u)
//   CP(k)  thermal: bidegree (k-1, k), discontinuous across vertical facets,
//          continuous across horizontal facets; nodes coincide with the RT(k)
//          z-component nodes                         (Charney-Phillips V_theta)
//
// Node placement: Gauss-Lobatto points in continuous directions, Gauss-Legendre
// points in discontinuous directions. Basis functions are the interpolatory
// (nodal) tensor Lagrange functions; RT coefficients are physical normal
// components at the nodes. Cells are affine with a constant diagonal Jacobian,
// so one reference tabulation serves every cell.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "pbfem/mesh.hpp"
#include "pbfem/quadrature.hpp"

namespace pbfem {

enum class SpaceType { CG, DG, RT, CP };

struct SpaceFamily {
  SpaceType type;
  int degree;
};

inline SpaceFamily CG(int k) { return {SpaceType::CG, k}; }
inline SpaceFamily DG(int k) { return {SpaceType::DG, k}; }
inline SpaceFamily RT(int k) { return {SpaceType::RT, k}; }
inline SpaceFamily CP(int k) { return {SpaceType::CP, k}; }

namespace detail {

// Lagrange basis through given nodes; evaluates all basis values and first
// derivatives at a point. Small fixed degree, direct product formulas.
struct Lagrange1D {
  std::vector<double> nodes;

  int size() const { return static_cast<int>(nodes.size()); }

  double value(int i, double x) const {
    double v = 1.0;
    for (int j = 0; j < size(); ++j) {
      if (j == i) continue;
      v *= (x - nodes[j]) / (nodes[i] - nodes[j]);
    }
    return v;
  }

  double deriv(int i, double x) const {
    double d = 0.0;
    for (int m = 0; m < size(); ++m) {
      if (m == i) continue;
      double term = 1.0 / (nodes[i] - nodes[m]);
      for (int j = 0; j < size(); ++j) {
        if (j == i || j == m) continue;
        term *= (x - nodes[j]) / (nodes[i] - nodes[j]);
      }
      d += term;
    }
    return d;
  }
};

inline Lagrange1D cg_line(int k) { return {gauss_lobatto_points(k + 1)}; }
inline Lagrange1D dg_line(int m) { return {gauss_legendre_1d(m + 1).pts}; }

// Per-direction global numbering for a 1D line of n cells with `nodes` local
// nodes per cell. Continuous lines share endpoint nodes (and wrap when
// periodic); discontinuous lines never share.
struct LineLayout {
  int cells = 0;
  int local = 0;        // nodes per cell
  bool continuous = false;
  bool periodic = false;

  int count() const {
    if (!continuous) return cells * local;
    const int interior = cells * (local - 1);
    return periodic ? interior : interior + 1;
  }
  int global(int cell, int node) const {
    if (!continuous) return cell * local + node;
    const int g = cell * (local - 1) + node;
    return periodic ? g % count() : g;
  }
};

}  // namespace detail

class FiniteElementSpace;
using SpacePtr = std::shared_ptr<const FiniteElementSpace>;

// Basis tabulation at a set of reference points. For scalar spaces `val`,
// `dx`, `dz` hold values and physical derivatives, laid out [point][local].
// For RT both physical components, their gradients and the divergence are
// tabulated. Row stride is the local dimension.
struct BasisTable {
  int npts = 0;
  int nloc = 0;
  std::vector<double> val, dx, dz;                    // scalar spaces
  std::vector<double> vx, vz, dvx_dx, dvx_dz, dvz_dx, dvz_dz, div;  // RT
};

class FiniteElementSpace : public std::enable_shared_from_this<FiniteElementSpace> {
 public:
  FiniteElementSpace(const Mesh& mesh, SpaceFamily family) : mesh_(mesh), family_(family) {
    const int k = family.degree;
    switch (family.type) {
      case SpaceType::CG:
        if (k < 1) throw std::invalid_argument("make_space: CG degree must be >= 1");
        lx_ = detail::cg_line(k);
        lz_ = detail::cg_line(k);
        layx_ = {mesh.nx, k + 1, true, mesh.periodic_x};
        layz_ = {mesh.nz, k + 1, true, mesh.periodic_z};
        break;
      case SpaceType::DG:
        if (k < 0) throw std::invalid_argument("make_space: DG degree must be >= 0");
        lx_ = detail::dg_line(k);
        lz_ = detail::dg_line(k);
        layx_ = {mesh.nx, k + 1, false, mesh.periodic_x};
        layz_ = {mesh.nz, k + 1, false, mesh.periodic_z};
        break;
      case SpaceType::CP:
        if (k < 1) throw std::invalid_argument("make_space: CP degree must be >= 1");
        lx_ = detail::dg_line(k - 1);
        lz_ = detail::cg_line(k);
        layx_ = {mesh.nx, k, false, mesh.periodic_x};
        layz_ = {mesh.nz, k + 1, true, mesh.periodic_z};
        break;
      case SpaceType::RT:
        if (k < 1) throw std::invalid_argument("make_space: RT degree must be >= 1");
        // x-component: (CG_k in x) x (DG_{k-1} in z)
        lx_ = detail::cg_line(k);
        lz_ = detail::dg_line(k - 1);
        layx_ = {mesh.nx, k + 1, true, mesh.periodic_x};
        layz_ = {mesh.nz, k, false, mesh.periodic_z};
        // z-component: (DG_{k-1} in x) x (CG_k in z)
        lx2_ = detail::dg_line(k - 1);
        lz2_ = detail::cg_line(k);
        layx2_ = {mesh.nx, k, false, mesh.periodic_x};
        layz2_ = {mesh.nz, k + 1, true, mesh.periodic_z};
        break;
    }
  }

  const Mesh& mesh() const { return mesh_; }
  SpaceFamily family() const { return family_; }
  bool is_vector() const { return family_.type == SpaceType::RT; }

  int component_offset_z() const { return layx_.count() * layz_.count(); }

  int ndof() const {
    int n = layx_.count() * layz_.count();
    if (is_vector()) n += layx2_.count() * layz2_.count();
    return n;
  }

  int local_dim() const {
    int n = lx_.size() * lz_.size();
    if (is_vector()) n += lx2_.size() * lz2_.size();
    return n;
  }

  // Local ordering: x-index fastest; for RT the x-component block precedes
  // the z-component block.
  void cell_dofs(int c, std::vector<int>& out) const {
    out.resize(local_dim());
    const int ix = mesh_.cell_ix(c), iz = mesh_.cell_iz(c);
    int loc = 0;
    for (int bz = 0; bz < lz_.size(); ++bz)
      for (int bx = 0; bx < lx_.size(); ++bx, ++loc)
        out[loc] = layz_.global(iz, bz) * layx_.count() + layx_.global(ix, bx);
    if (is_vector()) {
      const int off = component_offset_z();
      for (int bz = 0; bz < lz2_.size(); ++bz)
        for (int bx = 0; bx < lx2_.size(); ++bx, ++loc)
          out[loc] = off + layz2_.global(iz, bz) * layx2_.count() + layx2_.global(ix, bx);
    }
  }

  // Physical node coordinate of a local basis function on a given cell.
  // For RT, locals in the x-block are x-component nodes and so on.
  std::array<double, 2> node_point(int c, int loc) const {
    const double x0 = mesh_.cell_x0(c), z0 = mesh_.cell_z0(c);
    const int nxb = lx_.size();
    if (!is_vector() || loc < nxb * lz_.size()) {
      const int bx = loc % nxb, bz = loc / nxb;
      return {x0 + mesh_.dx * lx_.nodes[bx], z0 + mesh_.dz * lz_.nodes[bz]};
    }
    const int l2 = loc - nxb * lz_.size();
    const int bx = l2 % lx2_.size(), bz = l2 / lx2_.size();
    return {x0 + mesh_.dx * lx2_.nodes[bx], z0 + mesh_.dz * lz2_.nodes[bz]};
  }

  // 0 for x-component locals, 1 for z-component (scalar spaces always 0).
  int node_component(int loc) const {
    if (!is_vector()) return 0;
    return loc < lx_.size() * lz_.size() ? 0 : 1;
  }

  // Tabulate at arbitrary reference points (derivatives in physical coords).
  BasisTable tabulate(const std::vector<double>& rx, const std::vector<double>& rz) const {
    BasisTable t;
    t.npts = static_cast<int>(rx.size());
    t.nloc = local_dim();
    const double ax = 1.0 / mesh_.dx, az = 1.0 / mesh_.dz;
    if (!is_vector()) {
      t.val.assign(t.npts * t.nloc, 0.0);
      t.dx.assign(t.npts * t.nloc, 0.0);
      t.dz.assign(t.npts * t.nloc, 0.0);
      for (int q = 0; q < t.npts; ++q) {
        int loc = 0;
        for (int bz = 0; bz < lz_.size(); ++bz) {
          const double vz = lz_.value(bz, rz[q]), dz = lz_.deriv(bz, rz[q]);
          for (int bx = 0; bx < lx_.size(); ++bx, ++loc) {
            const double vx = lx_.value(bx, rx[q]), dx = lx_.deriv(bx, rx[q]);
            t.val[q * t.nloc + loc] = vx * vz;
            t.dx[q * t.nloc + loc] = dx * vz * ax;
            t.dz[q * t.nloc + loc] = vx * dz * az;
          }
        }
      }
      return t;
    }
    t.vx.assign(t.npts * t.nloc, 0.0);
    t.vz.assign(t.npts * t.nloc, 0.0);
    t.dvx_dx.assign(t.npts * t.nloc, 0.0);
    t.dvx_dz.assign(t.npts * t.nloc, 0.0);
    t.dvz_dx.assign(t.npts * t.nloc, 0.0);
    t.dvz_dz.assign(t.npts * t.nloc, 0.0);
    t.div.assign(t.npts * t.nloc, 0.0);
    for (int q = 0; q < t.npts; ++q) {
      int loc = 0;
      for (int bz = 0; bz < lz_.size(); ++bz) {
        const double vz = lz_.value(bz, rz[q]), dz = lz_.deriv(bz, rz[q]);
        for (int bx = 0; bx < lx_.size(); ++bx, ++loc) {
          const double vx = lx_.value(bx, rx[q]), dx = lx_.deriv(bx, rx[q]);
          const int at = q * t.nloc + loc;
          t.vx[at] = vx * vz;
          t.dvx_dx[at] = dx * vz * ax;
          t.dvx_dz[at] = vx * dz * az;
          t.div[at] = t.dvx_dx[at];
        }
      }
      for (int bz = 0; bz < lz2_.size(); ++bz) {
        const double vz = lz2_.value(bz, rz[q]), dz = lz2_.deriv(bz, rz[q]);
        for (int bx = 0; bx < lx2_.size(); ++bx, ++loc) {
          const double vx = lx2_.value(bx, rx[q]), dx = lx2_.deriv(bx, rx[q]);
          const int at = q * t.nloc + loc;
          t.vz[at] = vx * vz;
          t.dvz_dx[at] = dx * vz * ax;
          t.dvz_dz[at] = vx * dz * az;
          t.div[at] = t.dvz_dz[at];
        }
      }
    }
    return t;
  }

 private:
  Mesh mesh_;
  SpaceFamily family_;
  detail::Lagrange1D lx_, lz_;    // scalar spaces / RT x-component
  detail::Lagrange1D lx2_, lz2_;  // RT z-component
  detail::LineLayout layx_, layz_, layx2_, layz2_;
};

inline SpacePtr make_space(const Mesh& mesh, SpaceFamily family) {
  return std::make_shared<FiniteElementSpace>(mesh, family);
}

struct Field {
  SpacePtr space;
  Eigen::VectorXd coeffs;

  Field() = default;
  explicit Field(SpacePtr s) : space(std::move(s)), coeffs(Eigen::VectorXd::Zero(space->ndof())) {}
  Field(SpacePtr s, Eigen::VectorXd c) : space(std::move(s)), coeffs(std::move(c)) {
    if (coeffs.size() != space->ndof()) throw std::invalid_argument("Field: coefficient length mismatch");
  }
};

// Nodal interpolation. Scalar spaces take f(x,z); RT takes the component
// values of a vector function at its nodes.
inline Field interpolate(const SpacePtr& space, const std::function<double(double, double)>& f) {
  if (space->is_vector()) throw std::invalid_argument("interpolate: scalar functor on a vector space");
  Field out(space);
  std::vector<int> dofs;
  for (int c = 0; c < space->mesh().cell_count(); ++c) {
    space->cell_dofs(c, dofs);
    for (int loc = 0; loc < space->local_dim(); ++loc) {
      const auto p = space->node_point(c, loc);
      out.coeffs[dofs[loc]] = f(p[0], p[1]);
    }
  }
  return out;
}

inline Field interpolate_vector(const SpacePtr& space,
                                const std::function<std::array<double, 2>(double, double)>& f) {
  if (!space->is_vector()) throw std::invalid_argument("interpolate_vector: vector functor on a scalar space");
  Field out(space);
  std::vector<int> dofs;
  for (int c = 0; c < space->mesh().cell_count(); ++c) {
    space->cell_dofs(c, dofs);
    for (int loc = 0; loc < space->local_dim(); ++loc) {
      const auto p = space->node_point(c, loc);
      out.coeffs[dofs[loc]] = f(p[0], p[1])[space->node_component(loc)];
    }
  }
  return out;
}

struct EvalResult {
  std::vector<double> val;        // scalar value or vector x-component
  std::vector<double> val_z;     // vector z-component
  std::vector<double> dx, dz;    // scalar gradient
  std::vector<double> div;       // vector divergence
};

// Evaluate a field at reference points of one cell (gradients on request).
inline EvalResult evaluate_field(const Field& field, int cell, const std::vector<double>& rx,
                                 const std::vector<double>& rz, bool with_derivs = false) {
  const auto& sp = *field.space;
  if (cell < 0 || cell >= sp.mesh().cell_count()) throw std::out_of_range("evaluate_field: cell out of range");
  const BasisTable t = sp.tabulate(rx, rz);
  std::vector<int> dofs;
  sp.cell_dofs(cell, dofs);
  EvalResult r;
  const int np = t.npts, nl = t.nloc;
  if (!sp.is_vector()) {
    r.val.assign(np, 0.0);
    if (with_derivs) {
      r.dx.assign(np, 0.0);
      r.dz.assign(np, 0.0);
    }
    for (int q = 0; q < np; ++q)
      for (int i = 0; i < nl; ++i) {
        const double c = field.coeffs[dofs[i]];
        r.val[q] += c * t.val[q * nl + i];
        if (with_derivs) {
          r.dx[q] += c * t.dx[q * nl + i];
          r.dz[q] += c * t.dz[q * nl + i];
        }
      }
  } else {
    r.val.assign(np, 0.0);
    r.val_z.assign(np, 0.0);
    if (with_derivs) r.div.assign(np, 0.0);
    for (int q = 0; q < np; ++q)
      for (int i = 0; i < nl; ++i) {
        const double c = field.coeffs[dofs[i]];
        r.val[q] += c * t.vx[q * nl + i];
        r.val_z[q] += c * t.vz[q * nl + i];
        if (with_derivs) r.div[q] += c * t.div[q * nl + i];
      }
  }
  return r;
}

// Reference-coordinate trace points of a local facet, parameterised by t.
inline void facet_ref_points(int local_facet, const std::vector<double>& t, std::vector<double>& rx,
                             std::vector<double>& rz) {
  const int n = static_cast<int>(t.size());
  rx.resize(n);
  rz.resize(n);
  for (int q = 0; q < n; ++q) {
    switch (local_facet) {
      case 0: rx[q] = 0.0; rz[q] = t[q]; break;
      case 1: rx[q] = 1.0; rz[q] = t[q]; break;
      case 2: rx[q] = t[q]; rz[q] = 0.0; break;
      case 3: rx[q] = t[q]; rz[q] = 1.0; break;
      default: throw std::invalid_argument("facet_ref_points: bad local facet");
    }
  }
}

}  // namespace pbfem
