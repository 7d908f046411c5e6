// Structured rectangular meshes, periodic in x and optionally in z, with
// oriented interior facet sets.
//
// Cells are axis-aligned rectangles of identical size dx * dz, indexed
// c = iz*nx + ix. Local facet ids: 0 = left (x=0), 1 = right (x=1),
// 2 = bottom (z=0), 3 = top (z=1) in reference coordinates.
//
// Facet orientation convention: each interior facet stores its two sides
// as (+) and (-), with the lower cell index always labelled (+). The stored
// normal n_plus points from the (-) cell towards the (+) cell, so that the
// upwind trace of a field is the (+) value whenever u . n_plus < 0 (flow
// leaving the (+) cell). Outward normals per side follow as
// out(+) = -n_plus, out(-) = +n_plus.
#pragma once

#include <array>
#include <stdexcept>
#include <vector>

namespace pbfem {

struct Mesh {
  int nx = 0, nz = 0;
  double Lx = 0.0, Lz = 0.0;
  bool periodic_x = true;
  bool periodic_z = false;
  double dx = 0.0, dz = 0.0;

  int cell_count() const { return nx * nz; }
  int cell_index(int ix, int iz) const {
    ix = (ix % nx + nx) % nx;
    if (periodic_z) iz = (iz % nz + nz) % nz;
    return iz * nx + ix;
  }
  int cell_ix(int c) const { return c % nx; }
  int cell_iz(int c) const { return c / nx; }
  double cell_x0(int c) const { return cell_ix(c) * dx; }
  double cell_z0(int c) const { return cell_iz(c) * dz; }
  double measure() const { return Lx * Lz; }
};

inline Mesh build_mesh(int nx, int nz, double Lx, double Lz, bool periodic_z) {
  if (nx < 2 || nz < 2)
    throw std::invalid_argument("build_mesh: nx and nz must be >= 2 (periodic wrap would self-identify facets)");
  if (Lx <= 0.0 || Lz <= 0.0) throw std::invalid_argument("build_mesh: extents must be positive");
  Mesh m;
  m.nx = nx;
  m.nz = nz;
  m.Lx = Lx;
  m.Lz = Lz;
  m.periodic_x = true;
  m.periodic_z = periodic_z;
  m.dx = Lx / nx;
  m.dz = Lz / nz;
  return m;
}

enum class FacetOrientation { vertical, horizontal, all_interior, boundary };

struct Facet {
  int cell_p = -1, cell_m = -1;       // (+) has the lower cell index
  int local_p = -1, local_m = -1;     // local facet id on each side
  std::array<double, 2> n_plus{};     // unit normal pointing (-) -> (+)
  int axis = 0;                       // 0: vertical facet (normal +-x), 1: horizontal
  double length = 0.0;
};

struct FacetSet {
  FacetOrientation orientation = FacetOrientation::all_interior;
  std::vector<Facet> facets;
  int size() const { return static_cast<int>(facets.size()); }
};

namespace detail {

inline void append_vertical_facets(const Mesh& m, std::vector<Facet>& out) {
  // Facet between (ix, iz) and (ix+1 mod nx, iz); periodic_x always true.
  for (int iz = 0; iz < m.nz; ++iz)
    for (int ix = 0; ix < m.nx; ++ix) {
      const int cl = m.cell_index(ix, iz);
      const int cr = m.cell_index(ix + 1, iz);
      Facet f;
      f.axis = 0;
      f.length = m.dz;
      if (cl < cr) {
        f.cell_p = cl; f.local_p = 1;   // right edge of (+)
        f.cell_m = cr; f.local_m = 0;
        f.n_plus = {-1.0, 0.0};         // points from (-) into (+) = -x
      } else {
        f.cell_p = cr; f.local_p = 0;   // wrap: (+) is the ix = 0 cell
        f.cell_m = cl; f.local_m = 1;
        f.n_plus = {1.0, 0.0};
      }
      out.push_back(f);
    }
}

inline void append_horizontal_facets(const Mesh& m, std::vector<Facet>& out) {
  const int top = m.periodic_z ? m.nz : m.nz - 1;
  for (int iz = 0; iz < top; ++iz)
    for (int ix = 0; ix < m.nx; ++ix) {
      const int cb = m.cell_index(ix, iz);
      const int ct = m.cell_index(ix, iz + 1);
      Facet f;
      f.axis = 1;
      f.length = m.dx;
      if (cb < ct) {
        f.cell_p = cb; f.local_p = 3;
        f.cell_m = ct; f.local_m = 2;
        f.n_plus = {0.0, -1.0};
      } else {
        f.cell_p = ct; f.local_p = 2;   // z-wrap
        f.cell_m = cb; f.local_m = 3;
        f.n_plus = {0.0, 1.0};
      }
      out.push_back(f);
    }
}

}  // namespace detail

inline FacetSet interior_facets(const Mesh& m, FacetOrientation orientation) {
  FacetSet fs;
  fs.orientation = orientation;
  switch (orientation) {
    case FacetOrientation::vertical:
      detail::append_vertical_facets(m, fs.facets);
      break;
    case FacetOrientation::horizontal:
      detail::append_horizontal_facets(m, fs.facets);
      break;
    case FacetOrientation::all_interior:
      detail::append_vertical_facets(m, fs.facets);
      detail::append_horizontal_facets(m, fs.facets);
      break;
    case FacetOrientation::boundary:
      throw std::invalid_argument("interior_facets: use boundary_facets for the boundary set");
  }
  return fs;
}

// Boundary facets exist only on the top/bottom of a slab (periodic_z=false).
// cell_p holds the adjacent cell; n_plus is the outward domain normal.
inline FacetSet boundary_facets(const Mesh& m) {
  FacetSet fs;
  fs.orientation = FacetOrientation::boundary;
  if (m.periodic_z) return fs;
  for (int ix = 0; ix < m.nx; ++ix) {
    Facet fb;
    fb.axis = 1;
    fb.length = m.dx;
    fb.cell_p = m.cell_index(ix, 0);
    fb.local_p = 2;
    fb.n_plus = {0.0, -1.0};
    fs.facets.push_back(fb);
    Facet ft;
    ft.axis = 1;
    ft.length = m.dx;
    ft.cell_p = m.cell_index(ix, m.nz - 1);
    ft.local_p = 3;
    ft.n_plus = {0.0, 1.0};
    fs.facets.push_back(ft);
  }
  return fs;
}

struct CellGeometry {
  std::array<double, 2> origin{};
  std::array<std::array<double, 2>, 2> jacobian{};
  double measure = 0.0;
};

inline CellGeometry cell_geometry(const Mesh& m, int cell) {
  if (cell < 0 || cell >= m.cell_count()) throw std::out_of_range("cell_geometry: cell index out of range");
  CellGeometry g;
  g.origin = {m.cell_x0(cell), m.cell_z0(cell)};
  g.jacobian = {{{m.dx, 0.0}, {0.0, m.dz}}};
  g.measure = m.dx * m.dz;
  return g;
}

}  // namespace pbfem
