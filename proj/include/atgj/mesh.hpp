#pragma once

#include <cstdint>
#include <vector>

#include "atgj/errors.hpp"
#include "atgj/kinetic.hpp"

namespace atgj {

enum class CellType : std::uint8_t { fluid = 0, solid = 1 };

enum class BoundaryKind { diffuse_wall, freestream, outflow, symmetry };

struct BoundaryCondition {
  BoundaryKind kind = BoundaryKind::diffuse_wall;
  double wall_T = 1.0;
  double wall_ux = 0.0, wall_uy = 0.0;  ///< tangential wall velocity (diffuse)
  Macroscopics freestream_state;        ///< freestream kind only

  static BoundaryCondition diffuse(double T, double ux = 0.0, double uy = 0.0) {
    BoundaryCondition bc;
    bc.kind = BoundaryKind::diffuse_wall;
    bc.wall_T = T;
    bc.wall_ux = ux;
    bc.wall_uy = uy;
    return bc;
  }
  static BoundaryCondition free_stream(const Macroscopics& m) {
    BoundaryCondition bc;
    bc.kind = BoundaryKind::freestream;
    bc.freestream_state = m;
    return bc;
  }
  static BoundaryCondition outflow() {
    BoundaryCondition bc;
    bc.kind = BoundaryKind::outflow;
    return bc;
  }
  static BoundaryCondition symmetry() {
    BoundaryCondition bc;
    bc.kind = BoundaryKind::symmetry;
    return bc;
  }
};

/// Uniform structured mesh with an optional solid-cell mask (embedded obstacle).
///
///        north
///      +-------+          cell (i,j), i = 0..nx-1, j = 0..ny-1
/// west |       | east     center x = x0 + (i+1/2) dx, y = y0 + (j+1/2) dy
///      +-------+
///        south
struct Mesh2D {
  int nx = 0, ny = 0;
  double dx = 0.0, dy = 0.0;
  double x0 = 0.0, y0 = 0.0;
  std::vector<CellType> mask;  ///< nx*ny, row-major j*nx + i

  BoundaryCondition west, east, south, north;
  BoundaryCondition solid_bc;  ///< applied on every exposed solid-cell face

  static Mesh2D uniform(int nx, int ny, double x0, double y0, double lx, double ly) {
    if (nx < 1 || ny < 1 || !(lx > 0.0) || !(ly > 0.0))
      throw parameter_error("Mesh2D: positive cell counts and extents required");
    Mesh2D m;
    m.nx = nx;
    m.ny = ny;
    m.x0 = x0;
    m.y0 = y0;
    m.dx = lx / nx;
    m.dy = ly / ny;
    m.mask.assign(static_cast<std::size_t>(nx) * ny, CellType::fluid);
    return m;
  }

  double xc(int i) const { return x0 + (i + 0.5) * dx; }
  double yc(int j) const { return y0 + (j + 0.5) * dy; }
  bool is_fluid(int i, int j) const {
    return mask[static_cast<std::size_t>(j) * nx + i] == CellType::fluid;
  }

  /// Mark every cell whose center falls inside [xlo,xhi] x [ylo,yhi] as solid.
  void mask_box(double xlo, double xhi, double ylo, double yhi) {
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        if (xc(i) >= xlo && xc(i) <= xhi && yc(j) >= ylo && yc(j) <= yhi)
          mask[static_cast<std::size_t>(j) * nx + i] = CellType::solid;
  }

  int fluid_count() const {
    int n = 0;
    for (auto c : mask) n += (c == CellType::fluid);
    return n;
  }

  void validate() const {
    if (fluid_count() == 0) throw parameter_error("Mesh2D: no fluid cells");
  }
};

}  // namespace atgj
