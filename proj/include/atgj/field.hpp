#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "atgj/errors.hpp"
#include "atgj/mesh.hpp"
#include "atgj/quadrature.hpp"

namespace atgj {

/// Cell-centred storage for the reduced pair (g,h) plus the conservative
/// macroscopic variables, with a one-cell ghost ring on each side.
///
/// Memory layout (documented; the checkpoint writes it verbatim):
///   dist[((gj*(nx+2) + gi) * 2 + comp) * K + k]
/// with gi = i+1, gj = j+1 for interior cell (i,j), comp 0 = g and 1 = h, and
/// k the velocity-node index in the set's own (radial-major) order.
/// macro[cid*4 + {0,1,2,3}] holds rho, rho*ux, rho*uy, rho*E.
struct DistributionField {
  int nx = 0, ny = 0, K = 0;
  std::vector<double> dist;
  std::vector<double> macro;

  DistributionField() = default;
  DistributionField(int nx_, int ny_, int K_) : nx(nx_), ny(ny_), K(K_) {
    const std::size_t cells = static_cast<std::size_t>(nx + 2) * (ny + 2);
    dist.assign(cells * 2 * K, 0.0);
    macro.assign(cells * 4, 0.0);
  }

  int cells_x() const { return nx + 2; }
  int cells_y() const { return ny + 2; }
  /// extended-grid cell id; interior cell (i,j) lives at (i+1, j+1)
  int cid(int gi, int gj) const { return gj * (nx + 2) + gi; }

  double* g(int c) { return dist.data() + static_cast<std::size_t>(c) * 2 * K; }
  double* h(int c) { return dist.data() + static_cast<std::size_t>(c) * 2 * K + K; }
  const double* g(int c) const { return dist.data() + static_cast<std::size_t>(c) * 2 * K; }
  const double* h(int c) const { return dist.data() + static_cast<std::size_t>(c) * 2 * K + K; }
  double* m(int c) { return macro.data() + static_cast<std::size_t>(c) * 4; }
  const double* m(int c) const { return macro.data() + static_cast<std::size_t>(c) * 4; }

  /// (cell, velocity node, {g,h}) accessor for interior cells
  double value(int i, int j, int k, int comp) const {
    return dist[(static_cast<std::size_t>(cid(i + 1, j + 1)) * 2 + comp) * K + k];
  }
};

/// Binary checkpoint: mesh dims, velocity-set parameters, gas parameters,
/// step index/time, and the raw field arrays in the layout documented above.
struct Checkpoint {
  static constexpr char magic[8] = {'A', 'T', 'G', 'J', 'C', 'K', 'P', '1'};

  struct Header {
    std::int32_t nx = 0, ny = 0, K = 0;
    double dx = 0, dy = 0, x0 = 0, y0 = 0;
    std::int32_t rule_kind = 0;  // 0 = ATGJ, 1 = Newton-Cotes
    std::int32_t n_radial = 0, n_theta = 0;
    double theta0 = 0, alpha = 0, lambda = 0, T0 = 0, nc_halfwidth = 0;
    double prandtl = 0, knudsen = 0, omega_v = 0, T_ref = 0, rho_ref = 0, L_ref = 0;
    std::int32_t internal_dof = 0;
    std::int64_t step = 0;
    double time = 0;
  };

  Header header;
  std::vector<std::uint8_t> mask;
  std::vector<double> dist;
  std::vector<double> macro;

  void save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw error("checkpoint: cannot open '" + path + "' for writing");
    os.write(magic, sizeof(magic));
    os.write(reinterpret_cast<const char*>(&header), sizeof(header));
    const std::uint64_t nmask = mask.size(), ndist = dist.size(), nmacro = macro.size();
    os.write(reinterpret_cast<const char*>(&nmask), sizeof(nmask));
    os.write(reinterpret_cast<const char*>(&ndist), sizeof(ndist));
    os.write(reinterpret_cast<const char*>(&nmacro), sizeof(nmacro));
    os.write(reinterpret_cast<const char*>(mask.data()), nmask);
    os.write(reinterpret_cast<const char*>(dist.data()), ndist * sizeof(double));
    os.write(reinterpret_cast<const char*>(macro.data()), nmacro * sizeof(double));
    if (!os) throw error("checkpoint: write to '" + path + "' failed");
  }

  static Checkpoint load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw error("checkpoint: cannot open '" + path + "'");
    char m[sizeof(magic)];
    is.read(m, sizeof(m));
    if (!is || std::memcmp(m, magic, sizeof(magic)) != 0)
      throw error("checkpoint: bad magic in '" + path + "'");
    Checkpoint c;
    is.read(reinterpret_cast<char*>(&c.header), sizeof(c.header));
    std::uint64_t nmask = 0, ndist = 0, nmacro = 0;
    is.read(reinterpret_cast<char*>(&nmask), sizeof(nmask));
    is.read(reinterpret_cast<char*>(&ndist), sizeof(ndist));
    is.read(reinterpret_cast<char*>(&nmacro), sizeof(nmacro));
    c.mask.resize(nmask);
    c.dist.resize(ndist);
    c.macro.resize(nmacro);
    is.read(reinterpret_cast<char*>(c.mask.data()), nmask);
    is.read(reinterpret_cast<char*>(c.dist.data()), ndist * sizeof(double));
    is.read(reinterpret_cast<char*>(c.macro.data()), nmacro * sizeof(double));
    if (!is) throw error("checkpoint: truncated file '" + path + "'");
    return c;
  }
};

}  // namespace atgj
