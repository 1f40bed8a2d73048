#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nlsurf/errors.hpp"

namespace nlsurf {

enum class Boundary { Free, Periodic };

/// Nearest-neighbour bond. `origin` is the site the +e_direction step starts from;
/// for a wrap-around bond this is the site on the upper face.
struct Bond {
  std::size_t index = 0;
  std::uint32_t site_a = 0;
  std::uint32_t site_b = 0;
  int direction = 0;
  std::uint32_t origin = 0;
  bool wraps = false;
};

struct LatticeOptions {
  // Periodic side 2 produces two distinct bonds between each neighbouring pair.
  // Off by default; surface terms on the L = 2 torus need it.
  bool allow_double_bonds = false;
};

/// d-dimensional hypercubic box or torus. Sites are row-major (first coordinate slowest),
/// bonds are ordered by (direction, origin site).
class LatticeSpec {
 public:
  int dim = 0;
  int side = 0;
  Boundary boundary = Boundary::Free;
  std::size_t n_sites = 0;
  std::vector<Bond> bonds;

  std::size_t n_bonds() const { return bonds.size(); }
  std::vector<int> coords(std::size_t site) const;
  std::size_t site_at(const std::vector<int>& c) const;
  /// Bond whose origin is `site` and which points along `direction`; -1 if absent.
  std::ptrdiff_t bond_from(std::size_t site, int direction) const;

 private:
  friend LatticeSpec build_lattice(int, int, Boundary, LatticeOptions);
  std::vector<std::ptrdiff_t> bond_lookup_;
};

LatticeSpec build_lattice(int dim, int side, Boundary boundary, LatticeOptions options = {});

enum class CorridorKind { Midplanes, TorusCut, TilingInterfaces };

struct Corridor {
  std::vector<std::size_t> bond_indices;  // sorted, into the owning lattice
  CorridorKind kind = CorridorKind::Midplanes;

  std::size_t cardinality() const { return bond_indices.size(); }
  bool contains(std::size_t bond) const;
};

/// A free box of side `side` sitting inside a parent lattice at integer offset.
struct SubBox {
  LatticeSpec lattice;
  std::vector<int> offset;
  std::vector<std::size_t> site_map;  // local site -> parent site
  std::vector<std::size_t> bond_map;  // local bond -> parent bond
};

struct Decomposition {
  std::vector<SubBox> sub_boxes;
  Corridor corridor;
};

/// Split a free box of side 2L into its 2^d sub-boxes of side L.
Decomposition decompose_box(const LatticeSpec& lattice);

/// All wrap-around bonds of a torus.
Corridor torus_cut(const LatticeSpec& lattice);

/// Torus with its standard cut removed, as a free box on the same sites.
struct UnfoldedTorus {
  LatticeSpec box;
  std::vector<std::size_t> bond_map;  // box bond -> torus bond
  Corridor cut;
};
UnfoldedTorus unfold_torus(const LatticeSpec& torus);

struct TiledTorus {
  LatticeSpec torus;
  Decomposition tiles;
};

/// Torus of side kL tiled by k^d free boxes of side L.
TiledTorus tiling_interfaces(int dim, int L, int k);

/// Map each bond of `inner` (a box or torus of side <= parent side) to the parent bond with
/// the same origin coordinates (shifted by `offset`) and direction. Throws when a bond has
/// no counterpart.
std::vector<std::size_t> embed_bonds(const LatticeSpec& parent, const LatticeSpec& inner,
                                     const std::vector<int>& offset);

}  // namespace nlsurf
