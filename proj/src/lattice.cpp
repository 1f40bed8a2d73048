#include "nlsurf/lattice.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace nlsurf {

std::vector<int> LatticeSpec::coords(std::size_t site) const {
  std::vector<int> c(static_cast<std::size_t>(dim));
  for (int mu = dim - 1; mu >= 0; --mu) {
    c[static_cast<std::size_t>(mu)] = static_cast<int>(site % static_cast<std::size_t>(side));
    site /= static_cast<std::size_t>(side);
  }
  return c;
}

std::size_t LatticeSpec::site_at(const std::vector<int>& c) const {
  std::size_t s = 0;
  for (int mu = 0; mu < dim; ++mu) {
    s = s * static_cast<std::size_t>(side) + static_cast<std::size_t>(c[static_cast<std::size_t>(mu)]);
  }
  return s;
}

std::ptrdiff_t LatticeSpec::bond_from(std::size_t site, int direction) const {
  if (site >= n_sites || direction < 0 || direction >= dim) return -1;
  return bond_lookup_[static_cast<std::size_t>(direction) * n_sites + site];
}

LatticeSpec build_lattice(int dim, int side, Boundary boundary, LatticeOptions options) {
  if (dim < 1) throw InvalidArgument("build_lattice: dim must be >= 1");
  const int min_side =
      boundary == Boundary::Free ? 2 : (options.allow_double_bonds ? 2 : 3);
  if (side < min_side) {
    throw InvalidArgument("build_lattice: side " + std::to_string(side) + " below minimum " +
                          std::to_string(min_side) +
                          (boundary == Boundary::Periodic ? " for periodic boundaries" : ""));
  }

  // Both the site count and dim * side^dim must fit the 32-bit site index.
  constexpr std::uint64_t limit = std::numeric_limits<std::uint32_t>::max();
  std::uint64_t n = 1;
  for (int i = 0; i < dim; ++i) {
    n *= static_cast<std::uint64_t>(side);
    if (n > limit) throw InvalidArgument("build_lattice: site count overflows index range");
  }
  if (n * static_cast<std::uint64_t>(dim) > limit) {
    throw InvalidArgument("build_lattice: bond count overflows index range");
  }

  LatticeSpec lat;
  lat.dim = dim;
  lat.side = side;
  lat.boundary = boundary;
  lat.n_sites = static_cast<std::size_t>(n);
  lat.bond_lookup_.assign(static_cast<std::size_t>(dim) * lat.n_sites, -1);

  std::size_t stride = lat.n_sites;
  for (int mu = 0; mu < dim; ++mu) {
    stride /= static_cast<std::size_t>(side);  // distance between sites along mu
    for (std::size_t s = 0; s < lat.n_sites; ++s) {
      const int c = static_cast<int>((s / stride) % static_cast<std::size_t>(side));
      std::size_t nb = 0;
      bool wraps = false;
      if (c + 1 < side) {
        nb = s + stride;
      } else if (boundary == Boundary::Periodic) {
        nb = s - static_cast<std::size_t>(side - 1) * stride;
        wraps = true;
      } else {
        continue;
      }
      Bond b;
      b.index = lat.bonds.size();
      b.site_a = static_cast<std::uint32_t>(std::min(s, nb));
      b.site_b = static_cast<std::uint32_t>(std::max(s, nb));
      b.direction = mu;
      b.origin = static_cast<std::uint32_t>(s);
      b.wraps = wraps;
      lat.bond_lookup_[static_cast<std::size_t>(mu) * lat.n_sites + s] =
          static_cast<std::ptrdiff_t>(b.index);
      lat.bonds.push_back(b);
    }
  }
  return lat;
}

bool Corridor::contains(std::size_t bond) const {
  return std::binary_search(bond_indices.begin(), bond_indices.end(), bond);
}

std::vector<std::size_t> embed_bonds(const LatticeSpec& parent, const LatticeSpec& inner,
                                     const std::vector<int>& offset) {
  if (parent.dim != inner.dim || offset.size() != static_cast<std::size_t>(parent.dim)) {
    throw InvalidArgument("embed_bonds: dimension mismatch");
  }
  std::vector<std::size_t> map(inner.n_bonds());
  for (const Bond& b : inner.bonds) {
    auto c = inner.coords(b.origin);
    for (std::size_t mu = 0; mu < c.size(); ++mu) {
      c[mu] += offset[mu];
      if (c[mu] >= parent.side || c[mu] < 0) {
        if (parent.boundary != Boundary::Periodic) {
          throw InvalidArgument("embed_bonds: inner lattice does not fit the parent box");
        }
        c[mu] = ((c[mu] % parent.side) + parent.side) % parent.side;
      }
    }
    const auto pb = parent.bond_from(parent.site_at(c), b.direction);
    if (pb < 0) throw InvalidArgument("embed_bonds: bond has no counterpart in parent");
    map[b.index] = static_cast<std::size_t>(pb);
  }
  return map;
}

namespace {

// Tile the parent into boxes of side `tile`; corridor = bonds whose endpoints lie in
// different tiles.
Decomposition split_into_tiles(const LatticeSpec& parent, int tile, CorridorKind kind) {
  const int per_axis = parent.side / tile;
  std::size_t n_tiles = 1;
  for (int i = 0; i < parent.dim; ++i) n_tiles *= static_cast<std::size_t>(per_axis);

  auto tile_of = [&](std::size_t site) {
    const auto c = parent.coords(site);
    std::size_t id = 0;
    for (int v : c) id = id * static_cast<std::size_t>(per_axis) + static_cast<std::size_t>(v / tile);
    return id;
  };

  Decomposition dec;
  dec.corridor.kind = kind;
  const LatticeSpec box = build_lattice(parent.dim, tile, Boundary::Free);
  dec.sub_boxes.reserve(n_tiles);
  for (std::size_t t = 0; t < n_tiles; ++t) {
    SubBox sb;
    sb.lattice = box;
    sb.offset.assign(static_cast<std::size_t>(parent.dim), 0);
    std::size_t rem = t;
    for (int mu = parent.dim - 1; mu >= 0; --mu) {
      sb.offset[static_cast<std::size_t>(mu)] =
          static_cast<int>(rem % static_cast<std::size_t>(per_axis)) * tile;
      rem /= static_cast<std::size_t>(per_axis);
    }
    sb.site_map.resize(box.n_sites);
    for (std::size_t s = 0; s < box.n_sites; ++s) {
      auto c = box.coords(s);
      for (std::size_t mu = 0; mu < c.size(); ++mu) c[mu] += sb.offset[mu];
      sb.site_map[s] = parent.site_at(c);
    }
    sb.bond_map = embed_bonds(parent, box, sb.offset);
    dec.sub_boxes.push_back(std::move(sb));
  }
  for (const Bond& b : parent.bonds) {
    if (tile_of(b.site_a) != tile_of(b.site_b)) dec.corridor.bond_indices.push_back(b.index);
  }
  return dec;
}

}  // namespace

Decomposition decompose_box(const LatticeSpec& lattice) {
  if (lattice.boundary != Boundary::Free) {
    throw InvalidArgument("decompose_box: lattice must have free boundaries");
  }
  if (lattice.side % 2 != 0 || lattice.side < 4) {
    throw InvalidArgument("decompose_box: side must be even and >= 4");
  }
  return split_into_tiles(lattice, lattice.side / 2, CorridorKind::Midplanes);
}

Corridor torus_cut(const LatticeSpec& lattice) {
  if (lattice.boundary != Boundary::Periodic) {
    throw InvalidArgument("torus_cut: lattice must be periodic");
  }
  Corridor c;
  c.kind = CorridorKind::TorusCut;
  for (const Bond& b : lattice.bonds) {
    if (b.wraps) c.bond_indices.push_back(b.index);
  }
  return c;
}

UnfoldedTorus unfold_torus(const LatticeSpec& torus) {
  UnfoldedTorus u;
  u.cut = torus_cut(torus);
  u.box = build_lattice(torus.dim, torus.side, Boundary::Free);
  u.bond_map = embed_bonds(torus, u.box, std::vector<int>(static_cast<std::size_t>(torus.dim), 0));
  return u;
}

TiledTorus tiling_interfaces(int dim, int L, int k) {
  if (k < 2) throw InvalidArgument("tiling_interfaces: k must be >= 2");
  if (L < 2) throw InvalidArgument("tiling_interfaces: L must be >= 2");
  TiledTorus tt;
  tt.torus = build_lattice(dim, k * L, Boundary::Periodic);
  tt.tiles = split_into_tiles(tt.torus, L, CorridorKind::TilingInterfaces);
  return tt;
}

}  // namespace nlsurf
