"""Open-boundary square lattice geometry and qubit bookkeeping.

Each dressed site carries two matter qubits (``u``, ``d``) and one rishon
per attached link.  Inside a site the roles are ordered ``u d w s e n`` on
even sites and ``d u s w n e`` on odd sites.  After the two rishons of a
link are compressed into one qubit the global register is: matter qubits
site by site (row-major, intra-site order kept), then one qubit per link in
canonical link order, then the optional extra boundary rishon.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

__all__ = [
    "LatticeSpec",
    "Site",
    "Link",
    "Plaquette",
    "QubitLayout",
    "build_layout",
    "hilbert_dims",
    "enumerate_lattice",
    "SITE_ORDER",
    "RISHON_DIRS",
]

SITE_ORDER = {
    "even": ("u", "d", "w", "s", "e", "n"),
    "odd": ("d", "u", "s", "w", "n", "e"),
}
RISHON_DIRS = ("w", "s", "e", "n")


@dataclass(frozen=True)
class LatticeSpec:
    Lx: int
    Ly: int

    def __post_init__(self):
        if not (isinstance(self.Lx, int) and isinstance(self.Ly, int)):
            raise TypeError("lattice extents must be integers")
        if self.Lx < 1 or self.Ly < 1:
            raise ValueError(f"invalid lattice {self.Lx}x{self.Ly}")

    @property
    def n_sites(self) -> int:
        return self.Lx * self.Ly

    def __str__(self) -> str:
        return f"{self.Lx}x{self.Ly}"


@dataclass(frozen=True, order=True)
class Site:
    jy: int
    jx: int

    @classmethod
    def at(cls, jx: int, jy: int) -> "Site":
        return cls(jy=jy, jx=jx)

    @property
    def parity(self) -> str:
        return "even" if (self.jx + self.jy) % 2 == 0 else "odd"

    @property
    def xy(self) -> tuple[int, int]:
        return (self.jx, self.jy)

    def __repr__(self) -> str:
        return f"Site({self.jx},{self.jy})"


@dataclass(frozen=True)
class Link:
    start: Site
    direction: str  # "x" or "y"

    @property
    def end(self) -> Site:
        if self.direction == "x":
            return Site.at(self.start.jx + 1, self.start.jy)
        return Site.at(self.start.jx, self.start.jy + 1)

    @property
    def start_rishon(self) -> str:
        return "e" if self.direction == "x" else "n"

    @property
    def end_rishon(self) -> str:
        return "w" if self.direction == "x" else "s"

    def __repr__(self) -> str:
        return f"Link({self.start.jx},{self.start.jy},{self.direction})"


@dataclass(frozen=True)
class Plaquette:
    lower_left: Site

    @property
    def parity(self) -> str:
        return self.lower_left.parity

    @property
    def corners(self) -> tuple[Site, Site, Site, Site]:
        """(lower-left, lower-right, upper-left, upper-right)."""
        jx, jy = self.lower_left.xy
        return (
            Site.at(jx, jy),
            Site.at(jx + 1, jy),
            Site.at(jx, jy + 1),
            Site.at(jx + 1, jy + 1),
        )

    @property
    def links(self) -> tuple[Link, Link, Link, Link]:
        """(bottom, right, top, left), each oriented along +x / +y."""
        ll, lr, ul, _ = self.corners
        return (Link(ll, "x"), Link(lr, "y"), Link(ul, "x"), Link(ll, "y"))

    def __repr__(self) -> str:
        return f"Plaquette({self.lower_left.jx},{self.lower_left.jy})"


def enumerate_lattice(spec: LatticeSpec) -> tuple[list[Site], list[Link], list[Plaquette]]:
    """Sites row-major, x-links then y-links (row-major), plaquettes row-major."""
    Lx, Ly = spec.Lx, spec.Ly
    sites = [Site.at(jx, jy) for jy in range(Ly) for jx in range(Lx)]
    xlinks = [Link(Site.at(jx, jy), "x") for jy in range(Ly) for jx in range(Lx - 1)]
    ylinks = [Link(Site.at(jx, jy), "y") for jy in range(Ly - 1) for jx in range(Lx)]
    plaqs = [Plaquette(Site.at(jx, jy)) for jy in range(Ly - 1) for jx in range(Lx - 1)]
    return sites, xlinks + ylinks, plaqs


def hilbert_dims(spec: LatticeSpec) -> tuple[int, int]:
    """(full register dimension, physical-sector dimension)."""
    x, y = spec.Lx, spec.Ly
    return 2 ** (4 * x * y - x - y), 2 ** (2 * x * y - 1)


@dataclass(frozen=True)
class QubitLayout:
    spec: LatticeSpec
    extra_rishon: bool = False
    flavors: tuple[str, ...] = ("u", "d")
    sites: tuple[Site, ...] = field(init=False)
    links: tuple[Link, ...] = field(init=False)
    plaquettes: tuple[Plaquette, ...] = field(init=False)

    def __post_init__(self):
        if self.flavors not in (("u", "d"), ("u",)):
            raise ValueError(f"unsupported flavors {self.flavors}")
        sites, links, plaqs = enumerate_lattice(self.spec)
        object.__setattr__(self, "sites", tuple(sites))
        object.__setattr__(self, "links", tuple(links))
        object.__setattr__(self, "plaquettes", tuple(plaqs))

    # merged register ----------------------------------------------------
    @property
    def n_flavors(self) -> int:
        return len(self.flavors)

    @property
    def n_matter(self) -> int:
        return self.n_flavors * len(self.sites)

    def site_order(self, site: Site) -> tuple[str, ...]:
        return tuple(r for r in SITE_ORDER[site.parity] if r in self.flavors or r in RISHON_DIRS)

    @property
    def n_qubits(self) -> int:
        return self.n_matter + len(self.links) + int(self.extra_rishon)

    @cached_property
    def site_index(self) -> dict[Site, int]:
        return {s: i for i, s in enumerate(self.sites)}

    @cached_property
    def link_index(self) -> dict[Link, int]:
        return {l: i for i, l in enumerate(self.links)}

    def has_site(self, site: Site) -> bool:
        return site in self.site_index

    def matter(self, site: Site, flavor: str) -> int:
        """Global qubit of matter flavor ``"u"`` or ``"d"`` at ``site``."""
        base = self.n_flavors * self.site_index[site]
        order = [r for r in SITE_ORDER[site.parity] if r in self.flavors]
        return base + order.index(flavor)

    def link_qubit(self, link: Link) -> int:
        return self.n_matter + self.link_index[link]

    @property
    def extra_qubit(self) -> int:
        if not self.extra_rishon:
            raise ValueError("layout has no extra rishon")
        return self.n_qubits - 1

    def neighbour_link(self, site: Site, rishon: str) -> Link | None:
        """The link carrying rishon ``rishon`` of ``site`` (None on the boundary)."""
        jx, jy = site.xy
        if rishon == "e":
            link = Link(site, "x")
        elif rishon == "n":
            link = Link(site, "y")
        elif rishon == "w":
            link = Link(Site.at(jx - 1, jy), "x")
        elif rishon == "s":
            link = Link(Site.at(jx, jy - 1), "y")
        else:
            raise ValueError(f"unknown rishon {rishon!r}")
        return link if link in self.link_index else None

    def rishon_qubit(self, site: Site, rishon: str) -> int | None:
        """Merged qubit hosting ``rishon`` of ``site``, or None if absent."""
        link = self.neighbour_link(site, rishon)
        if link is not None:
            return self.link_qubit(link)
        if self.extra_rishon and site == Site.at(0, 0) and rishon == "s":
            return self.extra_qubit
        return None

    def site_links(self, site: Site) -> list[Link]:
        out = []
        for r in RISHON_DIRS:
            link = self.neighbour_link(site, r)
            if link is not None:
                out.append(link)
        return out

    # pre-merge (six qubits per dressed site) ----------------------------
    @property
    def dressed_size(self) -> int:
        return self.n_flavors + 4

    @property
    def n_dressed(self) -> int:
        return self.dressed_size * len(self.sites)

    def dressed(self, site: Site, role: str) -> int:
        """Pre-merge qubit of ``role`` at ``site`` (intra-site order kept)."""
        return self.dressed_size * self.site_index[site] + self.site_order(site).index(role)

    @cached_property
    def merge_plan(self) -> tuple[list[tuple[int, int]], list[int], list[int]]:
        """(rishon pairs, old->new index map, frozen boundary rishons)."""
        new_index = [-1] * self.n_dressed
        for site in self.sites:
            for f in self.flavors:
                new_index[self.dressed(site, f)] = self.matter(site, f)
        pairs = []
        for link in self.links:
            a = self.dressed(link.start, link.start_rishon)
            b = self.dressed(link.end, link.end_rishon)
            pairs.append((a, b))
            new_index[a] = self.link_qubit(link)
        drop = []
        for site in self.sites:
            for r in RISHON_DIRS:
                if self.neighbour_link(site, r) is not None:
                    continue
                k = self.dressed(site, r)
                if self.extra_rishon and site == Site.at(0, 0) and r == "s":
                    new_index[k] = self.extra_qubit
                else:
                    drop.append(k)
        return pairs, new_index, drop

    def header_lines(self) -> list[str]:
        lines = [f"# lattice {self.spec} qubits {self.n_qubits} extra_rishon {int(self.extra_rishon)}"]
        for s in self.sites:
            roles = " ".join(f"{f}={self.matter(s, f)}" for f in self.flavors)
            lines.append(f"# site {s.jx},{s.jy} {s.parity} {roles}")
        for l in self.links:
            lines.append(f"# link {l.start.jx},{l.start.jy},{l.direction} q={self.link_qubit(l)}")
        if self.extra_rishon:
            lines.append(f"# extra_rishon site 0,0 s q={self.extra_qubit}")
        return lines


def build_layout(
    spec: LatticeSpec, extra_rishon: bool = False, flavors: tuple[str, ...] = ("u", "d")
) -> QubitLayout:
    return QubitLayout(spec, extra_rishon, tuple(flavors))
