"""Gauge-defermionised Hubbard model as Pauli sums.

Fermionic operators are first written as Majorana monomials.  A monomial
is regrouped site by site (each transposition of two distinct Majoranas
costs a sign) and every site block is replaced by its local Jordan-Wigner
string inside the dressed site, where a Majorana on role ``r`` reads
``I..I X Z..Z`` (``Y`` for the second matter Majorana).  The resulting
pre-merge string lives on ``dressed_size`` qubits per site; it is then
compressed onto the merged register, one qubit per link.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .lattice import Link, Plaquette, QubitLayout, Site, SITE_ORDER, RISHON_DIRS
from .pauli import PauliString, PauliSum, commutes, link_merge, multiply

__all__ = [
    "ModelParams",
    "Majorana",
    "Term",
    "EncodedHamiltonian",
    "StabilizerSet",
    "majorana_pauli",
    "majorana_product",
    "merge",
    "hopping_strings",
    "hopping_term",
    "onsite_term",
    "vertex_stabilizer",
    "plaquette_stabilizer",
    "plaquette_product_premerge",
    "stabilizers",
    "plaquette_penalty",
    "vertex_penalty",
    "number_penalty",
    "build_hamiltonian",
    "excitation_operator",
    "total_charge",
    "weight_report",
    "check_commutation",
]


@dataclass(frozen=True)
class ModelParams:
    t: float = 0.1
    U: float = 1.0
    alphaP: float = 20.0
    alphaB: float = 20.0
    muTilde: float = 20.0
    Ntarget: int | None = None

    def __post_init__(self):
        for name in ("alphaP", "alphaB", "muTilde"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class Majorana:
    """One Majorana mode: ``kind`` is ``"x"``/``"y"`` for matter, ``"g"`` for rishons."""

    site: Site
    role: str
    kind: str = "g"


def majorana_pauli(parity: str, role: str, kind: str = "g", flavors=("u", "d")) -> PauliString:
    """Local string of a single Majorana inside one dressed site."""
    order = [r for r in SITE_ORDER[parity] if r in flavors or r in RISHON_DIRS]
    if role not in order:
        raise ValueError(f"invalid role {role!r}")
    if role in RISHON_DIRS and kind != "g":
        raise ValueError("rishon Majoranas have kind 'g'")
    if role not in RISHON_DIRS and kind not in ("x", "y"):
        raise ValueError("matter Majoranas have kind 'x' or 'y'")
    p = order.index(role)
    ops = {p: "Y" if kind == "y" else "X"}
    for k in range(p + 1, len(order)):
        ops[k] = "Z"
    return PauliString.from_ops(len(order), ops)


def majorana_product(
    layout: QubitLayout, monomial: Sequence[Majorana], phase: int = 0
) -> PauliString:
    """Pre-merge string of ``i**phase * m_0 m_1 ... m_k``."""
    sidx = layout.site_index
    order = list(monomial)
    # stable bubble sort by site, counting transpositions of distinct modes
    swaps = 0
    for i in range(len(order)):
        for j in range(len(order) - 1 - i):
            if sidx[order[j].site] > sidx[order[j + 1].site]:
                order[j], order[j + 1] = order[j + 1], order[j]
                swaps += 1
    out = PauliString.identity(layout.n_dressed).times_phase(phase + 2 * (swaps % 2))
    size = layout.dressed_size
    counts: dict[Site, int] = {}
    for m in order:
        counts[m.site] = counts.get(m.site, 0) + 1
        local = majorana_pauli(m.site.parity, m.role, m.kind, layout.flavors)
        base = size * sidx[m.site]
        out = multiply(out, local.embed(layout.n_dressed, range(base, base + size)))
    odd = [s for s, c in counts.items() if c % 2]
    if odd:
        raise ValueError(f"monomial is parity-odd on sites {odd}; not a local operator")
    return out


def merge(layout: QubitLayout, s: PauliString) -> PauliString:
    pairs, new_index, drop = layout.merge_plan
    return link_merge(s, pairs, new_index, layout.n_qubits, drop)


# Hamiltonian pieces -----------------------------------------------------

def _link_majoranas(link: Link) -> tuple[Majorana, Majorana]:
    return Majorana(link.start, link.start_rishon), Majorana(link.end, link.end_rishon)


def hopping_strings(
    layout: QubitLayout, link: Link, flavor: str, merged: bool = True
) -> tuple[PauliString, PauliString]:
    """``(dx_A g_A g_B dy_B, dy_A g_A g_B dx_B)`` for the link ``A -> B``."""
    ga, gb = _link_majoranas(link)
    a, b = link.start, link.end
    s1 = majorana_product(layout, [Majorana(a, flavor, "x"), ga, gb, Majorana(b, flavor, "y")])
    s2 = majorana_product(layout, [Majorana(a, flavor, "y"), ga, gb, Majorana(b, flavor, "x")])
    if merged:
        return merge(layout, s1), merge(layout, s2)
    return s1, s2


def hopping_term(layout: QubitLayout, link: Link, flavor: str, t: float, merged: bool = True) -> PauliSum:
    """``-t/2 (S1 - S2)``: the gauged hopping ``-t (psi^dag U psi + h.c.)`` on one link."""
    s1, s2 = hopping_strings(layout, link, flavor, merged)
    n = s1.n
    if t == 0:
        return PauliSum(n)
    return PauliSum(n, [(-t / 2, s1), (t / 2, s2)])


def onsite_term(layout: QubitLayout, site: Site, U: float) -> PauliSum:
    n = layout.n_qubits
    if U == 0:
        return PauliSum(n)
    zz = PauliString.from_ops(n, {layout.matter(site, "u"): "Z", layout.matter(site, "d"): "Z"})
    return PauliSum(n, [(U / 4, zz)])


def vertex_stabilizer(layout: QubitLayout, site: Site) -> PauliString:
    base = layout.dressed_size * layout.site_index[site]
    pre = PauliString.from_ops(
        layout.n_dressed, {base + k: "Z" for k in range(layout.dressed_size)}
    )
    return merge(layout, pre)


def plaquette_product_premerge(layout: QubitLayout, plaq: Plaquette) -> PauliString:
    """Product of the four link operators ``i g_start g_end`` around ``plaq``."""
    monomial: list[Majorana] = []
    for link in plaq.links:
        monomial.extend(_link_majoranas(link))
    return majorana_product(layout, monomial, phase=4)


def plaquette_stabilizer(layout: QubitLayout, plaq: Plaquette) -> PauliString:
    s = merge(layout, plaquette_product_premerge(layout, plaq))
    if not s.is_hermitian:
        raise AssertionError(f"plaquette operator {s} is not Hermitian")
    return s


@dataclass(frozen=True)
class StabilizerSet:
    vertex: tuple[PauliString, ...]
    plaquette: tuple[PauliString, ...]

    @property
    def all(self) -> list[PauliString]:
        return [*self.vertex, *self.plaquette]

    def __iter__(self):
        return iter(self.all)

    def __len__(self) -> int:
        return len(self.vertex) + len(self.plaquette)


def stabilizers(layout: QubitLayout) -> StabilizerSet:
    return StabilizerSet(
        tuple(vertex_stabilizer(layout, s) for s in layout.sites),
        tuple(plaquette_stabilizer(layout, p) for p in layout.plaquettes),
    )


def plaquette_penalty(layout: QubitLayout, plaq: Plaquette, alphaP: float) -> PauliSum:
    """``-alphaP (S_p - 1)``: zero on the +1 sector, ``2 alphaP`` on the -1 sector."""
    n = layout.n_qubits
    if alphaP == 0:
        return PauliSum(n)
    s = plaquette_stabilizer(layout, plaq)
    return PauliSum(n, [(-alphaP, s), (alphaP, PauliString.identity(n))])


def vertex_penalty(layout: QubitLayout, site: Site, alpha: float) -> PauliSum:
    n = layout.n_qubits
    if alpha == 0:
        return PauliSum(n)
    s = vertex_stabilizer(layout, site)
    return PauliSum(n, [(-alpha, s), (alpha, PauliString.identity(n))])


def number_penalty(layout: QubitLayout, muTilde: float, Ntarget: int) -> PauliSum:
    """``mu (sum_k n_k - N)^2`` with ``n_k = (1 - Z_k)/2`` over matter qubits."""
    n = layout.n_qubits
    M = layout.n_matter
    if not 0 <= Ntarget <= M:
        raise ValueError(f"Ntarget={Ntarget} outside [0, {M}]")
    if muTilde == 0:
        return PauliSum(n)
    a = M / 2 - Ntarget
    qubits = [layout.matter(s, f) for s in layout.sites for f in layout.flavors]
    terms = [(muTilde * (a * a + M / 4), PauliString.identity(n))]
    for k in qubits:
        terms.append((-muTilde * a, PauliString.single(n, k, "Z")))
    for i, k in enumerate(qubits):
        for l in qubits[i + 1:]:
            terms.append((muTilde / 2, PauliString.from_ops(n, {k: "Z", l: "Z"})))
    return PauliSum(n, terms)


def total_charge(layout: QubitLayout) -> PauliSum:
    n = layout.n_qubits
    terms = []
    for s in layout.sites:
        for f in layout.flavors:
            terms.append((0.5, PauliString.identity(n)))
            terms.append((-0.5, PauliString.single(n, layout.matter(s, f), "Z")))
    return PauliSum(n, terms)


@dataclass(frozen=True)
class Term:
    coeff: float
    string: PauliString
    tag: tuple  # ("onsite", site) | ("hopping", link, flavor) | ("plaquette", plaq) | ...


class EncodedHamiltonian:
    """Ordered list of tagged terms; order is the Trotter order."""

    def __init__(self, layout: QubitLayout, terms: Iterable[Term]):
        self.layout = layout
        self.terms = list(terms)

    @property
    def n(self) -> int:
        return self.layout.n_qubits

    @property
    def pauli_sum(self) -> PauliSum:
        return PauliSum(self.n, [(t.coeff, t.string) for t in self.terms])

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def count(self, kind: str) -> int:
        return sum(1 for t in self.terms if t.tag[0] == kind)

    def select(self, *kinds: str) -> "EncodedHamiltonian":
        return EncodedHamiltonian(self.layout, [t for t in self.terms if t.tag[0] in kinds])

    def scaled(self, factors: dict[str, float]) -> "EncodedHamiltonian":
        """Copy with coefficients of each term class multiplied by ``factors[kind]``."""
        return EncodedHamiltonian(
            self.layout,
            [Term(t.coeff * factors.get(t.tag[0], 1.0), t.string, t.tag) for t in self.terms],
        )

    def dump_lines(self) -> list[str]:
        lines = self.layout.header_lines()
        for t in self.terms:
            lines.append(f"{t.coeff!r} {t.string.letters()}")
        return lines


def _sum_terms(ps: PauliSum, tag: tuple) -> list[Term]:
    out = []
    for c, p in ps:
        c = complex(c)
        if abs(c.imag) > 1e-14:
            raise AssertionError(f"non-Hermitian coefficient {c} for {tag}")
        out.append(Term(c.real, p, tag))
    return out


def build_hamiltonian(
    layout: QubitLayout,
    params: ModelParams,
    include_penalties: bool = False,
    keep_zero: bool = False,
) -> EncodedHamiltonian:
    """On-site terms, then hopping (link order, ``u`` before ``d``), then penalties.

    The bond (link-parity) penalty is absent: after merging it is ``ZZ -> I``
    and vanishes identically.  ``keep_zero`` retains terms with zero
    coefficient so that circuits keep a fixed structure across parameters.
    """
    terms: list[Term] = []
    for site in layout.sites:
        if params.U != 0 or keep_zero:
            zz = PauliString.from_ops(
                layout.n_qubits, {layout.matter(site, "u"): "Z", layout.matter(site, "d"): "Z"}
            )
            terms.append(Term(params.U / 4, zz, ("onsite", site)))
    for link in layout.links:
        for f in layout.flavors:
            if params.t == 0 and not keep_zero:
                continue
            s1, s2 = hopping_strings(layout, link, f)
            terms.append(Term(-params.t / 2, s1, ("hopping", link, f)))
            terms.append(Term(params.t / 2, s2, ("hopping", link, f)))
    if include_penalties:
        for plaq in layout.plaquettes:
            terms += _sum_terms(plaquette_penalty(layout, plaq, params.alphaP), ("plaquette", plaq))
        if params.Ntarget is not None:
            terms += _sum_terms(
                number_penalty(layout, params.muTilde, params.Ntarget), ("number",)
            )
    return EncodedHamiltonian(layout, terms)


def excitation_operator(layout: QubitLayout, kind: str, site: Site) -> PauliString:
    """Spin flip ``X_u X_d`` at ``site`` or the (0,0) charge removal ``X_u Z_d Z_w Y_s``."""
    n = layout.n_qubits
    if kind == "spin":
        return PauliString.from_ops(n, {layout.matter(site, "u"): "X", layout.matter(site, "d"): "X"})
    if kind == "charge":
        if site != Site.at(0, 0):
            raise ValueError("charge injection restricted to the (0,0) corner")
        if not layout.extra_rishon:
            raise ValueError("charge injection needs the extra boundary rishon")
        ops = {
            layout.dressed(site, "u"): "X",
            layout.dressed(site, "d"): "Z",
            layout.dressed(site, "w"): "Z",
            layout.dressed(site, "s"): "Y",
        }
        return merge(layout, PauliString.from_ops(layout.n_dressed, ops))
    raise ValueError(f"unknown excitation kind {kind!r}")


def weight_report(layout: QubitLayout, params: ModelParams | None = None) -> dict:
    """Measured maximum Pauli weights per term class on ``layout``.

    Includes the single-species variant of the same construction for
    comparison with the usual per-species resource tables.
    """
    params = params or ModelParams(t=1.0, U=1.0)
    ham = build_hamiltonian(layout, params)
    stabs = stabilizers(layout)
    report = {
        "qubits": layout.n_qubits,
        "fermion_modes": layout.n_matter,
        "qubit_fermion_ratio": layout.n_qubits / layout.n_matter,
        "onsite": max((t.string.weight for t in ham if t.tag[0] == "onsite"), default=0),
        "hopping": max((t.string.weight for t in ham if t.tag[0] == "hopping"), default=0),
        "vertex": sorted({s.weight for s in stabs.vertex}),
        "plaquette": sorted({s.weight for s in stabs.plaquette}),
        "parity": 1,  # vertex parity of matter alone is one Z per mode
    }
    single = QubitLayout(layout.spec, False, ("u",))
    single_hops = [
        s.weight for link in single.links for s in hopping_strings(single, link, "u")
    ]
    report["single_species_hopping"] = max(single_hops, default=0)
    report["single_species_qubit_fermion_ratio"] = single.n_qubits / single.n_matter
    stab_max = max([*report["vertex"], *report["plaquette"]], default=0)
    if stab_max > 6:
        raise AssertionError(f"stabilizer weight {stab_max} exceeds 6")
    if report["onsite"] not in (0, 2):
        raise AssertionError(f"on-site weight {report['onsite']} != 2")
    return report


def check_commutation(ham: EncodedHamiltonian, stabs: StabilizerSet) -> list[tuple]:
    """Pairs (term tag, stabilizer index) that fail to commute; empty when sound."""
    bad = []
    all_s = stabs.all
    for i, a in enumerate(all_s):
        for j, b in enumerate(all_s[i + 1:], i + 1):
            if not commutes(a, b):
                bad.append((("stabilizer", i), j))
    # hopping strings come in commuting pairs whose sum commutes; check per tag
    groups: dict[tuple, list[Term]] = {}
    for t in ham:
        groups.setdefault(t.tag, []).append(t)
    for tag, ts in groups.items():
        ps = PauliSum(ham.n, [(t.coeff, t.string) for t in ts])
        for j, s in enumerate(all_s):
            if not ps.commutes_with(s):
                bad.append((tag, j))
    return bad
