import json
import os

import numpy as np
import pytest

from z2hubbard.encoder import (
    Majorana,
    ModelParams,
    build_hamiltonian,
    check_commutation,
    excitation_operator,
    hopping_strings,
    majorana_pauli,
    majorana_product,
    merge,
    number_penalty,
    plaquette_product_premerge,
    stabilizers,
    total_charge,
    vertex_stabilizer,
    weight_report,
)
from z2hubbard.lattice import LatticeSpec, Link, Plaquette, Site, build_layout
from z2hubbard.pauli import PauliString, PauliSum, commutes, multiply, to_dense

from conftest import GOLDEN


def row(text: str) -> PauliString:
    """Letters separated by spaces, each optionally prefixed by ``i`` or ``-i``."""
    phase, letters = 0, []
    for tok in text.split():
        if tok.startswith("-i"):
            phase += 3
        elif tok.startswith("i"):
            phase += 1
        letters.append(tok[-1])
    return PauliString.from_letters("".join(letters)).times_phase(phase)


# single-site Majorana strings -------------------------------------------------

@pytest.mark.parametrize(
    "parity,role,kind,expected",
    [
        ("even", "u", "x", "XZZZZZ"),
        ("even", "d", "x", "IXZZZZ"),
        ("even", "u", "y", "YZZZZZ"),
        ("even", "d", "y", "IYZZZZ"),
        ("even", "w", "g", "IIXZZZ"),
        ("even", "s", "g", "IIIXZZ"),
        ("even", "e", "g", "IIIIXZ"),
        ("even", "n", "g", "IIIIIX"),
        # odd sites use the order d u s w n e
        ("odd", "u", "y", "IYZZZZ"),
        ("odd", "d", "x", "XZZZZZ"),
        ("odd", "s", "g", "IIXZZZ"),
        ("odd", "w", "g", "IIIXZZ"),
        ("odd", "e", "g", "IIIIIX"),
    ],
)
def test_majorana_strings(parity, role, kind, expected):
    p = majorana_pauli(parity, role, kind)
    assert p.letters() == expected and p.phase == 0


@pytest.mark.parametrize("parity", ["even", "odd"])
def test_majoranas_anticommute_and_square_to_one(parity):
    modes = [(f, k) for f in "ud" for k in "xy"] + [(r, "g") for r in "wsen"]
    ps = [majorana_pauli(parity, r, k) for r, k in modes]
    for i, a in enumerate(ps):
        sq = multiply(a, a)
        assert sq.x == sq.z == 0 and sq.phase == 0
        for b in ps[i + 1:]:
            assert not commutes(a, b)


# horizontal hopping between an even and an odd site ----------------------------

def test_hopping_factor_rows(layout21):
    e, o = Site.at(0, 0), Site.at(1, 0)
    n = layout21.n_dressed

    def embedded(site, role, kind):
        base = layout21.dressed_size * layout21.site_index[site]
        return majorana_pauli(site.parity, role, kind).embed(n, range(base, base + 6))

    assert embedded(e, "u", "x") == row("X Z Z Z Z Z I I I I I I")
    assert embedded(e, "e", "g") == row("I I I I X Z I I I I I I")
    assert embedded(o, "w", "g") == row("I I I I I I I I I X Z Z")
    assert embedded(o, "u", "y") == row("I I I I I I I Y Z Z Z Z")


def test_hopping_product_row(layout21):
    link = Link(Site.at(0, 0), "x")
    s1, s2 = hopping_strings(layout21, link, "u", merged=False)
    assert s1 == row("X Z Z Z iY I I Y Z -iY I I")
    # the two strings of the hermitian-conjugate pair
    assert s1 == PauliString.from_letters("XZZZYIIYZYII")
    assert s2 == PauliString.from_letters("YZZZYIIXZYII")


def test_hopping_product_equals_ordered_majorana_product(layout21):
    e, o = Site.at(0, 0), Site.at(1, 0)
    mono = [Majorana(e, "u", "x"), Majorana(e, "e"), Majorana(o, "w"), Majorana(o, "u", "y")]
    s = majorana_product(layout21, mono)
    n = layout21.n_dressed
    acc = PauliString.identity(n)
    for m in mono:
        base = layout21.dressed_size * layout21.site_index[m.site]
        acc = multiply(acc, majorana_pauli(m.site.parity, m.role, m.kind).embed(n, range(base, base + 6)))
    assert s == acc


def test_parity_odd_monomial_rejected(layout21):
    with pytest.raises(ValueError, match="parity-odd"):
        majorana_product(layout21, [Majorana(Site.at(0, 0), "u", "x")])


def test_bulk_hopping_support_and_weight():
    layout = build_layout(LatticeSpec(3, 3))
    a, b = Site.at(1, 1), Site.at(2, 1)  # even -> odd, all rishons present
    link = Link(a, "x")
    expected = {
        layout.matter(a, "u"),
        layout.matter(a, "d"),
        layout.rishon_qubit(a, "w"),
        layout.rishon_qubit(a, "s"),
        layout.link_qubit(link),
        layout.matter(b, "u"),
        layout.rishon_qubit(b, "s"),
    }
    for s in hopping_strings(layout, link, "u"):
        assert set(s.support) == expected
        assert s.weight == 7


def test_hopping_is_hermitian_and_traceless(layout22):
    H = build_hamiltonian(layout22, ModelParams(t=1.0, U=0.0))
    for t in H:
        assert t.string.is_hermitian
        assert not t.string.is_identity
    assert H.pauli_sum.is_hermitian()
    assert H.pauli_sum.trace_fraction() == 0


def test_hopping_pair_strings_commute(layout22):
    for link in layout22.links:
        for f in "ud":
            s1, s2 = hopping_strings(layout22, link, f)
            assert commutes(s1, s2)


# on-site and vertex ------------------------------------------------------------

def test_onsite_quarter_zz(layout22):
    H = build_hamiltonian(layout22, ModelParams(t=0.0, U=2.0))
    assert H.count("onsite") == len(layout22.sites) and len(H) == 4
    for t in H:
        site = t.tag[1]
        assert t.coeff == pytest.approx(0.5)
        assert t.string == PauliString.from_ops(
            layout22.n_qubits, {layout22.matter(site, "u"): "Z", layout22.matter(site, "d"): "Z"}
        )


def test_onsite_dense_equals_shifted_number_product():
    layout = build_layout(LatticeSpec(1, 1))
    H = to_dense(build_hamiltonian(layout, ModelParams(t=0.0, U=1.0)).pauli_sum)
    u, d = layout.matter(Site.at(0, 0), "u"), layout.matter(Site.at(0, 0), "d")
    for b in range(1 << layout.n_qubits):
        nu, nd = (b >> u) & 1, (b >> d) & 1
        assert H[b, b] == pytest.approx((nu - 0.5) * (nd - 0.5))


@pytest.mark.parametrize("extra", [False, True])
def test_vertex_is_z_on_matter_and_rishons(extra):
    layout = build_layout(LatticeSpec(3, 2), extra)
    for site in layout.sites:
        v = vertex_stabilizer(layout, site)
        assert v.x == 0 and v.phase == 0
        expected = {layout.matter(site, f) for f in "ud"}
        expected |= {q for r in "wsen" if (q := layout.rishon_qubit(site, r)) is not None}
        assert set(v.support) == expected


def test_bond_penalty_vanishes_after_merge(layout22):
    # Z on both rishons of a link compresses to the identity
    link = layout22.links[0]
    ops = {
        layout22.dressed(link.start, link.start_rishon): "Z",
        layout22.dressed(link.end, link.end_rishon): "Z",
    }
    assert merge(layout22, PauliString.from_ops(layout22.n_dressed, ops)).is_identity


# plaquette ----------------------------------------------------------------------

def test_even_plaquette_premerge_table(layout22):
    # the reference table lists sites in the order (0,0), (0,1), (1,0), (1,1)
    reference = row(
        "I I I I X iY I I X Z Z iY I I I X iY I I I X iY I I"
    )
    s = plaquette_product_premerge(layout22, Plaquette(Site.at(0, 0)))
    size = layout22.dressed_size
    order = [Site.at(0, 0), Site.at(0, 1), Site.at(1, 0), Site.at(1, 1)]
    letters = s.letters()
    reordered = "".join(
        letters[size * layout22.site_index[site]: size * (layout22.site_index[site] + 1)] for site in order
    )
    assert reordered == reference.letters()
    assert s.phase == reference.phase == 0


@pytest.mark.parametrize("Lx,Ly", [(2, 2), (3, 3), (4, 2)])
def test_plaquettes_hermitian_and_involutive(Lx, Ly):
    layout = build_layout(LatticeSpec(Lx, Ly))
    for p in stabilizers(layout).plaquette:
        assert p.is_hermitian
        sq = multiply(p, p)
        assert sq.is_identity and sq.phase == 0


def test_plaquette_weights_3x3():
    layout = build_layout(LatticeSpec(3, 3))
    weights = [p.weight for p in stabilizers(layout).plaquette]
    assert min(weights) >= 4 and max(weights) <= 6
    # each plaquette acts on its four links
    for plaq, p in zip(layout.plaquettes, stabilizers(layout).plaquette):
        links = {layout.link_qubit(l) for l in plaq.links}
        assert links <= set(p.support)


# structural invariants -------------------------------------------------------------

@pytest.mark.parametrize("Lx,Ly,extra", [(2, 2, False), (2, 2, True), (3, 2, True), (3, 3, False), (4, 2, True)])
def test_everything_commutes(Lx, Ly, extra):
    layout = build_layout(LatticeSpec(Lx, Ly), extra)
    H = build_hamiltonian(layout, ModelParams(t=1.0, U=4.0, Ntarget=layout.n_matter // 2), include_penalties=True)
    assert check_commutation(H, stabilizers(layout)) == []


def _sz(layout):
    n = layout.n_qubits
    terms = []
    for s in layout.sites:
        terms.append((-0.25, PauliString.single(n, layout.matter(s, "u"), "Z")))
        terms.append((0.25, PauliString.single(n, layout.matter(s, "d"), "Z")))
    return PauliSum(n, terms)


@pytest.mark.parametrize("Lx,Ly", [(2, 2), (3, 2)])
def test_charge_and_spin_conserved(Lx, Ly):
    layout = build_layout(LatticeSpec(Lx, Ly))
    H = build_hamiltonian(layout, ModelParams(t=1.0, U=3.0)).pauli_sum
    for Q in (total_charge(layout), _sz(layout)):
        assert len(H * Q - Q * H) == 0


def test_spin_flip_symmetry_of_spectrum(layout22):
    # exchanging u and d on every site maps stabilizers to themselves and
    # leaves the physical spectrum invariant
    from z2hubbard.sector import SectorBasis

    layout = layout22
    n = layout.n_qubits
    H = build_hamiltonian(layout, ModelParams(t=1.0, U=4.0)).pauli_sum
    perm = list(range(n))
    for s in layout.sites:
        u, d = layout.matter(s, "u"), layout.matter(s, "d")
        perm[u], perm[d] = d, u
    swap = lambda p: p.restrict(perm).embed(n, range(n))  # noqa: E731
    stabs = stabilizers(layout).all
    assert {swap(s) for s in stabs} == set(stabs)
    flipped = PauliSum(n, [(c, swap(p)) for c, p in H])
    assert len(flipped - H) > 0  # the encoded form itself is not symmetric
    basis = SectorBasis(stabs)
    w = np.linalg.eigvalsh(basis.operator(H).toarray())
    wf = np.linalg.eigvalsh(basis.operator(flipped).toarray())
    assert len(w) == 128
    np.testing.assert_allclose(w, wf, atol=1e-10)


def test_number_penalty_is_squared_deviation():
    layout = build_layout(LatticeSpec(1, 2))
    mu, N = 3.0, 1
    D = to_dense(number_penalty(layout, mu, N)).real
    matter = [layout.matter(s, f) for s in layout.sites for f in "ud"]
    for b in range(1 << layout.n_qubits):
        occ = sum((b >> q) & 1 for q in matter)
        assert D[b, b] == pytest.approx(mu * (occ - N) ** 2)
    assert np.allclose(D, np.diag(np.diag(D)))
    with pytest.raises(ValueError):
        number_penalty(layout, mu, 5)


def test_negative_penalty_rejected():
    with pytest.raises(ValueError):
        ModelParams(alphaP=-1.0)


def test_keep_zero_fixes_structure(layout22):
    a = build_hamiltonian(layout22, ModelParams(t=0.0, U=1.0), keep_zero=True)
    b = build_hamiltonian(layout22, ModelParams(t=0.3, U=1.0), keep_zero=True)
    assert [t.string for t in a] == [t.string for t in b]
    assert len(build_hamiltonian(layout22, ModelParams(t=0.0, U=1.0))) == 4


# excitations ---------------------------------------------------------------------------

def test_spin_excitation_operator(layout22):
    for site in layout22.sites:
        op = excitation_operator(layout22, "spin", site)
        assert set(op.support) == {layout22.matter(site, "u"), layout22.matter(site, "d")}
        assert op.letters().count("X") == 2
        assert all(commutes(op, s) for s in stabilizers(layout22))


@pytest.mark.parametrize("Lx,Ly", [(2, 2), (3, 2), (4, 2)])
def test_charge_excitation_operator(Lx, Ly):
    layout = build_layout(LatticeSpec(Lx, Ly), extra_rishon=True)
    s00 = Site.at(0, 0)
    op = excitation_operator(layout, "charge", s00)
    expected = {
        layout.matter(s00, "u"): "X",
        layout.matter(s00, "d"): "Z",
        layout.extra_qubit: "Y",
    }
    assert {q: op.letter(q) for q in op.support} == expected
    assert op.is_hermitian
    assert all(commutes(op, s) for s in stabilizers(layout))


def test_charge_excitation_restrictions(layout22, layout22x):
    with pytest.raises(ValueError, match="corner"):
        excitation_operator(layout22x, "charge", Site.at(1, 0))
    with pytest.raises(ValueError, match="extra boundary rishon"):
        excitation_operator(layout22, "charge", Site.at(0, 0))
    with pytest.raises(ValueError):
        excitation_operator(layout22, "photon", Site.at(0, 0))


# snapshots ------------------------------------------------------------------------------

def test_encode_dump_golden(layout22):
    H = build_hamiltonian(layout22, ModelParams(t=1.0, U=4.0))
    lines = H.dump_lines() + [f"stabilizer {s}" for s in stabilizers(layout22)]
    with open(os.path.join(GOLDEN, "encode_2x2.txt")) as fh:
        assert lines == fh.read().splitlines()


@pytest.mark.parametrize("name,Lx,Ly,extra", [("2x2", 2, 2, False), ("3x3", 3, 3, False), ("4x2x", 4, 2, True)])
def test_weight_report_golden(name, Lx, Ly, extra):
    with open(os.path.join(GOLDEN, "weights.json")) as fh:
        golden = json.load(fh)
    report = weight_report(build_layout(LatticeSpec(Lx, Ly), extra))
    assert report == golden[name]
