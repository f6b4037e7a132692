import pytest

from z2hubbard.lattice import LatticeSpec, Link, Plaquette, Site, build_layout, enumerate_lattice, hilbert_dims


@pytest.mark.parametrize("Lx,Ly", [(1, 1), (2, 2), (3, 2), (4, 2), (3, 3)])
def test_counts(Lx, Ly):
    sites, links, plaqs = enumerate_lattice(LatticeSpec(Lx, Ly))
    assert len(sites) == Lx * Ly
    assert len(links) == Lx * (Ly - 1) + Ly * (Lx - 1)
    assert len(plaqs) == (Lx - 1) * (Ly - 1)


@pytest.mark.parametrize("bad", [(0, 2), (2, 0), (-1, 3)])
def test_invalid_extent(bad):
    with pytest.raises(ValueError, match="invalid lattice"):
        LatticeSpec(*bad)


def test_non_integer_extent():
    with pytest.raises(TypeError):
        LatticeSpec(2.0, 2)


def test_parity_checkerboard():
    assert Site.at(0, 0).parity == "even"
    assert Site.at(1, 0).parity == "odd"
    assert Site.at(1, 1).parity == "even"
    assert Plaquette(Site.at(1, 0)).parity == "odd"


def test_link_geometry():
    l = Link(Site.at(0, 0), "x")
    assert l.end == Site.at(1, 0) and (l.start_rishon, l.end_rishon) == ("e", "w")
    l = Link(Site.at(0, 0), "y")
    assert l.end == Site.at(0, 1) and (l.start_rishon, l.end_rishon) == ("n", "s")


def test_plaquette_links_form_loop():
    p = Plaquette(Site.at(0, 0))
    ends = [(l.start, l.end) for l in p.links]
    corners = set(p.corners)
    assert all(a in corners and b in corners for a, b in ends)
    degree = {c: 0 for c in corners}
    for a, b in ends:
        degree[a] += 1
        degree[b] += 1
    assert set(degree.values()) == {2}


@pytest.mark.parametrize("Lx,Ly,extra,n", [(2, 2, False, 12), (2, 2, True, 13), (4, 2, True, 27), (3, 2, True, 20)])
def test_qubit_count(Lx, Ly, extra, n):
    assert build_layout(LatticeSpec(Lx, Ly), extra).n_qubits == n


@pytest.mark.parametrize("Lx,Ly", [(2, 2), (3, 2), (4, 2), (3, 3)])
def test_register_matches_full_dimension(Lx, Ly):
    full, phys = hilbert_dims(LatticeSpec(Lx, Ly))
    layout = build_layout(LatticeSpec(Lx, Ly))
    assert full == 2 ** layout.n_qubits
    assert phys == 2 ** (2 * Lx * Ly - 1)


def test_qubit_assignment_is_bijective():
    layout = build_layout(LatticeSpec(3, 2), extra_rishon=True)
    used = [layout.matter(s, f) for s in layout.sites for f in layout.flavors]
    used += [layout.link_qubit(l) for l in layout.links] + [layout.extra_qubit]
    assert sorted(used) == list(range(layout.n_qubits))


def test_matter_order_follows_parity(layout22):
    # even sites list u before d, odd sites d before u
    assert layout22.matter(Site.at(0, 0), "u") < layout22.matter(Site.at(0, 0), "d")
    assert layout22.matter(Site.at(1, 0), "d") < layout22.matter(Site.at(1, 0), "u")


def test_rishon_qubits(layout22, layout22x):
    s00 = Site.at(0, 0)
    assert layout22.rishon_qubit(s00, "w") is None
    assert layout22.rishon_qubit(s00, "s") is None
    assert layout22x.rishon_qubit(s00, "s") == layout22x.extra_qubit
    assert layout22.rishon_qubit(s00, "e") == layout22.rishon_qubit(Site.at(1, 0), "w")
    with pytest.raises(ValueError):
        layout22.extra_qubit


def test_merge_plan_covers_dressed_register(layout22x):
    pairs, new_index, drop = layout22x.merge_plan
    paired = {q for p in pairs for q in p}
    assert len(paired) == 2 * len(pairs)
    assert paired.isdisjoint(drop)
    kept = [k for k in range(layout22x.n_dressed) if k not in drop and new_index[k] >= 0]
    assert sorted({new_index[k] for k in kept}) == list(range(layout22x.n_qubits))


def test_has_site(layout22):
    assert layout22.has_site(Site.at(1, 1))
    assert not layout22.has_site(Site.at(2, 0))


def test_unsupported_flavors():
    with pytest.raises(ValueError):
        build_layout(LatticeSpec(2, 2), flavors=("d",))
