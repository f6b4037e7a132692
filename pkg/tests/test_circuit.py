import numpy as np
import pytest
import scipy.linalg as la
from hypothesis import given
from hypothesis import strategies as st

from z2hubbard.circuit import (
    AdiabaticSchedule,
    Circuit,
    Gate,
    adiabatic_circuit,
    adiabatic_hamiltonian,
    compile_propagator,
    stabilizer_measure_circuit,
    trotter_step,
)
from z2hubbard.emulator import circuit_unitary
from z2hubbard.encoder import ModelParams, build_hamiltonian
from z2hubbard.lattice import LatticeSpec, build_layout
from z2hubbard.pauli import PauliString, to_dense


def phase_distance(U, V):
    """Frobenius distance minimised over a global phase."""
    ov = np.vdot(V, U)
    ph = ov / abs(ov) if abs(ov) > 0 else 1.0
    return np.linalg.norm(U - ph * V)


@st.composite
def hermitian_strings(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    letters = draw(st.text("IXYZ", min_size=n, max_size=n).filter(lambda s: set(s) != {"I"}))
    return PauliString.from_letters(letters).times_phase(draw(st.sampled_from([0, 2])))


@given(hermitian_strings(), st.floats(-3, 3), st.floats(0.001, 1.0), st.booleans())
def test_propagator_equals_exponential(p, c, dt, fuse):
    U = circuit_unitary(compile_propagator(c, p, dt), fuse=fuse)
    ref = la.expm(-1j * c * dt * to_dense(p))
    # exact (no global phase) in both paths
    assert np.linalg.norm(U - ref) < 1e-12


def test_structure_zz():
    c = compile_propagator(0.5, PauliString.from_letters("ZIZ"), 0.1)
    assert c.kinds() == ["CNOT", "RZ", "CNOT"]
    assert c.gates[0].qubits == (0, 2)
    assert c.gates[1].qubits == (2,)
    assert c.gates[1].angle == pytest.approx(0.1)


def test_structure_mixed_letters():
    c = compile_propagator(1.0, PauliString.from_letters("XYZ"), 0.2)
    assert c.kinds() == ["H", "RXm", "CNOT", "CNOT", "RZ", "CNOT", "CNOT", "H", "RXp"]
    assert [g.qubits for g in c.gates if g.kind == "CNOT"] == [(0, 1), (1, 2), (1, 2), (0, 1)]
    # one Y letter flips the rotation sign
    assert c.gates[4].angle == pytest.approx(-0.4)
    assert len(c.spans) == 1 and c.spans[0].start == 0 and c.spans[0].stop == len(c)


def test_single_qubit_rotation():
    c = compile_propagator(1.0, PauliString.from_letters("IZ"), 0.3)
    assert c.kinds() == ["RZ"]
    assert c.gates[0].qubits == (1,)


def test_negative_sign_string():
    p = PauliString.from_letters("-XX")
    c = compile_propagator(0.7, p, 0.1)
    rz = [g for g in c.gates if g.kind == "RZ"][0]
    assert rz.angle == pytest.approx(-0.14)


def test_rejections():
    with pytest.raises(ValueError):
        compile_propagator(1.0, PauliString.identity(3), 0.1)
    with pytest.raises(ValueError):
        compile_propagator(1.0, PauliString.from_letters("iXZ"), 0.1)
    c = Circuit(2)
    with pytest.raises(ValueError):
        c.append(Gate("CNOT", (0, 0)))
    with pytest.raises(ValueError):
        c.append(Gate("H", (2,)))
    with pytest.raises(ValueError):
        c.append(Gate("SWAP", (0, 1)))
    with pytest.raises(ValueError):
        c.append(Gate("RZ", (0,), float("nan")))
    with pytest.raises(ValueError):
        c.append(Gate("CONDITIONAL", (), bit=0, inner=Gate("MEASURE", (0,), bit=0)))


def test_gate_text():
    assert Gate("CNOT", (0, 3)).text() == "CNOT 0 3"
    assert Gate("RZ", (1,), 0.5).text() == "RZ 1 0.5"
    assert Gate("MEASURE", (4,), bit=2).text() == "MEASURE 4 c2"
    assert Gate("CONDITIONAL", (), bit=2, inner=Gate("X", (4,))).text() == "CONDITIONAL c2 X 4"


def test_trotter_step_is_product_of_term_exponentials():
    layout = build_layout(LatticeSpec(2, 1))
    H = build_hamiltonian(layout, ModelParams(t=0.6, U=1.3))
    dt = 0.05
    U = circuit_unitary(trotter_step(H, dt))
    ref = np.eye(1 << H.n, dtype=complex)
    for t in H:
        ref = la.expm(-1j * t.coeff * dt * to_dense(t.string)) @ ref
    assert np.linalg.norm(U - ref) < 1e-12
    # identity terms are dropped
    Hp = build_hamiltonian(layout, ModelParams(t=0.6, U=1.3, Ntarget=2), include_penalties=True)
    assert len(trotter_step(Hp, dt).spans) == sum(1 for t in Hp if not t.string.is_identity)


def test_trotter_error_is_second_order_per_step():
    layout = build_layout(LatticeSpec(2, 1))
    H = build_hamiltonian(layout, ModelParams(t=1.0, U=1.0))
    D = to_dense(H.pauli_sum)
    errs = []
    for dt in (0.02, 0.01):
        U = circuit_unitary(trotter_step(H, dt))
        errs.append(phase_distance(U, la.expm(-1j * dt * D)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_circuit_extend_offsets_spans():
    a = compile_propagator(1.0, PauliString.from_letters("XX"), 0.1)
    b = a.repeated(3)
    assert len(b) == 3 * len(a)
    assert [s.start for s in b.spans] == [0, len(a), 2 * len(a)]
    with pytest.raises(ValueError):
        Circuit(1).extend(a)


def test_stabilizer_measure_structure():
    s = PauliString.from_letters("ZZZZ")
    c = stabilizer_measure_circuit(s, 4, bit=3)
    assert c.width == 5 and c.n_bits == 4
    assert c.kinds() == ["CNOT"] * 4 + ["MEASURE", "CONDITIONAL"]
    assert [g.qubits for g in c.gates[:4]] == [(q, 4) for q in range(4)]
    y = stabilizer_measure_circuit(PauliString.from_letters("XYI"), 3)
    assert y.kinds() == ["H", "RXm", "CNOT", "CNOT", "X", "MEASURE", "H", "RXp", "CONDITIONAL"]
    with pytest.raises(ValueError):
        stabilizer_measure_circuit(s, 2)
    with pytest.raises(ValueError):
        stabilizer_measure_circuit(PauliString.identity(3), 3)


def test_adiabatic_schedule():
    s = AdiabaticSchedule()
    assert (s.outer, s.inner, s.dtau, s.total_steps) == (100, 10, 0.01, 1000)
    assert s.beta(0) == 0.0 and s.beta(99) == 1.0
    assert s.beta(33) == pytest.approx(1 / 3)
    assert AdiabaticSchedule(outer=1).beta(0) == 1.0
    with pytest.raises(IndexError):
        s.beta(100)
    with pytest.raises(ValueError):
        AdiabaticSchedule(outer=0)


def test_adiabatic_hamiltonian_interpolates(layout22):
    p = ModelParams(t=0.1, U=1.0)
    for beta in (0.0, 0.4, 1.0):
        Hb = adiabatic_hamiltonian(layout22, p, beta)
        ref = build_hamiltonian(layout22, ModelParams(t=beta * p.t, U=1.0), keep_zero=True)
        assert len(Hb) == len(ref)
        for a, b in zip(Hb, ref):
            assert a.string == b.string and a.coeff == pytest.approx(b.coeff, abs=1e-15)


def test_adiabatic_circuit_size(layout22):
    sched = AdiabaticSchedule(outer=3, inner=2, dtau=0.01)
    c = adiabatic_circuit(layout22, ModelParams(), sched)
    per_step = len(trotter_step(adiabatic_hamiltonian(layout22, ModelParams(), 0.0), 0.01))
    assert len(c) == 6 * per_step
