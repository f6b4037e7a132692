"""Dense statevector emulator.

Basis index bit ``k`` is qubit ``k``.  Randomness is consumed only by
MEASURE gates, from the state's own seeded generator, so a run is
reproducible bit-for-bit from the seed.
"""

from __future__ import annotations

import math

import numpy as np

from . import kernels
from .circuit import Circuit, Gate
from .pauli import PauliString, PauliSum

__all__ = [
    "StateVector",
    "PostSelectionError",
    "run",
    "expectation",
    "project",
    "apply_pauli",
    "circuit_unitary",
    "GATE_MATRICES",
    "LARGE_REGISTER",
]

LARGE_REGISTER = 20
_S = 1 / math.sqrt(2)
GATE_MATRICES = {
    "H": np.array([[_S, _S], [_S, -_S]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "RXm": np.array([[_S, 1j * _S], [1j * _S, _S]]),
    "RXp": np.array([[_S, -1j * _S], [-1j * _S, _S]]),
}


def rz_matrix(phi: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * phi), np.exp(0.5j * phi)])


class PostSelectionError(RuntimeError):
    """Raised when a requested outcome has (numerically) zero probability."""


class StateVector:
    """``2**n`` complex amplitudes with a seeded generator for measurements."""

    def __init__(self, n: int, amplitudes: np.ndarray | None = None, seed: int | None = None):
        self.n = n
        if amplitudes is None:
            self.amps = np.zeros(1 << n, dtype=complex)
            self.amps[0] = 1.0
        else:
            amps = np.ascontiguousarray(amplitudes, dtype=complex).copy()
            if amps.shape != (1 << n,):
                raise ValueError("amplitude vector length does not match 2**n")
            self.amps = amps
        self.rng = np.random.default_rng(seed)

    @classmethod
    def basis_state(cls, n: int, index: int, seed: int | None = None) -> "StateVector":
        s = cls(n, seed=seed)
        s.amps[0] = 0.0
        s.amps[index] = 1.0
        return s

    def copy(self) -> "StateVector":
        out = StateVector(self.n, self.amps)
        out.rng = np.random.Generator(type(self.rng.bit_generator)())
        out.rng.bit_generator.state = self.rng.bit_generator.state
        return out

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def prob_one(self, qubit: int) -> float:
        v = self.amps.reshape(-1, 2, 1 << qubit)
        return float(np.vdot(v[:, 1, :], v[:, 1, :]).real)

    def fidelity(self, other: "StateVector | np.ndarray") -> float:
        b = other.amps if isinstance(other, StateVector) else np.asarray(other)
        return float(abs(np.vdot(self.amps, b)) ** 2)


def _apply_unitary_gate(psi: np.ndarray, g: Gate, kern) -> None:
    if g.kind == "CNOT":
        kern.apply_cnot(psi, g.qubits[0], g.qubits[1])
    elif g.kind == "RZ":
        m = rz_matrix(g.angle)
        kern.apply_1q(psi, g.qubits[0], m[0, 0], 0.0, 0.0, m[1, 1])
    else:
        m = GATE_MATRICES[g.kind]
        kern.apply_1q(psi, g.qubits[0], m[0, 0], m[0, 1], m[1, 0], m[1, 1])


def _measure(state: StateVector, qubit: int) -> int:
    p1 = state.prob_one(qubit)
    outcome = int(state.rng.random() < p1)
    p = p1 if outcome else 1.0 - p1
    v = state.amps.reshape(-1, 2, 1 << qubit)
    v[:, 1 - outcome, :] = 0.0
    state.amps /= math.sqrt(p)
    return outcome


def run(circuit: Circuit, state: StateVector, fuse: bool = True, backend=None) -> tuple[StateVector, list[int]]:
    """Apply ``circuit`` to ``state`` in place.

    Parameters
    ----------
    fuse : bool
        Execute recorded rotation spans with one Pauli-rotation kernel call
        instead of their individual gates (identical result).
    backend : module, optional
        Kernel module; defaults to :data:`kernels.backend`.

    Returns
    -------
    (state, bits)
    """
    if circuit.width != state.n:
        raise ValueError(f"circuit width {circuit.width} != state width {state.n}")
    kern = kernels.backend if backend is None else backend
    psi = state.amps
    bits = [0] * circuit.n_bits
    span_at = {s.start: s for s in circuit.spans} if fuse else {}
    i, ngates = 0, len(circuit.gates)
    while i < ngates:
        span = span_at.get(i)
        if span is not None:
            p = span.pauli
            kern.rotate_pauli(psi, p.x, p.z, p.q, span.theta)
            i = span.stop
            continue
        g = circuit.gates[i]
        if g.kind == "MEASURE":
            bits[g.bit] = _measure(state, g.qubits[0])
        elif g.kind == "CONDITIONAL":
            if bits[g.bit]:
                _apply_unitary_gate(psi, g.inner, kern)
        else:
            _apply_unitary_gate(psi, g, kern)
        i += 1
    return state, bits


def circuit_unitary(circuit: Circuit, fuse: bool = False) -> np.ndarray:
    """Dense unitary of a measurement-free circuit (small widths only)."""
    if not circuit.is_unitary:
        raise ValueError("circuit contains measurements")
    if circuit.width > 12:
        raise ValueError("circuit too wide for a dense unitary")
    dim = 1 << circuit.width
    out = np.empty((dim, dim), dtype=complex)
    for k in range(dim):
        s = StateVector.basis_state(circuit.width, k)
        run(circuit, s, fuse=fuse)
        out[:, k] = s.amps
    return out


def apply_pauli(state: StateVector, p: PauliString) -> StateVector:
    """Exact in-place action of ``p`` including its phase."""
    if p.n != state.n:
        raise ValueError("width mismatch")
    kernels.backend.apply_pauli(state.amps, p.x, p.z, p.q)
    return state


def expectation(state: StateVector, obs: PauliSum | PauliString) -> float:
    """``<psi|obs|psi>`` for a Hermitian observable."""
    if isinstance(obs, PauliString):
        obs = PauliSum(obs.n, [(1.0, obs)])
    if obs.n != state.n:
        raise ValueError("width mismatch")
    if not obs.is_hermitian():
        raise ValueError("observable is not Hermitian")
    total = 0.0 + 0.0j
    for c, p in obs:
        if p.is_identity:
            total += c * np.vdot(state.amps, state.amps)
        else:
            total += c * kernels.backend.expect_pauli(state.amps, p.x, p.z, p.q)
    if abs(total.imag) > 1e-10 * max(1.0, abs(total.real)):
        raise ArithmeticError(f"expectation has imaginary part {total.imag}")
    return float(total.real)


def project(state: StateVector, qubit: int, outcome: int, threshold: float = 1e-12) -> StateVector:
    """Deterministic post-selection of ``qubit`` on ``outcome`` (in place)."""
    p1 = state.prob_one(qubit)
    p = p1 if outcome else 1.0 - p1
    if p <= threshold:
        raise PostSelectionError(
            f"post-selection impossible: P(q{qubit}={outcome}) = {p:.3e}"
        )
    v = state.amps.reshape(-1, 2, 1 << qubit)
    v[:, 1 - outcome, :] = 0.0
    state.amps /= math.sqrt(p)
    return state
