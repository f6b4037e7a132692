"""Gate-level compilation of Pauli propagators and stabilizer measurements.

Conventions
-----------
``RZ(phi) = diag(exp(-i phi/2), exp(+i phi/2))``; the propagator
``exp(-i c dt P)`` of a Hermitian string uses ``phi = 2 c dt`` (times the
sign bookkeeping described in :func:`compile_propagator`).  ``RXm`` is
``Rx(-pi/2)`` and ``RXp = Rx(+pi/2)`` its inverse, with
``Rx(theta) = exp(-i theta X / 2)``.  The CNOT cascade is a chain over the
support in increasing qubit order, ending on the highest-index qubit.

Every compiled propagator is recorded as a *rotation span* (gate range plus
the Pauli string and angle) so the emulator can optionally execute it with
a single fused Pauli-rotation kernel; both paths are exactly equivalent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .encoder import EncodedHamiltonian, ModelParams, build_hamiltonian
from .lattice import QubitLayout
from .pauli import PauliString

__all__ = [
    "Gate",
    "RotationSpan",
    "Circuit",
    "GATE_KINDS",
    "compile_propagator",
    "trotter_step",
    "stabilizer_measure_circuit",
    "AdiabaticSchedule",
    "adiabatic_hamiltonian",
    "adiabatic_circuit",
]

GATE_KINDS = ("H", "X", "CNOT", "RZ", "RXm", "RXp", "MEASURE", "CONDITIONAL")


class Gate(NamedTuple):
    """One gate.

    ``qubits`` holds the target (or ``(control, target)`` for CNOT);
    ``angle`` is set for RZ; ``bit`` is the classical bit written by
    MEASURE or read by CONDITIONAL; ``inner`` is the gate a CONDITIONAL
    applies when its bit is 1.
    """

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    bit: int | None = None
    inner: "Gate | None" = None

    def text(self) -> str:
        if self.kind == "CONDITIONAL":
            return f"CONDITIONAL c{self.bit} {self.inner.text()}"
        parts = [self.kind, *map(str, self.qubits)]
        if self.kind == "MEASURE":
            parts.append(f"c{self.bit}")
        if self.angle is not None:
            parts.append(repr(float(self.angle)))
        return " ".join(parts)


class RotationSpan(NamedTuple):
    """Gates ``[start, stop)`` implement ``exp(-i theta P)``."""

    start: int
    stop: int
    pauli: PauliString
    theta: float


@dataclass
class Circuit:
    width: int
    gates: list[Gate] = field(default_factory=list)
    n_bits: int = 0
    spans: list[RotationSpan] = field(default_factory=list)

    def _check(self, g: Gate) -> None:
        if g.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {g.kind!r}")
        inner = g.inner if g.kind == "CONDITIONAL" else g
        if inner.kind in ("MEASURE", "CONDITIONAL") and g.kind == "CONDITIONAL":
            raise ValueError("conditional gates must wrap a unitary gate")
        for q in inner.qubits:
            if not 0 <= q < self.width:
                raise ValueError(f"qubit {q} outside circuit width {self.width}")
        if inner.kind == "CNOT" and inner.qubits[0] == inner.qubits[1]:
            raise ValueError("CNOT control equals target")
        if inner.angle is not None and not math.isfinite(inner.angle):
            raise ValueError("non-finite angle")
        bit = g.bit
        if bit is not None:
            self.n_bits = max(self.n_bits, bit + 1)

    def append(self, g: Gate) -> "Circuit":
        self._check(g)
        self.gates.append(g)
        return self

    def extend(self, other: "Circuit") -> "Circuit":
        if other.width > self.width:
            raise ValueError("appended circuit is wider")
        offset = len(self.gates)
        self.gates.extend(other.gates)
        self.n_bits = max(self.n_bits, other.n_bits)
        self.spans.extend(
            RotationSpan(s.start + offset, s.stop + offset, s.pauli, s.theta) for s in other.spans
        )
        return self

    def repeated(self, times: int) -> "Circuit":
        out = Circuit(self.width)
        for _ in range(times):
            out.extend(self)
        return out

    def __len__(self) -> int:
        return len(self.gates)

    @property
    def is_unitary(self) -> bool:
        return all(g.kind not in ("MEASURE", "CONDITIONAL") for g in self.gates)

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    def kinds(self) -> list[str]:
        return [g.kind for g in self.gates]

    def dump_lines(self) -> list[str]:
        return [g.text() for g in self.gates]


def _basis_gates(p: PauliString) -> tuple[list[Gate], list[Gate], int]:
    pre, post, n_y = [], [], 0
    for q in p.support:
        letter = p.letter(q)
        if letter == "X":
            pre.append(Gate("H", (q,)))
            post.append(Gate("H", (q,)))
        elif letter == "Y":
            pre.append(Gate("RXm", (q,)))
            post.append(Gate("RXp", (q,)))
            n_y += 1
    return pre, post, n_y


def compile_propagator(coeff: float, p: PauliString, dt: float) -> Circuit:
    """Circuit for ``exp(-i coeff dt p)`` (exact, no global phase).

    The basis layer maps every letter to ``Z``: ``H Z H = X`` and
    ``RXm^dag Z RXm = -Y``, so the ``Z..Z`` rotation angle picks up a factor
    ``(-1)**(#Y)`` together with the sign of ``p``.
    """
    if p.is_identity:
        raise ValueError("identity string is a global phase; handle it in the caller")
    if not p.is_hermitian:
        raise ValueError(f"{p} is not Hermitian")
    coeff = float(coeff)
    sign = 1.0 if p.phase == 0 else -1.0
    pre, post, n_y = _basis_gates(p)
    support = p.support
    ladder = [Gate("CNOT", (a, b)) for a, b in zip(support, support[1:])]
    phi = 2.0 * coeff * dt * sign * (-1.0) ** n_y
    c = Circuit(p.n)
    for g in pre + ladder:
        c.append(g)
    c.append(Gate("RZ", (support[-1],), phi))
    for g in ladder[::-1] + post:
        c.append(g)
    c.spans.append(RotationSpan(0, len(c.gates), p, coeff * dt))
    return c


def trotter_step(H: EncodedHamiltonian, dt: float) -> Circuit:
    """First-order product of term propagators in the Hamiltonian's order.

    Identity terms only contribute a global phase and are skipped.
    """
    c = Circuit(H.n)
    for term in H:
        if term.string.is_identity:
            continue
        c.extend(compile_propagator(term.coeff, term.string, dt))
    return c


def stabilizer_measure_circuit(s: PauliString, ancilla: int, bit: int = 0, width: int | None = None) -> Circuit:
    """Projective measurement of ``s`` through one ancilla.

    The support is rotated to the Z basis, its parity is collected on the
    ancilla with a CNOT fan-in (an extra X absorbs a negative sign), the
    ancilla is measured into ``bit`` (1 means eigenvalue -1), the basis
    change is undone and the ancilla is reset by a conditional X.  For an
    all-Z string this is the plain CNOT fan-in.
    """
    if not s.is_hermitian:
        raise ValueError(f"{s} is not Hermitian")
    if s.is_identity:
        raise ValueError("cannot measure the identity")
    width = max(s.n, ancilla + 1) if width is None else width
    if ancilla < s.n and ancilla in s.support:
        raise ValueError("ancilla overlaps the stabilizer support")
    pre, post, n_y = _basis_gates(s)
    c = Circuit(width)
    for g in pre:
        c.append(g)
    for q in s.support:
        c.append(Gate("CNOT", (q, ancilla)))
    negative = (s.phase == 2) != (n_y % 2 == 1)
    if negative:
        c.append(Gate("X", (ancilla,)))
    c.append(Gate("MEASURE", (ancilla,), bit=bit))
    for g in post:
        c.append(g)
    c.append(Gate("CONDITIONAL", (), bit=bit, inner=Gate("X", (ancilla,))))
    return c


@dataclass(frozen=True)
class AdiabaticSchedule:
    """Piecewise-constant linear ramp of the hopping strength.

    ``outer`` steps of ``inner`` Trotter steps of size ``dtau`` each;
    ``beta(step) = step / (outer - 1)`` (1 for a single step).
    """

    outer: int = 100
    inner: int = 10
    dtau: float = 0.01

    def __post_init__(self):
        if self.outer < 1 or self.inner < 1 or not self.dtau > 0:
            raise ValueError("invalid adiabatic schedule")

    def beta(self, step: int) -> float:
        if not 0 <= step < self.outer:
            raise IndexError(step)
        return 1.0 if self.outer == 1 else step / (self.outer - 1)

    @property
    def total_steps(self) -> int:
        return self.outer * self.inner


def adiabatic_hamiltonian(layout: QubitLayout, params: ModelParams, beta: float) -> EncodedHamiltonian:
    """``(1 - beta) H(t=0) + beta H`` = on-site terms plus ``beta`` times hopping.

    Built with a fixed term structure for every ``beta``; no penalties.
    """
    base = build_hamiltonian(layout, params, include_penalties=False, keep_zero=True)
    return base.scaled({"hopping": beta})


def adiabatic_circuit(layout: QubitLayout, params: ModelParams, schedule: AdiabaticSchedule) -> Circuit:
    out = Circuit(layout.n_qubits)
    for step in range(schedule.outer):
        step_circ = trotter_step(adiabatic_hamiltonian(layout, params, schedule.beta(step)), schedule.dtau)
        for _ in range(schedule.inner):
            out.extend(step_circ)
    return out


def iter_schedule(layout: QubitLayout, params: ModelParams, schedule: AdiabaticSchedule) -> Iterable[tuple[float, Circuit]]:
    """Yield ``(beta, one Trotter step)`` per outer step (run ``inner`` times each)."""
    for step in range(schedule.outer):
        beta = schedule.beta(step)
        yield beta, trotter_step(adiabatic_hamiltonian(layout, params, beta), schedule.dtau)
