"""End-to-end workflows on the emulator and on the exact sector oracle.

Circuit path::

    state = prepare_initial_state(layout, seed)
    state, _ = fix_stabilizers(state, layout)
    state = adiabatic_ground_state(state, layout, params, schedule)
    state = inject_excitation(state, layout, "spin", Site.at(0, 0))
    traj = evolve_and_record(state, layout, H, total_tau, dt, record_every)

:class:`SectorSimulation` offers the same steps with exact propagation in
the stabilizer sector (used as the reference for the circuit path and for
lattices too large for a dense statevector).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse.linalg as spla

from .circuit import AdiabaticSchedule, Circuit, Gate, iter_schedule, adiabatic_hamiltonian
from .circuit import stabilizer_measure_circuit, trotter_step
from .emulator import StateVector, apply_pauli, expectation, project, run
from .encoder import (
    EncodedHamiltonian,
    ModelParams,
    build_hamiltonian,
    excitation_operator,
    stabilizers,
)
from .lattice import QubitLayout, Site
from .pauli import PauliString, commutes
from .sector import SectorBasis, SectorError, solve_gf2

__all__ = [
    "Record",
    "Trajectory",
    "StabilizerFixingError",
    "checkerboard_mask",
    "ghz_circuit",
    "prepare_initial_state",
    "correction_paulis",
    "fix_stabilizers",
    "adiabatic_ground_state",
    "inject_excitation",
    "record_observables",
    "evolve_and_record",
    "ConvergenceResult",
    "trotter_convergence",
    "first_peak",
    "loglog_slope",
    "SectorSimulation",
]


class StabilizerFixingError(RuntimeError):
    """A stabilizer outcome cannot be corrected (inconsistent stabilizer set)."""


# --------------------------------------------------------------------------
# records
# --------------------------------------------------------------------------

@dataclass
class Record:
    """Observables at one time; per-site lists follow ``layout.sites``."""

    tau: float
    Sz: list[float]
    N: list[float]
    rishon: list[float]
    energy: float
    stabilizers: list[float]
    norm: float

    @property
    def total_charge(self) -> float:
        return float(sum(self.N))

    @property
    def total_Sz(self) -> float:
        return float(sum(self.Sz))

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class Trajectory:
    records: list[Record] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def taus(self) -> np.ndarray:
        return np.array([r.tau for r in self.records])

    def series(self, name: str, index: int | None = None) -> np.ndarray:
        vals = [getattr(r, name) for r in self.records]
        if index is not None:
            vals = [v[index] for v in vals]
        return np.asarray(vals, dtype=float)

    def max_stabilizer_deviation(self) -> float:
        return max(max(abs(s - 1.0) for s in r.stabilizers) for r in self.records) if self.records else 0.0

    def conservation_drift(self) -> dict[str, float]:
        q = self.series("total_charge")
        sz = self.series("total_Sz")
        nrm = self.series("norm")
        return {
            "charge": float(np.max(np.abs(q - q[0]))),
            "Sz": float(np.max(np.abs(sz - sz[0]))),
            "norm": float(np.max(np.abs(nrm - 1.0))),
            "stabilizers": self.max_stabilizer_deviation(),
        }


# --------------------------------------------------------------------------
# state preparation
# --------------------------------------------------------------------------

def checkerboard_mask(layout: QubitLayout) -> int:
    """Matter bits of the configuration with ``u`` occupied on even sites, ``d`` on odd."""
    mask = 0
    for s in layout.sites:
        mask |= 1 << layout.matter(s, "u" if s.parity == "even" else "d")
    return mask


def ghz_circuit(layout: QubitLayout, width: int | None = None) -> Circuit:
    """Symmetric superposition of the two checkerboard configurations.

    A Hadamard on the first matter qubit, a CNOT fan-out to the other
    matter qubits (giving ``|0..0> + |1..1>``) and X gates on the
    checkerboard pattern.
    """
    c = Circuit(width or layout.n_qubits)
    matter = sorted(layout.matter(s, f) for s in layout.sites for f in layout.flavors)
    head = matter[0]
    c.append(Gate("H", (head,)))
    for q in matter[1:]:
        c.append(Gate("CNOT", (head, q)))
    mask = checkerboard_mask(layout)
    for q in matter:
        if mask >> q & 1:
            c.append(Gate("X", (q,)))
    return c


def prepare_initial_state(layout: QubitLayout, seed: int | None = None) -> StateVector:
    """Checkerboard GHZ state on the matter qubits, link qubits in ``|0>``."""
    state = StateVector(layout.n_qubits, seed=seed)
    run(ghz_circuit(layout), state)
    return state


def correction_paulis(layout: QubitLayout, stabs: Sequence[PauliString] | None = None) -> list[PauliString | None]:
    """Per-stabilizer corrections on link (and extra-rishon) qubits.

    ``C_i`` anticommutes with ``S_i`` and commutes with ``S_1 .. S_{i-1}``;
    ``None`` when no such operator exists (the outcome of ``S_i`` is then
    fixed by the earlier ones).  Found by Gaussian elimination over GF(2)
    on the symplectic form; the minimal particular solution is used.
    """
    stabs = list(stabilizers(layout).all if stabs is None else stabs)
    n = layout.n_qubits
    qubits = [layout.link_qubit(l) for l in layout.links]
    if layout.extra_rishon:
        qubits.append(layout.extra_qubit)
    m = len(qubits)
    out: list[PauliString | None] = []
    for i, s in enumerate(stabs):
        rows = []
        for j in range(i + 1):
            sj = stabs[j]
            # unknown bits: x on qubits (0..m-1), z on qubits (m..2m-1)
            mask = 0
            for k, q in enumerate(qubits):
                if sj.z >> q & 1:
                    mask |= 1 << k
                if sj.x >> q & 1:
                    mask |= 1 << (m + k)
            rows.append((mask, 1 if j == i else 0))
        sol = solve_gf2(2 * m, rows)
        if sol is None:
            out.append(None)
            continue
        v = sol[0]
        ops = {}
        for k, q in enumerate(qubits):
            xb, zb = v >> k & 1, v >> (m + k) & 1
            if xb or zb:
                ops[q] = {(1, 0): "X", (0, 1): "Z", (1, 1): "Y"}[(xb, zb)]
        c = PauliString.from_ops(n, ops)
        assert not commutes(c, s) and all(commutes(c, stabs[j]) for j in range(i))
        out.append(c)
    return out


def _conditional_pauli(c: Circuit, p: PauliString, bit: int) -> None:
    for q in p.support:
        letter = p.letter(q)
        if letter in ("Z", "Y"):
            c.append(Gate("H", (q,)))
            c.append(Gate("CONDITIONAL", (), bit=bit, inner=Gate("X", (q,))))
            c.append(Gate("H", (q,)))
        if letter in ("X", "Y"):
            c.append(Gate("CONDITIONAL", (), bit=bit, inner=Gate("X", (q,))))


def fixing_circuit(
    layout: QubitLayout, stabs: Sequence[PauliString] | None = None
) -> tuple[Circuit, list[PauliString | None]]:
    """Measure every stabilizer on an ancilla (qubit ``n``) and correct conditionally."""
    stabs = list(stabilizers(layout).all if stabs is None else stabs)
    corrections = correction_paulis(layout, stabs)
    n = layout.n_qubits
    circ = Circuit(n + 1)
    for bit, (s, corr) in enumerate(zip(stabs, corrections)):
        circ.extend(stabilizer_measure_circuit(s.embed(n + 1, list(range(n))), n, bit, width=n + 1))
        if corr is not None:
            _conditional_pauli(circ, corr.embed(n + 1, list(range(n))), bit)
    return circ, corrections


def fix_stabilizers(
    state: StateVector, layout: QubitLayout, stabs: Sequence[PauliString] | None = None
) -> tuple[StateVector, list[int]]:
    """Project onto the joint +1 eigenspace by measurement and correction.

    Stabilizers are handled in the given order (default: vertices, then
    plaquettes).  Returns the fixed state and the raw outcome bits
    (1 = eigenvalue -1 before correction).
    """
    circ, corrections = fixing_circuit(layout, stabs)
    n = layout.n_qubits
    ext = StateVector(n + 1, np.concatenate([state.amps, np.zeros_like(state.amps)]))
    ext.rng = state.rng
    _, bits = run(circ, ext)
    for bit, corr in zip(bits, corrections):
        if bit and corr is None:
            raise StabilizerFixingError("stabilizer outcome -1 without an admissible correction")
    if ext.prob_one(n) > 1e-12:
        raise AssertionError("ancilla not reset")
    state.amps = np.ascontiguousarray(ext.amps[: 1 << n])
    state.amps /= np.linalg.norm(state.amps)
    return state, bits


def adiabatic_ground_state(
    state: StateVector,
    layout: QubitLayout,
    params: ModelParams,
    schedule: AdiabaticSchedule | None = None,
    fuse: bool = True,
) -> StateVector:
    """Ramp the hopping from 0 to ``params.t`` with Trotterised evolution."""
    schedule = schedule or AdiabaticSchedule()
    for _, step in iter_schedule(layout, params, schedule):
        for _ in range(schedule.inner):
            run(step, state, fuse=fuse)
    return state


def inject_excitation(state: StateVector, layout: QubitLayout, kind: str, site: Site) -> StateVector:
    """Spin flip or charge removal at ``site`` by post-selection and a Pauli string.

    spin: post-select ``|1_u 0_d>`` and apply ``X_u X_d``;
    charge: post-select ``u`` in ``|1>`` and apply the charge operator
    (requires the extra rishon and ``site == (0, 0)``).
    """
    op = excitation_operator(layout, kind, site)
    project(state, layout.matter(site, "u"), 1)
    if kind == "spin":
        project(state, layout.matter(site, "d"), 0)
    return apply_pauli(state, op)


# --------------------------------------------------------------------------
# observables
# --------------------------------------------------------------------------

def _z_expectations(state: StateVector) -> np.ndarray:
    probs = np.abs(state.amps) ** 2
    total = probs.sum()
    out = np.empty(state.n)
    for k in range(state.n):
        out[k] = total - 2.0 * probs.reshape(-1, 2, 1 << k)[:, 1, :].sum()
    return out


def _assemble(layout, tau, z, energy, stabs, norm) -> Record:
    Sz, N = [], []
    for s in layout.sites:
        zu, zd = z[layout.matter(s, "u")], z[layout.matter(s, "d")]
        Sz.append(float(0.25 * (zd - zu)))
        N.append(float(1.0 - 0.5 * (zu + zd)))
    rishon = [float(0.5 * (1.0 - z[layout.link_qubit(l)])) for l in layout.links]
    return Record(float(tau), Sz, N, rishon, float(energy), [float(v) for v in stabs], float(norm))


def record_observables(
    state: StateVector,
    layout: QubitLayout,
    H: EncodedHamiltonian,
    tau: float = 0.0,
    stabs: Sequence[PauliString] | None = None,
) -> Record:
    stabs = list(stabilizers(layout).all if stabs is None else stabs)
    z = _z_expectations(state)
    energy = expectation(state, H.pauli_sum) if len(H) else 0.0
    stab_vals = [expectation(state, s) for s in stabs]
    return _assemble(layout, tau, z, energy, stab_vals, state.norm)


def evolve_and_record(
    state: StateVector,
    layout: QubitLayout,
    H: EncodedHamiltonian,
    total_tau: float,
    dt: float,
    record_every: int = 1,
    fuse: bool = True,
) -> Trajectory:
    """First-order Trotter evolution with a record every ``record_every`` steps."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    steps = int(round(total_tau / dt))
    stabs = stabilizers(layout).all
    step = trotter_step(H, dt)
    traj = Trajectory([record_observables(state, layout, H, 0.0, stabs)])
    for k in range(1, steps + 1):
        run(step, state, fuse=fuse)
        if k % record_every == 0 or k == steps:
            traj.records.append(record_observables(state, layout, H, k * dt, stabs))
    return traj


# --------------------------------------------------------------------------
# analysis
# --------------------------------------------------------------------------

def first_peak(taus: Sequence[float], values: Sequence[float], rel_height: float = 0.25) -> float | None:
    """Time of the first local maximum of ``|v(tau) - v(0)|``.

    The deviation is smoothed with a 3-point moving average; local maxima
    lower than ``rel_height`` times the largest smoothed deviation are
    ignored, so that small fast oscillations riding on the slow response do
    not count as peaks.
    """
    v = np.abs(np.asarray(values, dtype=float) - values[0])
    if len(v) < 3:
        return None
    sm = v.copy()
    sm[1:-1] = (v[:-2] + v[1:-1] + v[2:]) / 3.0
    floor = rel_height * sm.max()
    if sm.max() == 0.0:
        return None
    for i in range(1, len(sm) - 1):
        if sm[i] > sm[i - 1] and sm[i] >= sm[i + 1] and sm[i] >= floor:
            return float(taus[i])
    return None


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Least-squares slope of ``log y`` against ``log x`` (None for fewer than 2 points)."""
    if len(xs) < 2:
        return None
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


@dataclass
class ConvergenceResult:
    dts: list[float]
    errors: list[float]
    slope: float | None


def _double_occupancy_sv(state: StateVector, layout: QubitLayout) -> float:
    probs = np.abs(state.amps) ** 2
    idx = np.arange(len(probs), dtype=np.int64)
    tot = 0.0
    for s in layout.sites:
        u, d = layout.matter(s, "u"), layout.matter(s, "d")
        tot += probs[(idx >> u) & (idx >> d) & 1 == 1].sum()
    return float(tot / len(layout.sites))


def trotter_convergence(
    layout: QubitLayout,
    params: ModelParams,
    dt_list: Sequence[float],
    tau_max: float,
    state: StateVector | None = None,
    seed: int = 0,
    H: EncodedHamiltonian | None = None,
    fuse: bool = True,
) -> ConvergenceResult:
    """Forward-backward Trotter check on the site-averaged double occupancy.

    Each ``dt`` evolves to ``tau_max`` and back with the same term order and
    the time step negated; an exact propagator would return the initial
    state.  The default initial state is the stabilizer-fixed checkerboard
    superposition.
    """
    dt_list = [float(d) for d in dt_list]
    if any(a <= b for a, b in zip(dt_list, dt_list[1:])):
        raise ValueError("dt list must be strictly decreasing")
    if state is None:
        state, _ = fix_stabilizers(prepare_initial_state(layout, seed), layout)
    H = build_hamiltonian(layout, params) if H is None else H
    d0 = _double_occupancy_sv(state, layout)
    errors = []
    for dt in dt_list:
        steps = int(round(tau_max / dt))
        s = StateVector(state.n, state.amps)
        fwd, bwd = trotter_step(H, dt), trotter_step(H, -dt)
        for _ in range(steps):
            run(fwd, s, fuse=fuse)
        for _ in range(steps):
            run(bwd, s, fuse=fuse)
        errors.append(abs(_double_occupancy_sv(s, layout) - d0))
    return ConvergenceResult(dt_list, errors, loglog_slope(dt_list, errors))


# --------------------------------------------------------------------------
# exact sector path
# --------------------------------------------------------------------------

class SectorSimulation:
    """The protocol steps with exact propagation inside the stabilizer sector.

    States are sector coordinates (length ``basis.dim``).
    """

    def __init__(self, layout: QubitLayout, params: ModelParams):
        self.layout = layout
        self.params = params
        self.stabs = stabilizers(layout).all
        self.basis = SectorBasis(self.stabs)
        n = layout.n_qubits
        self._z = {}
        for k in range(n):
            vals = self.basis.diagonal_values(PauliString.single(n, k, "Z"))
            self._z[k] = None if vals is None else vals.real
        self.H = build_hamiltonian(layout, params)
        self.H_matrix = self.basis.operator(self.H.pauli_sum)

    # states ---------------------------------------------------------------
    def initial_state(self) -> np.ndarray:
        """Sector image of the fixed checkerboard superposition.

        Vertex outcomes are deterministic on both checkerboard components,
        so the vertex corrections act on basis states; the plaquettes are
        then enforced by projection (all outcome branches agree up to sign).
        """
        layout, n = self.layout, self.layout.n_qubits
        mask = checkerboard_mask(layout)
        full = sum(1 << layout.matter(s, f) for s in layout.sites for f in layout.flavors)
        corrections = correction_paulis(layout, self.stabs)
        comps = []
        for b in (mask, mask ^ full):
            amp = 1 / math.sqrt(2)
            outcomes = []
            for s, corr in zip(self.stabs, corrections):
                if s.x:
                    continue
                val = (1j ** s.q) * (-1) ** bin(s.z & b).count("1")
                outcomes.append(val.real < 0)
                if val.real < 0:
                    if corr is None:
                        raise StabilizerFixingError("uncorrectable vertex outcome")
                    ph = (1j ** corr.q) * (-1) ** bin(corr.z & b).count("1")
                    b, amp = b ^ corr.x, amp * ph
            comps.append((b, amp, outcomes))
        if comps[0][2] != comps[1][2]:
            raise SectorError("vertex outcomes differ between the two components")
        coeffs = self.basis.project_sparse(np.array([c[0] for c in comps]), np.array([c[1] for c in comps]))
        return coeffs / np.linalg.norm(coeffs)

    def evolve(self, coeffs: np.ndarray, H, tau: float) -> np.ndarray:
        M = H if not isinstance(H, EncodedHamiltonian) else self.basis.operator(H.pauli_sum)
        if tau == 0:
            return coeffs.copy()
        return spla.expm_multiply(-1j * tau * M, coeffs)

    def adiabatic(self, coeffs: np.ndarray, schedule: AdiabaticSchedule | None = None) -> np.ndarray:
        """Piecewise-constant ramp with exact evolution over each outer step."""
        schedule = schedule or AdiabaticSchedule()
        base = adiabatic_hamiltonian(self.layout, self.params, 0.0)
        onsite = self.basis.operator(base.select("onsite").pauli_sum)
        hop = self.basis.operator(build_hamiltonian(self.layout, self.params).select("hopping").pauli_sum)
        for step in range(schedule.outer):
            beta = schedule.beta(step)
            coeffs = self.evolve(coeffs, onsite + beta * hop, schedule.inner * schedule.dtau)
        return coeffs

    def inject(self, coeffs: np.ndarray, kind: str, site: Site, threshold: float = 1e-12) -> np.ndarray:
        op = excitation_operator(self.layout, kind, site)
        keep = [(self.layout.matter(site, "u"), 1)]
        if kind == "spin":
            keep.append((self.layout.matter(site, "d"), 0))
        v = coeffs.copy()
        for q, outcome in keep:
            z = self._z[q]
            v = v * (z == (1 - 2 * outcome))
            p = float(np.vdot(v, v).real)
            if p <= threshold:
                from .emulator import PostSelectionError

                raise PostSelectionError(f"post-selection impossible: P(q{q}={outcome}) = {p:.3e}")
        v = v / np.linalg.norm(v)
        return self.basis.string_matrix(op) @ v

    # observables ------------------------------------------------------------
    def record(self, coeffs: np.ndarray, tau: float = 0.0, H_matrix=None) -> Record:
        w = np.abs(coeffs) ** 2
        z = np.array([0.0 if self._z[k] is None else float(w @ self._z[k]) for k in range(self.layout.n_qubits)])
        M = self.H_matrix if H_matrix is None else H_matrix
        energy = float(np.vdot(coeffs, M @ coeffs).real)
        stabs = [self.basis.expectation(s, coeffs) for s in self.stabs]
        return _assemble(self.layout, tau, z, energy, stabs, float(np.linalg.norm(coeffs)))

    def evolve_and_record(self, coeffs: np.ndarray, total_tau: float, record_dt: float) -> Trajectory:
        steps = int(round(total_tau / record_dt))
        traj = Trajectory([self.record(coeffs, 0.0)])
        A = -1j * self.H_matrix
        states = spla.expm_multiply(A, coeffs, start=0.0, stop=steps * record_dt, num=steps + 1, endpoint=True)
        for k in range(1, steps + 1):
            traj.records.append(self.record(states[k], k * record_dt))
        return traj
