"""Phase-tracked Pauli strings in symplectic form.

A :class:`PauliString` on ``n`` qubits is stored as two integer bit masks
``x`` and ``z`` (bit ``k`` refers to qubit ``k``) plus a quarter-turn phase.
Internally the operator is ``i**q * X**x * Z**z`` with the X factor to the
left of the Z factor on every qubit, so that multiplication only needs the
overlap ``popcount(z1 & x2)``.  The public :attr:`PauliString.phase` refers
to the familiar letter form, where ``Y = i X Z``.

Text form lists letters in global qubit order (qubit 0 first), optionally
preceded by ``+``, ``-``, ``+i``/``i`` or ``-i``.  The minus sign may be
written as ``-`` or as the unicode minus.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "PauliString",
    "PauliSum",
    "LinkParityError",
    "multiply",
    "commutes",
    "link_merge",
    "to_dense",
    "DENSE_QUBIT_CAP",
    "string_action",
    "to_sparse",
]

DENSE_QUBIT_CAP = 12
COEFF_TOL = 1e-15

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}
_PHASE_PREFIX = {0: "", 1: "+i", 2: "-", 3: "-i"}
_PHASE_VALUE = (1, 1j, -1, -1j)


class LinkParityError(ValueError):
    """Raised when a rishon pair is acted on by a parity-odd letter pair."""


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliString:
    """Multi-qubit Pauli operator ``phase * P_0 (x) P_1 (x) ... P_{n-1}``."""

    n: int
    x: int
    z: int
    q: int = 0  # i**q in front of the X**x Z**z factorisation

    def __post_init__(self):
        full = (1 << self.n) - 1
        if self.x & ~full or self.z & ~full:
            raise ValueError("mask wider than qubit count")
        object.__setattr__(self, "q", self.q % 4)

    # construction -------------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0, 0)

    @classmethod
    def from_letters(cls, letters: str) -> "PauliString":
        """Parse ``"[+|-|+i|-i]XYZI..."`` (qubit 0 first)."""
        s = letters.strip().replace("−", "-")
        k = 0
        if s.startswith("-i"):
            k, s = 3, s[2:]
        elif s.startswith("+i"):
            k, s = 1, s[2:]
        elif s.startswith("i"):
            k, s = 1, s[1:]
        elif s.startswith("-"):
            k, s = 2, s[1:]
        elif s.startswith("+"):
            s = s[1:]
        x = z = 0
        for pos, ch in enumerate(s):
            try:
                xb, zb = _LETTER_BITS[ch]
            except KeyError:
                raise ValueError(f"unknown Pauli letter {ch!r} in {letters!r}") from None
            x |= xb << pos
            z |= zb << pos
        return cls.from_phase(len(s), x, z, k)

    @classmethod
    def from_phase(cls, n: int, x: int, z: int, phase: int = 0) -> "PauliString":
        """Build from masks with ``phase`` quarter turns in letter form."""
        return cls(n, x, z, phase + _popcount(x & z))

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliString":
        xb, zb = _LETTER_BITS[letter]
        return cls.from_phase(n, xb << qubit, zb << qubit)

    @classmethod
    def from_ops(cls, n: int, ops: dict[int, str], phase: int = 0) -> "PauliString":
        """Build from a ``{qubit: letter}`` mapping."""
        x = z = 0
        for qubit, letter in ops.items():
            xb, zb = _LETTER_BITS[letter]
            x |= xb << qubit
            z |= zb << qubit
        return cls.from_phase(n, x, z, phase)

    # properties ---------------------------------------------------------
    @property
    def phase(self) -> int:
        """Quarter turns in front of the letter form (0, 1, 2, 3)."""
        return (self.q - _popcount(self.x & self.z)) % 4

    @property
    def phase_value(self) -> complex:
        return _PHASE_VALUE[self.phase]

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def support(self) -> list[int]:
        m = self.x | self.z
        return [k for k in range(self.n) if m >> k & 1]

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def is_hermitian(self) -> bool:
        return self.phase in (0, 2)

    def letter(self, qubit: int) -> str:
        return _BITS_LETTER[(self.x >> qubit & 1, self.z >> qubit & 1)]

    def letters(self) -> str:
        return "".join(self.letter(k) for k in range(self.n))

    def __str__(self) -> str:
        return _PHASE_PREFIX[self.phase] + self.letters()

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"

    # algebra ------------------------------------------------------------
    def __mul__(self, other):
        if isinstance(other, PauliString):
            return multiply(self, other)
        return NotImplemented

    def with_phase(self, phase: int) -> "PauliString":
        return PauliString.from_phase(self.n, self.x, self.z, phase)

    def times_phase(self, quarter_turns: int) -> "PauliString":
        return PauliString(self.n, self.x, self.z, self.q + quarter_turns)

    def adjoint(self) -> "PauliString":
        # (i^k L)^dag = i^{-k} L for Hermitian letters
        return self.with_phase(-self.phase)

    def hermitian_part(self) -> tuple[float, "PauliString"]:
        """Split a Hermitian string into ``(+-1, unsigned string)``."""
        if not self.is_hermitian:
            raise ValueError(f"{self} is not Hermitian")
        return (1.0 if self.phase == 0 else -1.0), self.with_phase(0)

    def restrict(self, qubits: Sequence[int]) -> "PauliString":
        """Return the string on ``qubits`` only (letters copied, phase kept)."""
        ops = {i: self.letter(q) for i, q in enumerate(qubits)}
        return PauliString.from_ops(len(qubits), ops, self.phase)

    def embed(self, n: int, qubits: Sequence[int]) -> "PauliString":
        """Place this string onto positions ``qubits`` of an ``n``-qubit register."""
        ops = {qubits[k]: self.letter(k) for k in range(self.n)}
        return PauliString.from_ops(n, ops, self.phase)


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Exact product ``a @ b`` including phase."""
    if a.n != b.n:
        raise ValueError(f"qubit count mismatch: {a.n} vs {b.n}")
    # X^x1 Z^z1 X^x2 Z^z2 = (-1)^{|z1 & x2|} X^{x1^x2} Z^{z1^z2}
    sign = 2 * (_popcount(a.z & b.x) & 1)
    return PauliString(a.n, a.x ^ b.x, a.z ^ b.z, a.q + b.q + sign)


def commutes(a: PauliString, b: PauliString) -> bool:
    if a.n != b.n:
        raise ValueError(f"qubit count mismatch: {a.n} vs {b.n}")
    return (_popcount(a.x & b.z) + _popcount(a.z & b.x)) % 2 == 0


def link_merge(
    s: PauliString,
    pairs: Sequence[tuple[int, int]],
    new_index: Sequence[int],
    n_new: int,
    drop: Iterable[int] = (),
) -> PauliString:
    """Compress rishon pairs onto single link qubits.

    Each ``(a, b)`` pair is projected onto ``span{|00>, |11>}`` with
    ``|00> -> |0>`` and ``|11> -> |1>``.  Qubits listed in ``drop`` are
    frozen in ``|0>`` (absent boundary rishons): ``Z`` and ``I`` evaluate to
    one there, ``X``/``Y`` are rejected.  All other qubits are relocated via
    ``new_index`` (old position -> new position, ``-1`` for consumed ones);
    merged pairs land on ``new_index[a]``.
    """
    q = s.phase
    x = z = 0
    consumed = set()
    for a, b in pairs:
        xa, za = s.x >> a & 1, s.z >> a & 1
        xb, zb = s.x >> b & 1, s.z >> b & 1
        if xa != xb:
            raise LinkParityError(
                f"link parity violated on qubits ({a}, {b}) of {s}"
            )
        # letter form: (i^{x za} X^x Z^za)(i^{x zb} X^x Z^zb) -> (-1)^{x za zb} L(x, za^zb)
        if xa and za and zb:
            q += 2
        target = new_index[a]
        x |= xa << target
        z |= (za ^ zb) << target
        consumed.update((a, b))
    for d in drop:
        if s.x >> d & 1:
            raise LinkParityError(f"off-diagonal letter on frozen qubit {d} of {s}")
        consumed.add(d)
    for k in range(s.n):
        if k in consumed:
            continue
        target = new_index[k]
        x |= (s.x >> k & 1) << target
        z |= (s.z >> k & 1) << target
    return PauliString.from_phase(n_new, x, z, q)


_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def to_dense(op, cap: int = DENSE_QUBIT_CAP) -> np.ndarray:
    """Dense matrix with basis index bit ``k`` equal to qubit ``k``."""
    if isinstance(op, PauliString):
        if op.n > cap:
            raise ValueError(f"{op.n} qubits exceeds dense cap {cap}")
        m = np.ones((1, 1), dtype=complex)
        for k in reversed(range(op.n)):
            m = np.kron(m, _MATS[op.letter(k)])
        return op.phase_value * m
    if isinstance(op, PauliSum):
        if op.n > cap:
            raise ValueError(f"{op.n} qubits exceeds dense cap {cap}")
        out = np.zeros((1 << op.n, 1 << op.n), dtype=complex)
        for c, p in op:
            out += c * to_dense(p, cap)
        return out
    raise TypeError(f"cannot densify {type(op).__name__}")


class PauliSum:
    """Weighted sum of Pauli strings, canonicalised on construction.

    Phases are folded into coefficients so every stored string has letter
    phase +1.  Duplicate strings are merged in first-seen order and entries
    with ``|c| < 1e-15`` are dropped.
    """

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Iterable[tuple[complex, PauliString]] = ()):
        self.n = n
        acc: dict[tuple[int, int], complex] = {}
        for c, p in terms:
            if p.n != n:
                raise ValueError(f"term on {p.n} qubits in a {n}-qubit sum")
            key = (p.x, p.z)
            acc[key] = acc.get(key, 0.0) + c * p.phase_value
        self._terms = []
        for (x, z), c in acc.items():
            if abs(c) < COEFF_TOL:
                continue
            if abs(c.imag) < COEFF_TOL:
                c = float(c.real)
            self._terms.append((c, PauliString.from_phase(n, x, z, 0)))

    @classmethod
    def from_string(cls, p: PauliString, coeff: complex = 1.0) -> "PauliSum":
        return cls(p.n, [(coeff, p)])

    @classmethod
    def identity(cls, n: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n, [(coeff, PauliString.identity(n))])

    def __iter__(self) -> Iterator[tuple[complex, PauliString]]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __getitem__(self, i):
        return self._terms[i]

    @property
    def terms(self) -> list[tuple[complex, PauliString]]:
        return list(self._terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        return PauliSum(self.n, [*self._terms, *other._terms])

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + other * -1.0

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            return PauliSum(
                self.n,
                [(c1 * c2, multiply(p1, p2)) for c1, p1 in self for c2, p2 in other],
            )
        return PauliSum(self.n, [(c * other, p) for c, p in self._terms])

    __rmul__ = __mul__

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(complex(c).imag) < tol for c, _ in self._terms)

    def trace_fraction(self) -> complex:
        """``Tr(op) / 2**n``: the identity coefficient."""
        for c, p in self._terms:
            if p.is_identity:
                return c
        return 0.0

    def commutes_with(self, p: PauliString) -> bool:
        """Exact check that ``[self, p] = 0``."""
        acc = PauliSum(self.n, [(c, multiply(q, p)) for c, q in self._terms])
        acc = acc - PauliSum(self.n, [(c, multiply(p, q)) for c, q in self._terms])
        return len(acc) == 0

    def dump_lines(self) -> list[str]:
        return [f"{_fmt_coeff(c)} {p.letters()}" for c, p in self._terms]

    def __repr__(self) -> str:
        body = " + ".join(f"({_fmt_coeff(c)})*{p.letters()}" for c, p in self._terms[:6])
        more = "" if len(self) <= 6 else f" + ... ({len(self)} terms)"
        return f"PauliSum[{self.n}]({body}{more})"


def _fmt_coeff(c: complex) -> str:
    c = complex(c)
    if c.imag == 0.0:
        return repr(float(c.real))
    return repr(c)


def string_action(p: PauliString, basis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Images and phases of ``p`` on computational basis states.

    Returns ``(targets, phases)`` with ``p|b> = phases * |targets>``.
    """
    basis = np.asarray(basis, dtype=np.int64)
    signs = 1 - 2 * (np.bitwise_count(basis & p.z) & 1).astype(np.int64)
    return basis ^ p.x, signs * (1j ** p.q)


def to_sparse(op, n: int | None = None):
    """CSR matrix of a PauliString or PauliSum (basis bit ``k`` is qubit ``k``)."""
    import scipy.sparse as sp

    if isinstance(op, PauliString):
        op = PauliSum(op.n, [(1.0, op)])
    n = op.n if n is None else n
    dim = 1 << n
    cols = np.arange(dim, dtype=np.int64)
    rows_all, data_all = [], []
    for c, p in op:
        rows, ph = string_action(p, cols)
        rows_all.append(rows)
        data_all.append(c * ph)
    if not rows_all:
        return sp.csr_matrix((dim, dim), dtype=complex)
    rows = np.concatenate(rows_all)
    data = np.concatenate(data_all)
    colz = np.tile(cols, len(rows_all))
    return sp.csr_matrix((data, (rows, colz)), shape=(dim, dim))
