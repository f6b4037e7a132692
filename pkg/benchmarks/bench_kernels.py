"""Compare the compiled statevector kernels with the numpy fallback.

Usage::

    python benchmarks/bench_kernels.py [--qubits 16 20] [--repeat 5]

Reports the median wall time per call for each kernel and register size,
plus one first-order Trotter step of the 2x3 lattice with the extra rishon
(20 qubits), executed fused and gate by gate.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from z2hubbard import kernels
from z2hubbard.circuit import trotter_step
from z2hubbard.emulator import StateVector, run
from z2hubbard.encoder import ModelParams, build_hamiltonian
from z2hubbard.lattice import LatticeSpec, build_layout


def timeit(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def kernel_cases(n: int, rng: np.random.Generator):
    x = int(rng.integers(1, 1 << n))
    z = int(rng.integers(0, 1 << n))
    q = bin(x & z).count("1") & 1  # Hermitian string
    h = 1 / np.sqrt(2)
    return {
        "rotate_pauli": lambda k, psi: k.rotate_pauli(psi, x, z, q, 0.1),
        "apply_pauli": lambda k, psi: k.apply_pauli(psi, x, z, q),
        "expect_pauli": lambda k, psi: k.expect_pauli(psi, x, z, q),
        "apply_1q(H)": lambda k, psi: k.apply_1q(psi, n // 2, h, h, h, -h),
        "apply_cnot": lambda k, psi: k.apply_cnot(psi, 0, n - 1),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--qubits", type=int, nargs="+", default=[12, 16, 20])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    names = ["python"] + (["compiled"] if kernels.compiled_available() else [])
    if len(names) == 1:
        print("compiled kernels not built; timing the numpy fallback only")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<14}{'qubits':>7}" + "".join(f"{n:>14}" for n in names) + f"{'speedup':>10}")
    for n in args.qubits:
        psi0 = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        psi0 /= np.linalg.norm(psi0)
        for label, fn in kernel_cases(n, rng).items():
            t = {}
            for name in names:
                k = kernels.get_backend(name)
                psi = psi0.copy()
                t[name] = timeit(lambda: fn(k, psi), args.repeat)
            speed = f"{t['python'] / t['compiled']:>9.1f}x" if "compiled" in t else ""
            print(f"{label:<14}{n:>7}" + "".join(f"{t[m] * 1e3:>12.3f}ms" for m in names) + speed)

    layout = build_layout(LatticeSpec(2, 3), extra_rishon=True)
    step = trotter_step(build_hamiltonian(layout, ModelParams(t=0.1, U=1.0)), 0.01)
    print(f"\nTrotter step, 2x3 + extra rishon ({layout.n_qubits} qubits, {len(step.spans)} rotations)")
    state = StateVector(layout.n_qubits, seed=0)
    for name in names:
        k = kernels.get_backend(name)
        for fuse in (True, False):
            t = timeit(lambda: run(step, state, fuse=fuse, backend=k), max(1, args.repeat // 2))
            print(f"  {name:<9} {'fused' if fuse else 'gates':<6} {t * 1e3:10.1f} ms")


if __name__ == "__main__":
    main()
