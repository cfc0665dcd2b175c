"""Time the numba kernels against their pure-numpy twins.

    python benchmarks/bench_kernels.py [--repeat 5] [--runs 20000]

Inputs are taken from a realistic workload (type C, rank 2, gamma 1/2,
r = 4/5, cutoff 12).  Each kernel pair is also checked for agreement.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from qchar import BaseParam, OmegaParams, character, generator
from qchar.characters import shifted_indices, signatures_upto
from qchar.coherent import fourier_coefficients
from qchar.kernels import IMPLEMENTATIONS
from qchar.laurent import _cached_arrays
from qchar.markov import _draw_budget, draw_uniforms, jump_table


def best_of(fn, args, repeat):
    fn(*args)  # warm-up (triggers compilation for numba)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads(runs: int, cutoff: int):
    param = BaseParam.parse("4/5")
    omega = OmegaParams(gamma=0.5)

    poly = character("C", (4, 3, 2, 1)).poly
    exps, coefs = _cached_arrays(poly)
    rng = np.random.default_rng(0)
    pts = np.exp(2j * np.pi * rng.random((2000, 4)))
    yield "eval_monomials", (exps, coefs, pts)

    states = signatures_upto(2, cutoff)
    l2 = np.array([[int(2 * x) for x in shifted_indices("C", s)] for s in states], dtype=np.int64)
    width = int(l2.max()) + 2
    psi = fourier_coefficients(omega, width)
    yield "pair_fourier_dets", (l2, l2, psi.array(), psi.half_width)

    gen = generator("C", 2, omega, param, cutoff)
    cum, rates = jump_table(gen)
    u = draw_uniforms(42, runs, _draw_budget(rates, 1.0))
    yield "jump_chain_final", (cum, rates, 0, 1.0, u)
    yield "jump_chain_paths", (cum, rates, 0, 1.0, u[: max(runs // 10, 1)])


def agree(name, a, b) -> str:
    if name == "jump_chain_paths":
        same_states = np.array_equal(a[1], b[1]) and np.array_equal(a[2], b[2])
        return f"states identical={same_states} max|dt|={np.max(np.abs(a[0] - b[0])):.1e}"
    if name == "jump_chain_final":
        return f"identical={np.array_equal(a, b)}"
    rel = np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300)
    return f"max|diff|/max|value|={rel:.1e}"


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--runs", type=int, default=20000)
    ap.add_argument("--cutoff", type=int, default=12)
    args = ap.parse_args(argv)

    print(f"{'kernel':<20}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}  agreement")
    for name, inputs in workloads(args.runs, args.cutoff):
        nb = IMPLEMENTATIONS["numba"][name]
        npy = IMPLEMENTATIONS["numpy"][name]
        t_nb = best_of(nb, inputs, args.repeat)
        t_np = best_of(npy, inputs, args.repeat)
        note = agree(name, nb(*inputs), npy(*inputs))
        print(f"{name:<20}{1e3 * t_nb:>12.2f}{1e3 * t_np:>12.2f}{t_np / t_nb:>10.1f}  {note}")


if __name__ == "__main__":
    main()
