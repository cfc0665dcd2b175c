"""Hot numeric loops, each with a numba and a pure-numpy implementation.

The public names dispatch on :data:`qchar._accel.USE_NUMBA`.  Both paths
consume identical inputs (including pre-drawn uniforms for the jump chain) and
return identical results up to floating point rounding.  The jump chain visits
identical states in both; jump times can differ in the last bit because the
two ``log`` implementations round differently.
"""
from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit

__all__ = ["eval_monomials", "pair_fourier_dets", "jump_chain_final", "jump_chain_paths"]

ESCAPED = -1
EXHAUSTED = -2


# --- polynomial evaluation -------------------------------------------------

@njit(cache=True)
def _eval_monomials_nb(exps, coefs, pts):
    n_pts, n_vars = pts.shape
    n_terms = exps.shape[0]
    out = np.zeros(n_pts, dtype=np.complex128)
    if n_terms == 0:
        return out
    lo = min(exps.min(), 0)
    hi = max(exps.max(), 0)
    # pw[i, k - lo] = pts[p, i] ** k, rebuilt per point by repeated multiplication
    pw = np.empty((n_vars, hi - lo + 1), dtype=np.complex128)
    for p in range(n_pts):
        for i in range(n_vars):
            z = pts[p, i]
            pw[i, -lo] = 1.0
            for k in range(1, hi + 1):
                pw[i, k - lo] = pw[i, k - 1 - lo] * z
            zi = 1.0 / z
            for k in range(1, -lo + 1):
                pw[i, -k - lo] = pw[i, -k + 1 - lo] * zi
        acc = 0.0 + 0.0j
        for t in range(n_terms):
            v = coefs[t] + 0.0j
            for i in range(n_vars):
                v *= pw[i, exps[t, i] - lo]
            acc += v
        out[p] = acc
    return out


def _eval_monomials_np(exps, coefs, pts, chunk=64):
    out = np.empty(pts.shape[0], dtype=np.complex128)
    for s in range(0, pts.shape[0], chunk):
        block = pts[s:s + chunk]
        # (P, T, n) integer powers, then product over variables
        mons = np.prod(block[:, None, :] ** exps[None, :, :], axis=2)
        out[s:s + chunk] = mons @ coefs
    return out


# --- Fourier determinants for the generator --------------------------------

@njit(cache=True)
def _det_small(a):
    n = a.shape[0]
    m = a.copy()
    det = 1.0
    for k in range(n):
        piv = k
        best = abs(m[k, k])
        for i in range(k + 1, n):
            if abs(m[i, k]) > best:
                best = abs(m[i, k])
                piv = i
        if best == 0.0:
            return 0.0
        if piv != k:
            for j in range(n):
                tmp = m[k, j]
                m[k, j] = m[piv, j]
                m[piv, j] = tmp
            det = -det
        det *= m[k, k]
        for i in range(k + 1, n):
            f = m[i, k] / m[k, k]
            for j in range(k + 1, n):
                m[i, j] -= f * m[k, j]
    return det


@njit(cache=True)
def _pair_fourier_dets_nb(l2_rows, l2_cols, psi, half_width):
    n_rows, n = l2_rows.shape
    n_cols = l2_cols.shape[0]
    out = np.empty((n_rows, n_cols))
    mat = np.empty((n, n))
    for a in range(n_rows):
        for b in range(n_cols):
            for i in range(n):
                for j in range(n):
                    d = (l2_rows[a, i] - l2_cols[b, j]) // 2
                    s = (l2_rows[a, i] + l2_cols[b, j]) // 2
                    mat[i, j] = (psi[half_width + d] + psi[half_width - d]
                                 - psi[half_width + s] - psi[half_width - s])
            out[a, b] = _det_small(mat)
    return out


def _pair_fourier_dets_np(l2_rows, l2_cols, psi, half_width):
    d = (l2_rows[:, None, :, None] - l2_cols[None, :, None, :]) // 2
    s = (l2_rows[:, None, :, None] + l2_cols[None, :, None, :]) // 2
    mats = psi[half_width + d] + psi[half_width - d] - psi[half_width + s] - psi[half_width - s]
    return _det_batched(mats.reshape(-1, *mats.shape[2:])).reshape(mats.shape[:2])


def _det_batched(m):
    # same elimination order as _det_small, vectorized over the leading axis
    # (LAPACK's batched det is not exact even on 2 * identity)
    m = m.copy()
    count, n = m.shape[0], m.shape[1]
    det = np.ones(count)
    rows = np.arange(count)
    for k in range(n):
        piv = k + np.argmax(np.abs(m[:, k:, k]), axis=1)
        swap = piv != k
        if swap.any():
            top = m[rows, k].copy()
            m[rows, k] = m[rows, piv]
            m[rows, piv] = top
            det[swap] = -det[swap]
        pivot = m[:, k, k]
        det *= pivot
        safe = np.where(pivot == 0.0, 1.0, pivot)
        f = m[:, k + 1:, k] / safe[:, None]
        m[:, k + 1:, k + 1:] -= f[:, :, None] * m[:, None, k, k + 1:]
    return det


# --- jump chain (Gillespie) -----------------------------------------------

@njit(cache=True)
def _jump_chain_final_nb(cum, rates, init, horizon, uniforms):
    runs, width = uniforms.shape
    out = np.empty(runs, dtype=np.int64)
    for r in range(runs):
        state = init
        t = 0.0
        k = 0
        while True:
            rate = rates[state]
            if rate <= 0.0:
                break
            if k + 1 >= width:
                state = EXHAUSTED
                break
            t += -np.log(uniforms[r, k]) / rate
            if t > horizon:
                break
            j = np.searchsorted(cum[state], uniforms[r, k + 1], side="right")
            k += 2
            if j >= cum.shape[1] - 1:
                state = ESCAPED
                break
            state = j
        out[r] = state
    return out


def _jump_chain_final_np(cum, rates, init, horizon, uniforms):
    runs, width = uniforms.shape
    state = np.full(runs, init, dtype=np.int64)
    t = np.zeros(runs)
    k = 0
    active = np.ones(runs, dtype=bool)
    n_states = cum.shape[1] - 1
    while active.any():
        idx = np.flatnonzero(active)
        rate = rates[state[idx]]
        frozen = rate <= 0.0
        active[idx[frozen]] = False
        idx = idx[~frozen]
        rate = rate[~frozen]
        if idx.size == 0:
            break
        if k + 1 >= width:
            state[idx] = EXHAUSTED
            break
        t[idx] += -np.log(uniforms[idx, k]) / rate
        done = t[idx] > horizon
        active[idx[done]] = False
        idx = idx[~done]
        u = uniforms[idx, k + 1]
        rows = cum[state[idx]]
        # searchsorted(side="right") on each monotone row
        j = (rows <= u[:, None]).sum(axis=1).astype(np.int64)
        esc = j >= n_states
        state[idx[esc]] = ESCAPED
        active[idx[esc]] = False
        state[idx[~esc]] = j[~esc]
        k += 2
    return state


@njit(cache=True)
def _jump_chain_paths_nb(cum, rates, init, horizon, uniforms):
    runs, width = uniforms.shape
    cap = width // 2 + 2
    times = np.zeros((runs, cap))
    states = np.full((runs, cap), -3, dtype=np.int64)
    counts = np.zeros(runs, dtype=np.int64)
    for r in range(runs):
        state = init
        t = 0.0
        k = 0
        times[r, 0] = 0.0
        states[r, 0] = state
        n = 1
        while True:
            rate = rates[state]
            if rate <= 0.0:
                break
            if k + 1 >= width:
                states[r, n] = EXHAUSTED
                times[r, n] = t
                n += 1
                break
            t += -np.log(uniforms[r, k]) / rate
            if t > horizon:
                break
            j = np.searchsorted(cum[state], uniforms[r, k + 1], side="right")
            k += 2
            if j >= cum.shape[1] - 1:
                states[r, n] = ESCAPED
                times[r, n] = t
                n += 1
                break
            state = j
            states[r, n] = state
            times[r, n] = t
            n += 1
        counts[r] = n
    return times, states, counts


def _jump_chain_paths_np(cum, rates, init, horizon, uniforms):
    runs, width = uniforms.shape
    cap = width // 2 + 2
    times = np.zeros((runs, cap))
    states = np.full((runs, cap), -3, dtype=np.int64)
    counts = np.zeros(runs, dtype=np.int64)
    n_states = cum.shape[1] - 1
    for r in range(runs):
        state, t, k, n = init, 0.0, 0, 1
        states[r, 0] = state
        while rates[state] > 0.0:
            if k + 1 >= width:
                states[r, n], times[r, n] = EXHAUSTED, t
                n += 1
                break
            t += -np.log(uniforms[r, k]) / rates[state]
            if t > horizon:
                break
            j = int(np.searchsorted(cum[state], uniforms[r, k + 1], side="right"))
            k += 2
            if j >= n_states:
                states[r, n], times[r, n] = ESCAPED, t
                n += 1
                break
            state = j
            states[r, n], times[r, n] = state, t
            n += 1
        counts[r] = n
    return times, states, counts


IMPLEMENTATIONS = {
    "numba": {
        "eval_monomials": _eval_monomials_nb,
        "pair_fourier_dets": _pair_fourier_dets_nb,
        "jump_chain_final": _jump_chain_final_nb,
        "jump_chain_paths": _jump_chain_paths_nb,
    },
    "numpy": {
        "eval_monomials": _eval_monomials_np,
        "pair_fourier_dets": _pair_fourier_dets_np,
        "jump_chain_final": _jump_chain_final_np,
        "jump_chain_paths": _jump_chain_paths_np,
    },
}

_active = IMPLEMENTATIONS["numba" if USE_NUMBA else "numpy"]


def eval_monomials(exps: np.ndarray, coefs: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """``sum_t coefs[t] * prod_i pts[p, i] ** exps[t, i]`` for each point ``p``."""
    return _active["eval_monomials"](
        np.ascontiguousarray(exps, dtype=np.int64),
        np.ascontiguousarray(coefs, dtype=np.float64),
        np.ascontiguousarray(pts, dtype=np.complex128),
    )


def pair_fourier_dets(l2_rows, l2_cols, psi, half_width: int) -> np.ndarray:
    """Determinants of ``F(l_i, m_j)`` for every (row state, column state) pair.

    ``l2_*`` hold twice the shifted indices (so half-integers stay integral);
    ``psi`` holds Fourier coefficients at ``-half_width..half_width``.
    """
    return _active["pair_fourier_dets"](
        np.ascontiguousarray(l2_rows, dtype=np.int64),
        np.ascontiguousarray(l2_cols, dtype=np.int64),
        np.ascontiguousarray(psi, dtype=np.float64),
        int(half_width),
    )


def jump_chain_final(cum, rates, init: int, horizon: float, uniforms) -> np.ndarray:
    """State index at ``horizon`` for each run (``-1`` escaped, ``-2`` out of draws)."""
    return _active["jump_chain_final"](
        np.ascontiguousarray(cum, dtype=np.float64),
        np.ascontiguousarray(rates, dtype=np.float64),
        int(init), float(horizon),
        np.ascontiguousarray(uniforms, dtype=np.float64),
    )


def jump_chain_paths(cum, rates, init: int, horizon: float, uniforms):
    """Full jump records ``(times, states, counts)`` per run."""
    return _active["jump_chain_paths"](
        np.ascontiguousarray(cum, dtype=np.float64),
        np.ascontiguousarray(rates, dtype=np.float64),
        int(init), float(horizon),
        np.ascontiguousarray(uniforms, dtype=np.float64),
    )
