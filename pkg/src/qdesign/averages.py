"""Haar averages of multipartite entangling power.

The entangling power of a gate on ``d_1 x ... x d_N`` is the mean
generalized concurrence it creates from Haar-random product states, averaged
over the balanced and unbalanced splittings of the parties. This module
gives closed forms of its Haar average over the orthogonal and unitary
groups, second moments of the orthogonal group, the one-tangle of tripartite
states, and exact and Monte Carlo evaluation for individual tripartite gates.
"""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np
from scipy.stats import ortho_group, unitary_group

from .core import require_unitary

EXACT_MAX_DIM = 8
PAIRINGS = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))


class MonteCarloEstimate(NamedTuple):
    mean: float
    std_error: float
    samples: int


def worker_count() -> int:
    """Worker cap from ``QDESIGN_THREADS``, defaulting to the CPU count."""
    raw = os.environ.get("QDESIGN_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


def _dims(dims, length: int | None = None) -> tuple[int, ...]:
    d = tuple(int(x) for x in dims)
    if len(d) < 2 or any(x < 1 for x in d):
        raise ValueError("need at least two positive local dimensions")
    if length is not None and len(d) != length:
        raise ValueError(f"expected {length} local dimensions, got {len(d)}")
    return d


def _splittings(n: int):
    """Unordered bipartitions ``A|B`` of ``range(n)`` as ``A`` tuples with 0 in ``A``."""
    for r in range(1, n):
        for a in itertools.combinations(range(n), r):
            if 0 in a:
                yield a


# --------------------------------------------------------------------------
# orthogonal second moments


def weingarten_o2(rows: Sequence[int], cols: Sequence[int], d: int) -> float:
    """``E[O_{i1 j1} O_{i2 j2} O_{k1 l1} O_{k2 l2}]`` over Haar ``O(d)``.

    ``rows = (i1, i2, k1, k2)`` and ``cols = (j1, j2, l1, l2)`` are 1-based.
    Each of the three pairings of the four factors contributes its row deltas
    times its column deltas, weighted ``(d+1)/(d(d-1)(d+2))`` when the row
    and column pairings agree and ``-1/(d(d-1)(d+2))`` otherwise.
    """
    d = int(d)
    if d < 2:
        raise ValueError("second moments need d >= 2")
    r, c = tuple(int(x) for x in rows), tuple(int(x) for x in cols)
    if len(r) != 4 or len(c) != 4:
        raise ValueError("need four row and four column indices")
    if any(not 1 <= x <= d for x in r + c):
        raise ValueError(f"indices must lie in 1..{d}")
    paired = lambda idx, p: all(idx[a] == idx[b] for a, b in p)  # noqa: E731
    den = d * (d - 1) * (d + 2)
    total = 0.0
    for p in PAIRINGS:
        if not paired(r, p):
            continue
        for q in PAIRINGS:
            if paired(c, q):
                total += (d + 1) / den if p == q else -1.0 / den
    return total


def weingarten_o2_mc(rows, cols, d: int, samples: int = 100_000, seed=None) -> MonteCarloEstimate:
    """Monte Carlo estimate of :func:`weingarten_o2` from Haar ``O(d)`` samples."""
    rng = np.random.default_rng(seed)
    o = ortho_group.rvs(d, size=samples, random_state=rng).reshape(samples, d, d)
    r = [x - 1 for x in rows]
    c = [x - 1 for x in cols]
    v = o[:, r[0], c[0]] * o[:, r[1], c[1]] * o[:, r[2], c[2]] * o[:, r[3], c[3]]
    return MonteCarloEstimate(float(v.mean()), float(v.std(ddof=1) / np.sqrt(samples)), samples)


# --------------------------------------------------------------------------
# closed forms


def avg_ep_tripartite(dims, group: str = "unitary") -> float:
    """Haar average of the tripartite entangling power over ``O(d)`` or ``U(d)``."""
    d1, d2, d3 = _dims(dims, 3)
    d = d1 * d2 * d3
    s1 = d1 + d2 + d3
    s2 = d1 * d2 + d1 * d3 + d2 * d3
    if group == "unitary":
        return (3 * d + 3 - s1 - s2) / (1.5 * (d + 1))
    if group == "orthogonal":
        p = (d1 + 1) * (d2 + 1) * (d3 + 1)
        return (3 * d + 3 - s1 - s2) * (d * p - 8) / (1.5 * (d - 1) * (d + 2) * p)
    raise ValueError("group must be 'orthogonal' or 'unitary'")


def _multipartite_terms(dims):
    n = len(dims)
    big_b = math.prod(x + 1 for x in dims)
    big_d = math.prod(dims)
    big_c = 0
    for a in _splittings(n):
        da = math.prod(dims[i] for i in a)
        big_c += da + big_d // da
    return n, big_b, big_c, big_d


def avg_ep_multipartite(dims, group: str = "unitary", exact: bool = False):
    """Haar average of the ``N``-partite entangling power.

    Uses ``B = prod(d_i + 1)``, ``C = sum over splittings A|B of d_A + d_B``
    and ``D = prod d_i``. With ``exact=True`` a :class:`fractions.Fraction`
    is returned.
    """
    dims = _dims(dims)
    n, b, c, d = _multipartite_terms(dims)
    k = 2 ** (n - 1) - 1
    if group == "unitary":
        val = 2 * (1 - Fraction(c, k * (d + 1)))
    elif group == "orthogonal":
        inner = 2**n * (d + 1) - 2 * b + Fraction(b * d - 2**n, k) * c
        val = 2 * (1 - Fraction(1, b) * inner / ((d - 1) * (d + 2)))
    else:
        raise ValueError("group must be 'orthogonal' or 'unitary'")
    return val if exact else float(val)


def avg_ep_equal_dims(d: int, n: int, group: str = "unitary") -> float:
    """The closed forms specialised to ``n`` parties of equal dimension ``d``."""
    big = d**n
    num = 2**n * (big + 1) - 2 * (d + 1) ** n
    k = 2 ** (n - 1) - 1
    if group == "unitary":
        return float(Fraction(num, k * (big + 1)))
    if group == "orthogonal":
        return float(
            Fraction(num * (big * (d + 1) ** n - 2**n), k * (big * big + big - 2) * (d + 1) ** n)
        )
    raise ValueError("group must be 'orthogonal' or 'unitary'")


# --------------------------------------------------------------------------
# states


def _purity_of_parties(psi: np.ndarray, dims, keep: Sequence[int]) -> np.ndarray:
    """``Tr rho_keep^2`` for a batch of states ``psi`` of shape ``(S, prod dims)``."""
    s = psi.shape[0]
    t = psi.reshape((s,) + tuple(dims))
    rest = [i for i in range(len(dims)) if i not in keep]
    perm = [0] + [i + 1 for i in keep] + [i + 1 for i in rest]
    dk = math.prod(dims[i] for i in keep)
    m = t.transpose(perm).reshape(s, dk, -1)
    rho = m @ np.conj(np.transpose(m, (0, 2, 1)))
    return np.real(np.einsum("sij,sji->s", rho, rho))


def _one_tangle_batch(psi: np.ndarray, dims) -> np.ndarray:
    return np.mean(
        [np.maximum(2.0 * (1.0 - _purity_of_parties(psi, dims, (c,))), 0.0) for c in range(3)],
        axis=0,
    )


def one_tangle(psi, dims) -> float:
    """Mean of the generalized concurrences across the three splittings ``ab|c``."""
    dims = _dims(dims, 3)
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size != math.prod(dims):
        raise ValueError(f"state length {psi.size} does not match dims {dims}")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValueError("state is not normalized")
    return float(_one_tangle_batch(psi[None, :], dims)[0])


def random_product_states(dims, samples: int, rng) -> np.ndarray:
    """Haar-random product states as rows of a ``(samples, prod dims)`` array."""
    out = np.ones((samples, 1), dtype=complex)
    for d in dims:
        v = rng.standard_normal((samples, d)) + 1j * rng.standard_normal((samples, d))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        out = (out[:, :, None] * v[:, None, :]).reshape(samples, -1)
    return out


# --------------------------------------------------------------------------
# single gates


def _swap_on_parties(dims, parties) -> np.ndarray:
    """Permutation operator on two copies exchanging the listed parties."""
    n = len(dims)
    big = math.prod(dims)
    idx = np.arange(big * big).reshape(tuple(dims) * 2)
    axes = list(range(2 * n))
    for p in parties:
        axes[p], axes[n + p] = n + p, p
    perm = idx.transpose(axes).ravel()
    s = np.zeros((big * big, big * big))
    s[perm, np.arange(big * big)] = 1.0
    return s


def ep_tripartite_exact(u, dims, max_dim: int = EXACT_MAX_DIM) -> float:
    """Exact tripartite entangling power of ``u``.

    The Haar average of two copies of a random product state is
    ``prod_i (I + S_i) / (d_i (d_i + 1))`` with ``S_i`` exchanging party
    ``i`` between the copies, so each splitting ``ab|c`` contributes
    ``2 [1 - Tr((U (x) U) E (U (x) U)^+ S_c)]``, summed over the eight
    products of identities and exchanges.
    """
    dims = _dims(dims, 3)
    big = math.prod(dims)
    if big > max_dim:
        raise ValueError(
            f"exact contraction refused for total dimension {big} > {max_dim}; use Monte Carlo"
        )
    u = require_unitary(u, 1e-9)
    if u.shape != (big, big):
        raise ValueError(f"gate of shape {u.shape} does not match dims {dims}")
    uu = np.kron(u, u)
    avg = np.zeros((big * big, big * big))
    for mask in itertools.product((0, 1), repeat=3):
        avg += _swap_on_parties(dims, [i for i in range(3) if mask[i]])
    avg /= math.prod(d * (d + 1) for d in dims)
    rho2 = uu @ avg @ uu.conj().T
    total = 0.0
    for c in range(3):
        purity = float(np.real(np.trace(rho2 @ _swap_on_parties(dims, [c]))))
        total += 2.0 * (1.0 - purity)
    return total / 3.0


def _seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _chunks(samples: int, size: int):
    out, left = [], samples
    while left > 0:
        out.append(min(size, left))
        left -= out[-1]
    return out


def ep_tripartite_mc(u, dims, samples: int = 10_000, seed=None, chunk: int = 20_000) -> MonteCarloEstimate:
    """Monte Carlo entangling power: mean one-tangle of ``u`` applied to random product states.

    Samples are split into fixed chunks with independent spawned RNG streams,
    so the result depends only on ``seed`` and not on the worker count.
    """
    dims = _dims(dims, 3)
    u = require_unitary(u, 1e-9)
    if u.shape != (math.prod(dims),) * 2:
        raise ValueError(f"gate of shape {u.shape} does not match dims {dims}")
    sizes = _chunks(int(samples), chunk)
    streams = _seed_sequence(seed).spawn(len(sizes))

    def run(job):
        size, ss = job
        psi = random_product_states(dims, size, np.random.default_rng(ss)) @ u.T
        t = _one_tangle_batch(psi, dims)
        return math.fsum(t), math.fsum(t * t)

    jobs = list(zip(sizes, streams))
    if len(jobs) > 1 and worker_count() > 1:
        with ThreadPoolExecutor(max_workers=worker_count()) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    n = sum(sizes)
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0) * n / max(n - 1, 1)
    return MonteCarloEstimate(mean, math.sqrt(var / n), n)


def ep_tripartite_haar_mc(
    dims, group: str = "unitary", gates: int = 200, states: int = 10_000, seed=None
) -> MonteCarloEstimate:
    """Grand mean of :func:`ep_tripartite_mc` over Haar-random gates.

    The standard error is that of the per-gate means, which includes both
    the gate-to-gate spread and the state sampling noise.
    """
    dims = _dims(dims, 3)
    big = math.prod(dims)
    ss = _seed_sequence(seed)
    gate_ss, state_ss = ss.spawn(2)
    grng = np.random.default_rng(gate_ss)
    sampler = {"unitary": unitary_group, "orthogonal": ortho_group}.get(group)
    if sampler is None:
        raise ValueError("group must be 'orthogonal' or 'unitary'")
    means = []
    for k, st in enumerate(state_ss.spawn(gates)):
        u = np.asarray(sampler.rvs(big, random_state=grng), dtype=complex)
        means.append(ep_tripartite_mc(u, dims, states, st).mean)
    m = np.asarray(means)
    return MonteCarloEstimate(
        math.fsum(m) / gates, float(m.std(ddof=1) / np.sqrt(gates)), gates * states
    )
