"""Search machinery for multiunitary matrices of order 36 (AME(4,6) states).

Weighted quantum Latin squares (QLS) are stored as ``n x n`` nested lists whose
entries are lists of ``(amplitude, k, l)`` triples with 1-based kets
``|k l>``. Entry ``(I, J)`` with amplitude ``alpha`` on ``|k l>`` becomes the
matrix element at row ``n(I-1)+k`` and column ``n(J-1)+l`` (1-based).
"""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize_scalar

from .core import (
    RankDeficientError,
    haar_sample,
    partial_transpose,
    polar_unitary,
    require_unitary,
    reshuffle,
)
from .gates import (
    ZERO_EIG_REL,
    avg_singular_entropy,
    entangling_power,
    ep_gradient,
    ep_hessian,
    gate_typicality,
    hermitian_basis,
)

Entry = list  # list of (amplitude, k, l)

# Two almost orthogonal Latin squares of order 6 with the highest entangling
# power among permutation matrices.
P36_LABELS = (
    "11 22 33 44 55 66",
    "23 14 45 36 61 52",
    "32 41 64 53 16 25",
    "46 35 51 62 24 13",
    "54 63 26 15 42 31",
    "65 56 12 21 33 44",
)

# Permutation matrix whose small perturbations seed successful iterations.
SEED_LABELS = (
    "11 22 33 44 55 66",
    "23 14 45 36 61 52",
    "32 41 64 53 16 25",
    "46 35 51 62 24 13",
    "64 56 26 15 43 31",
    "55 63 12 21 42 34",
)

FAMILY_ARITY = {"A": 1, "G": 3, "W": 5}

# Parameter tuples of the family maxima used throughout the package.
A_OPT_PARAMS = (np.pi / 6,)
G_OPT_PARAMS = (np.pi / 4, 3 * np.pi / 8, np.pi / 8)
W_OPT_PARAMS = (np.pi / 4, np.pi / 3, np.pi / 6, np.pi / 12, np.pi / 12)

EP_W_OPT = (208 + np.sqrt(3)) / 210
EP_A_OPT = 419 / 420
EP_P36 = 314 / 315

# Scalars of the analytic golden AME(4,6) matrix.
GOLDEN_A = (5 + np.sqrt(5)) ** -0.5
GOLDEN_B = np.sqrt((5 + np.sqrt(5)) / 20)
GOLDEN_C = 1 / np.sqrt(2)
GOLDEN_OMEGA = np.exp(1j * np.pi / 10)
GOLDEN_RATIO = (1 + np.sqrt(5)) / 2


class MultiunitaryReport(NamedTuple):
    u_ok: bool
    r_ok: bool
    gamma_ok: bool
    residuals: tuple  # Frobenius norms of X^+ X - I for X = U, U^R, U^Gamma

    @property
    def ok(self) -> bool:
        return self.u_ok and self.r_ok and self.gamma_ok


class SearchTrace(NamedTuple):
    iteration: int
    e_p: float
    g_t: float
    grad_norm: float
    step: float
    accepted: bool


class RatherResult(NamedTuple):
    matrix: np.ndarray
    converged: bool
    steps: int
    reason: str
    trace: list


class AscentResult(NamedTuple):
    matrix: np.ndarray
    trace: list


class BlockVectors(NamedTuple):
    """Vectors ``a_1..a_12`` and ``b_1..b_12`` as two ``(12, 6)`` arrays."""

    a: np.ndarray
    b: np.ndarray


class BlockSearchResult(NamedTuple):
    matrix: np.ndarray
    e_p: float
    s_e: float
    vectors: BlockVectors


class RegionScan(NamedTuple):
    samples: np.ndarray  # (k, 2) array of (e_p, g_t)
    boundary: np.ndarray  # curve W(x, x, 0, -x, -x)
    ellipse: np.ndarray  # curve W(-pi/6, -pi/12 + x, pi/12 + x, pi/6, pi/4 + x)
    parameters: np.ndarray  # x values of the two curves


# --------------------------------------------------------------------------
# QLS <-> matrix


def qls_from_labels(rows: Sequence[str]) -> list:
    """Classical pair labels such as ``"11 22 ..."`` as a weighted QLS."""
    q = []
    for row in rows:
        q.append([[(1.0, int(tok[0]), int(tok[1]))] for tok in row.split()])
    n = len(q)
    if any(len(r) != n for r in q):
        raise ValueError("label array is not square")
    return q


def validate_qls(q) -> int:
    n = len(q)
    for row in q:
        if len(row) != n:
            raise ValueError("QLS is not square")
        for entry in row:
            norm = 0.0
            for amp, k, l in entry:
                if not (1 <= k <= n and 1 <= l <= n):
                    raise ValueError(f"ket |{k}{l}> out of range for n={n}")
                norm += abs(amp) ** 2
            if abs(norm - 1.0) > 1e-10:
                raise ValueError(f"entry amplitudes have norm^2 {norm}, expected 1")
    return n


def qls_to_matrix(q) -> np.ndarray:
    """Matrix of side ``n^2`` built from a weighted QLS."""
    n = validate_qls(q)
    u = np.zeros((n * n, n * n), dtype=complex)
    for i, row in enumerate(q):
        for j, entry in enumerate(row):
            for amp, k, l in entry:
                u[n * i + k - 1, n * j + l - 1] += amp
    return u


def p36() -> np.ndarray:
    return qls_to_matrix(qls_from_labels(P36_LABELS))


def seed_matrix() -> np.ndarray:
    return qls_to_matrix(qls_from_labels(SEED_LABELS))


# --------------------------------------------------------------------------
# rotation families


def _rot(c: float, s: float, first, second) -> Entry:
    return [(c, *first), (s, *second)]


def family_qls(kind: str, params) -> list:
    """Weighted QLS of the A (1 angle), G (3 angles) or W (5 angles) family.

    All three start from the almost orthogonal pair ``P36`` and replace pairs
    of neighbouring entries by rotated superpositions. ``W(x, y, z, 0, 0)``
    equals ``G(x, y, z)`` and ``A(x)`` equals ``G(x, pi/2, x)``.
    """
    kind = kind.upper()
    if kind not in FAMILY_ARITY:
        raise ValueError(f"unknown family {kind!r}; expected A, G or W")
    params = tuple(float(p) for p in np.atleast_1d(params))
    if len(params) != FAMILY_ARITY[kind]:
        raise ValueError(f"family {kind} takes {FAMILY_ARITY[kind]} angle(s), got {len(params)}")
    if kind == "A":
        x = z = params[0]
        y = u = w = None
    elif kind == "G":
        x, y, z = params
        u = w = None
    else:
        x, y, z, u, w = params
    q = qls_from_labels(P36_LABELS)
    c, s = np.cos, np.sin
    q[0][2] = _rot(c(x), -s(x), (3, 3), (4, 3))
    q[0][3] = _rot(s(x), c(x), (3, 4), (4, 4))
    q[5][4] = _rot(c(z), s(z), (3, 3), (4, 3))
    q[5][5] = _rot(-s(z), c(z), (3, 4), (4, 4))
    if y is not None:
        q[1][2] = _rot(c(y), s(y), (3, 5), (4, 5))
        q[1][3] = _rot(s(y), -c(y), (3, 6), (4, 6))
    if u is not None:
        q[3][0] = _rot(c(u), s(u), (4, 6), (3, 6))
        q[3][1] = _rot(-s(u), c(u), (4, 5), (3, 5))
    if w is not None:
        q[4][4] = _rot(c(w), -s(w), (4, 2), (3, 2))
        q[4][5] = _rot(c(w), s(w), (3, 1), (4, 1))
    return q


def family_matrix(kind: str, params) -> np.ndarray:
    """Unitary matrix of order 36 of the named rotation family."""
    return require_unitary(qls_to_matrix(family_qls(kind, params)))


def optimal_family_matrix(kind: str) -> np.ndarray:
    """Family member at its entangling-power maximum."""
    table = {"A": A_OPT_PARAMS, "G": G_OPT_PARAMS, "W": W_OPT_PARAMS}
    return family_matrix(kind, table[kind.upper()])


# --------------------------------------------------------------------------
# multiunitarity and the polar iteration


def _residual(x: np.ndarray) -> float:
    return float(np.linalg.norm(x.conj().T @ x - np.eye(x.shape[1])))


def is_multiunitary(u, n: int | None = None, tol: float = 1e-10) -> MultiunitaryReport:
    """Unitarity of ``U``, ``U^R`` and ``U^Gamma`` with Frobenius residuals."""
    u = np.asarray(u, dtype=complex)
    if n is None:
        n = int(round(np.sqrt(u.shape[0])))
    res = (
        _residual(u),
        _residual(reshuffle(u, n)),
        _residual(partial_transpose(u, (n, n))),
    )
    return MultiunitaryReport(res[0] < tol, res[1] < tol, res[2] < tol, res)


def rather_step(u, n: int) -> np.ndarray:
    """One iteration ``U -> polar((U^R)^Gamma)``."""
    return polar_unitary(partial_transpose(reshuffle(u, n), (n, n)))


def rather_iterate(
    u0,
    n: int,
    max_steps: int = 2000,
    tol: float = 1e-10,
    stall_window: int | None = None,
    stall_tol: float = 1e-13,
    record: bool = True,
) -> RatherResult:
    """Iterate the polar map until ``U``, ``U^R`` and ``U^Gamma`` are unitary.

    Stops on convergence (all three residuals below ``tol``), at
    ``max_steps``, or, when ``stall_window`` is given, on a stall (the
    entangling power moves by less than ``stall_tol`` over ``stall_window``
    steps). Near convergence the residuals shrink geometrically while the
    entangling power moves only quadratically, so the stall test is off by
    default. A rank-deficient intermediate aborts the run
    with ``reason="rank_deficient"``.
    """
    u = require_unitary(u0)
    trace = []
    history = []
    for step in range(1, max_steps + 1):
        try:
            u = rather_step(u, n)
        except RankDeficientError:
            return RatherResult(u, False, step, "rank_deficient", trace)
        ep = entangling_power(u, n)
        history.append(ep)
        if record:
            trace.append(SearchTrace(step, ep, gate_typicality(u, n), float("nan"), 0.0, True))
        rep = is_multiunitary(u, n, tol)
        if rep.ok:
            return RatherResult(u, True, step, "converged", trace)
        if stall_window and len(history) > stall_window and abs(history[-1] - history[-1 - stall_window]) < stall_tol:
            return RatherResult(u, False, step, "stalled", trace)
    return RatherResult(u, False, max_steps, "max_steps", trace)


def random_hermitian(side: int, seed=None) -> np.ndarray:
    """Hermitian ``(A + A^+)/2`` with ``A`` complex Gaussian, ``E|A_ij|^2 = 1/side``."""
    rng = np.random.default_rng(seed)
    a = (rng.normal(size=(side, side)) + 1j * rng.normal(size=(side, side))) / np.sqrt(2 * side)
    return (a + a.conj().T) / 2


def perturbed_seed(base, eps: float = 0.1, seed=None) -> np.ndarray:
    """``base @ exp(i eps H)`` with ``H`` from :func:`random_hermitian`."""
    base = np.asarray(base, dtype=complex)
    return base @ expm(1j * eps * random_hermitian(base.shape[0], seed))


# --------------------------------------------------------------------------
# Hessian-guided ascent


def steepest_ascent(
    u0,
    n: int = 6,
    iters: int = 1,
    grid: int = 241,
    pos_tol: float = 1e-8,
    zero_rel: float = ZERO_EIG_REL,
) -> AscentResult:
    """Climb the entangling power along the leading Hessian eigenvector.

    Each outer step evaluates the Hessian, takes the eigenvector of the
    largest eigenvalue (stopping when none exceeds ``pos_tol``), scans
    ``t -> e_p(U exp(i t sum_j v_j H_j))`` on a grid over ``[-pi, pi]`` and
    refines the best grid point with a bounded scalar search. A step is
    accepted only if it raises ``e_p``.
    """
    u = require_unitary(u0)
    side = u.shape[0]
    basis = hermitian_basis(side)
    ep0 = entangling_power(u, n)
    gnorm = lambda m: float(np.max(np.abs(ep_gradient(m, n))))  # noqa: E731
    trace = [SearchTrace(0, ep0, gate_typicality(u, n), gnorm(u), 0.0, True)]
    for it in range(1, iters + 1):
        h = ep_hessian(u, n, basis)
        w, v = np.linalg.eigh(0.5 * (h + h.T))
        if w[-1] <= pos_tol:
            break
        x = np.tensordot(v[:, -1], basis, axes=1)
        evals, evecs = np.linalg.eigh(x)

        def move(t):
            return u @ (evecs * np.exp(1j * t * evals)) @ evecs.conj().T

        ts = np.linspace(-np.pi, np.pi, grid)
        vals = np.array([entangling_power(move(t), n) for t in ts])
        k = int(np.argmax(vals))
        dt = ts[1] - ts[0]
        res = minimize_scalar(
            lambda t: -entangling_power(move(t), n),
            bounds=(ts[k] - dt, ts[k] + dt),
            method="bounded",
            options={"xatol": 1e-12},
        )
        t_best, e_best = (res.x, -res.fun) if -res.fun >= vals[k] else (ts[k], vals[k])
        accepted = e_best > ep0
        if accepted:
            u = move(t_best)
            ep0 = float(e_best)
        trace.append(SearchTrace(it, ep0, gate_typicality(u, n), gnorm(u), float(t_best), bool(accepted)))
        if not accepted:
            break
    return AscentResult(u, trace)


# --------------------------------------------------------------------------
# block structure

# 1-based rows of U holding the twelve vectors of each pair of column groups.
AB_ROWS = (1, 2, 7, 8, 15, 16, 21, 22, 29, 30, 35, 36)
CD_ROWS = (3, 4, 9, 10, 17, 18, 23, 24, 25, 26, 31, 32)
EF_ROWS = (5, 6, 11, 12, 13, 14, 19, 20, 27, 28, 33, 34)


def _blocks(x: np.ndarray) -> list:
    return [x[4 * k : 4 * k + 4] for k in range(3)]


def block_letters(v: BlockVectors) -> dict:
    """All six letter families ``a..f`` after applying the block equalities.

    Block ``k`` of ``c`` (vectors ``c_{4k+1..4k+4}``) repeats block ``k-1`` of
    ``a`` and block ``k`` of ``e`` repeats block ``k+1`` of ``a`` (indices mod
    3); likewise for ``d`` and ``f`` from ``b``.
    """
    a = np.asarray(v.a, dtype=complex)
    b = np.asarray(v.b, dtype=complex)
    if a.shape != (12, 6) or b.shape != (12, 6):
        raise ValueError("block vectors must be two (12, 6) arrays")
    ab, bb = _blocks(a), _blocks(b)
    shift = lambda blocks, s: np.concatenate([blocks[(k + s) % 3] for k in range(3)])  # noqa: E731
    return {
        "a": a,
        "b": b,
        "c": shift(ab, -1),
        "d": shift(bb, -1),
        "e": shift(ab, 1),
        "f": shift(bb, 1),
    }


def block_assemble(v: BlockVectors) -> np.ndarray:
    """Matrix of order 36 with the block pattern generated by 24 vectors."""
    letters = block_letters(v)
    u = np.zeros((36, 36), dtype=complex)
    for rows, (left, right), g in (
        (AB_ROWS, ("a", "b"), 0),
        (CD_ROWS, ("c", "d"), 2),
        (EF_ROWS, ("e", "f"), 4),
    ):
        for idx, r in enumerate(rows):
            u[r - 1, 6 * g : 6 * g + 6] = letters[left][idx]
            u[r - 1, 6 * g + 6 : 6 * g + 12] = letters[right][idx]
    return u


def _reshuffle_layout() -> tuple:
    rows = []
    for g in range(6):
        start = 2 * (g // 2)
        for pos, letter in enumerate("abcdef"):
            col = (start + 2 * (pos // 2)) % 6
            rows.append(((col, letter, 2 * g + 1), (col + 1, letter, 2 * g + 2)))
    return tuple(rows)


def _transpose_layout() -> tuple:
    # per letter: (first vector index, column block) for its three row pairs
    order = {
        "a": ((1, 0), (5, 2), (9, 4)),
        "b": ((1, 0), (5, 2), (9, 4)),
        "c": ((9, 4), (1, 0), (5, 2)),
        "d": ((9, 4), (1, 0), (5, 2)),
        "e": ((5, 2), (9, 4), (1, 0)),
        "f": ((5, 2), (9, 4), (1, 0)),
    }
    rows = []
    for letter in "abcdef":
        for first, col in order[letter]:
            for k in (first, first + 1):
                rows.append(((col, letter, k), (col + 1, letter, k + 2)))
    return tuple(rows)


# Row r of U^R holds vector ``letter_k`` in column block ``col`` for each
# ``(col, letter, k)`` of RESHUFFLE_LAYOUT[r]; likewise row r of the
# transposed partial transpose (U^Gamma)^T for TRANSPOSE_LAYOUT. Every other
# entry vanishes.
RESHUFFLE_LAYOUT = _reshuffle_layout()
TRANSPOSE_LAYOUT = _transpose_layout()


def layout_matrix(v: BlockVectors, layout) -> np.ndarray:
    """Matrix of order 36 placing the block vectors according to ``layout``."""
    letters = block_letters(v)
    out = np.zeros((36, 36), dtype=complex)
    for r, cells in enumerate(layout):
        for col, letter, k in cells:
            out[r, 6 * col : 6 * col + 6] = letters[letter][k - 1]
    return out


def block_arrangements(v: BlockVectors) -> tuple:
    """The three 12x12 arrangements ``(M, M_R, M_Gamma)`` of the vectors."""
    a = np.asarray(v.a, dtype=complex)
    b = np.asarray(v.b, dtype=complex)
    m = np.hstack([a, b])
    mr, mg = [], []
    for k in range(3):
        o = 4 * k
        mr += [np.r_[a[o], a[o + 1]], np.r_[b[o], b[o + 1]], np.r_[a[o + 2], a[o + 3]], np.r_[b[o + 2], b[o + 3]]]
        mg += [np.r_[a[o], a[o + 2]], np.r_[a[o + 1], a[o + 3]], np.r_[b[o], b[o + 2]], np.r_[b[o + 1], b[o + 3]]]
    return m, np.array(mr), np.array(mg)


def vectors_from_m(m) -> BlockVectors:
    m = np.asarray(m, dtype=complex)
    return BlockVectors(m[:, :6].copy(), m[:, 6:].copy())


def _vectors_from_mr(mr) -> BlockVectors:
    a = np.zeros((12, 6), dtype=complex)
    b = np.zeros((12, 6), dtype=complex)
    for k in range(3):
        o = 4 * k
        r = mr[o : o + 4]
        a[o], a[o + 1] = r[0, :6], r[0, 6:]
        b[o], b[o + 1] = r[1, :6], r[1, 6:]
        a[o + 2], a[o + 3] = r[2, :6], r[2, 6:]
        b[o + 2], b[o + 3] = r[3, :6], r[3, 6:]
    return BlockVectors(a, b)


def _vectors_from_mg(mg) -> BlockVectors:
    a = np.zeros((12, 6), dtype=complex)
    b = np.zeros((12, 6), dtype=complex)
    for k in range(3):
        o = 4 * k
        r = mg[o : o + 4]
        a[o], a[o + 2] = r[0, :6], r[0, 6:]
        a[o + 1], a[o + 3] = r[1, :6], r[1, 6:]
        b[o], b[o + 2] = r[2, :6], r[2, 6:]
        b[o + 1], b[o + 3] = r[3, :6], r[3, 6:]
    return BlockVectors(a, b)


def _symmetrize(v: BlockVectors) -> BlockVectors:
    """Half step towards tensors invariant under cyclic shifts of the binary slots.

    The vectors form a tensor ``T[m, s, p, q, c]`` (block, letter, two binary
    row labels, component). Exactly invariant tensors give a singular ``M``,
    so the result is the midpoint between ``T`` and its cyclic average.
    """
    t = np.stack([v.a, v.b]).reshape(2, 3, 2, 2, 6).transpose(1, 0, 2, 3, 4)
    avg = (t + t.transpose(0, 2, 3, 1, 4) + t.transpose(0, 3, 1, 2, 4)) / 3
    t = (0.5 * (t + avg)).transpose(1, 0, 2, 3, 4).reshape(2, 12, 6)
    return BlockVectors(t[0], t[1])


def _score(v: BlockVectors) -> tuple:
    u = block_assemble(v)
    return u, entangling_power(u, 6)


def block_search(strategy: str = "random", seed=None, budget: int = 1000, polish: int = 30) -> BlockSearchResult:
    """Best unitary block-patterned matrix found under a budget of candidates.

    ``M`` is always kept unitary so the assembled matrix is unitary.
    Strategies: ``random`` draws Haar ``M``; ``hadamard`` uses a Fourier
    matrix of order 12 dressed with random phases and permutations;
    ``invariant_vectors`` keeps the vector tensor symmetric under exchange of
    its three binary indices. Each candidate is polished by ``polish`` rounds
    of alternating polar projections onto the three arrangements.
    """
    rng = np.random.default_rng(seed)
    if strategy not in ("random", "hadamard", "invariant_vectors"):
        raise ValueError(f"unknown strategy {strategy!r}")
    f12 = np.exp(2j * np.pi * np.outer(np.arange(12), np.arange(12)) / 12) / np.sqrt(12)
    best = None
    n_start = max(1, budget // (polish + 1))
    for _ in range(n_start):
        if strategy == "hadamard":
            d1 = np.exp(2j * np.pi * rng.random(12))
            d2 = np.exp(2j * np.pi * rng.random(12))
            m = (d1[:, None] * f12 * d2[None, :])[rng.permutation(12)][:, rng.permutation(12)]
        else:
            m = haar_sample(12, "unitary", rng)
        v = vectors_from_m(m)
        if strategy == "invariant_vectors":
            v = vectors_from_m(polar_unitary(block_arrangements(_symmetrize(v))[0]))
        for _ in range(polish + 1):
            u, ep = _score(v)
            if best is None or ep > best[1]:
                best = (u, ep, v)
            try:
                _, mr, _ = block_arrangements(v)
                v = _vectors_from_mr(polar_unitary(mr))
                _, _, mg = block_arrangements(v)
                v = _vectors_from_mg(polar_unitary(mg))
                if strategy == "invariant_vectors":
                    v = _symmetrize(v)
                v = vectors_from_m(polar_unitary(block_arrangements(v)[0]))
            except RankDeficientError:
                break
    u, ep, v = best
    return BlockSearchResult(u, float(ep), float(avg_singular_entropy(u, 6)), v)


# --------------------------------------------------------------------------
# W-family projection on the (e_p, g_t) plane


def w_region_scan(samples: int = 1000, seed=None, curve_points: int = 181) -> RegionScan:
    """``(e_p, g_t)`` of random W-family members and of two boundary curves."""
    rng = np.random.default_rng(seed)

    def point(p):
        u = family_matrix("W", p)
        return entangling_power(u, 6), gate_typicality(u, 6)

    pts = np.array([point(rng.uniform(-np.pi, np.pi, 5)) for _ in range(samples)]).reshape(-1, 2)
    xs = np.linspace(-np.pi, np.pi, curve_points)
    boundary = np.array([point((x, x, 0.0, -x, -x)) for x in xs])
    ellipse = np.array(
        [point((-np.pi / 6, -np.pi / 12 + x, np.pi / 12 + x, np.pi / 6, np.pi / 4 + x)) for x in xs]
    )
    return RegionScan(pts, boundary, ellipse, xs)


def row_rotation_probe(u, n: int = 6, angles: Sequence[float] = (1e-3, -1e-3)) -> float:
    """Largest gain of ``e_p`` over real rotations of every pair of rows by small angles."""
    u = require_unitary(u)
    base = entangling_power(u, n)
    side = u.shape[0]
    best = -np.inf
    for i in range(side):
        for j in range(i + 1, side):
            for a in angles:
                v = u.copy()
                c, s = np.cos(a), np.sin(a)
                v[i], v[j] = c * u[i] - s * u[j], s * u[i] + c * u[j]
                best = max(best, entangling_power(v, n) - base)
    return float(best)

