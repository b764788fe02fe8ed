"""Unistochasticity of bistochastic matrices.

A bistochastic ``B`` is unistochastic when some unitary ``U`` has
``B_ij = |U_ij|^2``. This module provides the bracelet polygon test, a
decision procedure for order 4, a constructive solver for circulant matrices
of order 4, robust Hadamard matrices, unitaries along rays and triangles of
the Birkhoff polytope, and the equi-entangled bases built from them.

Row and column indices in returned reports are 0-based.
"""
from __future__ import annotations

import itertools
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .core import as_matrix, polar_unitary, require_unitary, special_matrix

STOCHASTIC_TOL = 1e-12
DEFAULT_GRID = 20000
DEFAULT_TOL = 1e-9

V1_DIRECTION = np.array(
    [[9, -3, -3, -3], [-3, 1, 1, 1], [-3, 1, 1, 1], [-3, 1, 1, 1]], dtype=float
)
V2_DIRECTION = np.array(
    [[7, -1, -1, -5], [-1, -1, -1, 3], [-1, -1, -1, 3], [-5, 3, 3, -1]], dtype=float
)
MATRIX_J = np.array(
    [[24, 16, 35, 25], [38, 21, 12, 29], [23, 24, 14, 39], [15, 39, 39, 7]], dtype=float
) / 100.0


class BraceletReport(NamedTuple):
    ok: bool
    kind: str | None = None  # "row" or "column"
    pair: tuple[int, int] | None = None


class UnistochasticCertificate(NamedTuple):
    verdict: str  # unistochastic | not_bracelet | rejected_by_search
    witness: np.ndarray | None
    residual: float | None
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.verdict == "unistochastic"

    def to_json(self) -> dict:
        from .core import matrix_to_json

        out = {"verdict": self.verdict, "residual": self.residual}
        if self.witness is not None:
            out["witness"] = matrix_to_json(self.witness)
        if self.note:
            out["note"] = self.note
        return out


class RayUnitary(NamedTuple):
    b: np.ndarray
    u: np.ndarray


# --------------------------------------------------------------------------
# validation and the bracelet test


def as_bistochastic(b, tol: float = STOCHASTIC_TOL) -> np.ndarray:
    """Validate a bistochastic matrix and clip tiny negative entries to zero."""
    b = np.asarray(b, dtype=float)
    if b.ndim != 2 or b.shape[0] != b.shape[1] or b.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {b.shape}")
    if not np.all(np.isfinite(b)):
        raise ValueError("matrix contains NaN or Inf entries")
    if np.any(b < -1e-15):
        raise ValueError("bistochastic matrices have nonnegative entries")
    b = np.clip(b, 0.0, None)
    if np.max(np.abs(b.sum(axis=0) - 1)) > tol or np.max(np.abs(b.sum(axis=1) - 1)) > tol:
        raise ValueError("row and column sums must equal 1")
    return b


def residual(b, u) -> float:
    """``max |B_ij - |U_ij|^2|``."""
    return float(np.max(np.abs(np.asarray(b, dtype=float) - np.abs(u) ** 2)))


def _polygon_ok(lengths: np.ndarray, tol: float) -> bool:
    return 2.0 * float(np.max(lengths)) <= float(np.sum(lengths)) + tol


def is_bracelet(b, tol: float = 1e-12) -> BraceletReport:
    """Check the polygon inequalities for every pair of rows and of columns.

    For rows ``l, k`` the segments ``sqrt(B_lj B_kj)`` must close a polygon,
    i.e. the longest is at most the sum of the rest. The first violating pair
    is reported.
    """
    b = as_bistochastic(b)
    r = np.sqrt(b)
    for kind, m in (("row", r), ("column", r.T)):
        for l, k in itertools.combinations(range(m.shape[0]), 2):
            if not _polygon_ok(m[l] * m[k], tol):
                return BraceletReport(False, kind, (l, k))
    return BraceletReport(True)


# --------------------------------------------------------------------------
# decision procedure for order 4


def _triangle_phases(z: np.ndarray, p: float, q: float, branch: int):
    """Solve ``p e^{ia} + q e^{ib} = z`` for arrays ``z`` with ``p, q > 0``.

    Returns ``(a, b, feasible)``; the two solutions are mirror images across
    ``z`` and are selected by ``branch = +1 / -1``.
    """
    r = np.abs(z)
    feasible = (r >= abs(p - q) - 1e-13) & (r <= p + q + 1e-13)
    rs = np.where(r > 0, r, 1.0)
    ca = np.clip((p * p + rs * rs - q * q) / (2 * p * rs), -1.0, 1.0)
    cb = np.clip((q * q + rs * rs - p * p) / (2 * q * rs), -1.0, 1.0)
    t = np.angle(z)
    return t + branch * np.arccos(ca), t - branch * np.arccos(cb), feasible


def _phi_window(l1: float, l2: float, lo: float, hi: float):
    """Interval of ``phi`` in ``[0, pi]`` with ``lo <= |l1 + l2 e^{i phi}| <= hi``.

    ``|l1 + l2 e^{i phi}|`` decreases monotonically on ``[0, pi]``.
    """
    def phi_at(radius):
        c = (radius * radius - l1 * l1 - l2 * l2) / (2 * l1 * l2)
        return float(np.arccos(np.clip(c, -1.0, 1.0)))

    r0, rpi = l1 + l2, abs(l1 - l2)
    if hi < rpi - 1e-13 or lo > r0 + 1e-13:
        return None
    return phi_at(min(hi, r0)), phi_at(max(lo, rpi))


class _Quadrilateral:
    """Dephased completion of a 4x4 bistochastic matrix from the phase ``phi``.

    Rows 1-2 and columns 1-2 are fixed by orthogonality up to the branch
    choices; the lower-right block follows from unitarity as
    ``D = -Y A^dagger (X^dagger)^{-1}``.
    """

    def __init__(self, b: np.ndarray):
        self.b = b
        self.s = np.sqrt(b)
        s = self.s
        self.l = s[0] * s[1]  # row segments
        self.m = s[:, 0] * s[:, 1]  # column segments

    def window(self):
        l, m = self.l, self.m
        wa = _phi_window(l[0], l[1], abs(l[2] - l[3]), l[2] + l[3])
        wb = _phi_window(m[0], m[1], abs(m[2] - m[3]), m[2] + m[3])
        if wa is None or wb is None:
            return None
        lo, hi = max(wa[0], wb[0]), min(wa[1], wb[1])
        return (lo, hi) if lo <= hi + 1e-14 else None

    def blocks(self, phi: np.ndarray, sa: int, sb: int):
        s, l, m = self.s, self.l, self.m
        e = np.exp(1j * phi)
        a1, a2, fa = _triangle_phases(-(l[0] + l[1] * e), l[2], l[3], sa)
        b1, b2, fb = _triangle_phases(-(m[0] + m[1] * e), m[2], m[3], sb)
        k = phi.size
        A = np.empty((k, 2, 2), dtype=complex)
        A[:, 0, 0], A[:, 0, 1], A[:, 1, 0] = s[0, 0], s[0, 1], s[1, 0]
        A[:, 1, 1] = s[1, 1] * e
        X = np.empty((k, 2, 2), dtype=complex)
        X[:, 0, 0], X[:, 0, 1] = s[0, 2], s[0, 3]
        X[:, 1, 0], X[:, 1, 1] = s[1, 2] * np.exp(1j * a1), s[1, 3] * np.exp(1j * a2)
        Y = np.empty((k, 2, 2), dtype=complex)
        Y[:, 0, 0], Y[:, 1, 0] = s[2, 0], s[3, 0]
        Y[:, 0, 1], Y[:, 1, 1] = s[2, 1] * np.exp(1j * b1), s[3, 1] * np.exp(1j * b2)
        xh_inv = np.linalg.inv(np.conj(np.transpose(X, (0, 2, 1))))
        D = -Y @ np.conj(np.transpose(A, (0, 2, 1))) @ xh_inv
        return A, X, Y, D, fa & fb

    def mismatch(self, phi, sa: int, sb: int):
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        *_, D, ok = self.blocks(phi, sa, sb)
        return np.abs(D[:, 0, 0]) ** 2 - self.b[2, 2], ok

    def unitary(self, phi: float, sa: int, sb: int) -> np.ndarray:
        A, X, Y, D, _ = self.blocks(np.array([phi]), sa, sb)
        return np.block([[A[0], X[0]], [Y[0], D[0]]])


def _best_frame(b: np.ndarray):
    """Row and column permutations putting a light, zero-free 2x2 block first.

    Returns ``(rows, cols, degenerate)`` where ``degenerate`` flags that
    every admissible choice still has a zero in the first two rows/columns.
    """
    best = None
    for r in itertools.combinations(range(4), 2):
        for c in itertools.combinations(range(4), 2):
            weight = b[np.ix_(r, c)].sum()
            if weight >= 1.0 - 1e-12:
                continue
            rows = list(r) + [i for i in range(4) if i not in r]
            cols = list(c) + [j for j in range(4) if j not in c]
            p = b[np.ix_(rows, cols)]
            zeros = int(np.sum(p[:2] <= 1e-14) + np.sum(p[2:, :2] <= 1e-14))
            key = (zeros, weight)
            if best is None or key < best[0]:
                best = (key, rows, cols)
    if best is None:
        return None
    return best[1], best[2], best[0][0] > 0


def _phase_search(b: np.ndarray, tol: float, starts: int = 64, steps: int = 3000, seed: int = 0):
    """Alternate between the modulus constraint and the nearest unitary."""
    rng = np.random.default_rng(seed)
    s = np.sqrt(b)
    best = (np.inf, None)
    for _ in range(starts):
        u = s * np.exp(2j * np.pi * rng.random(b.shape))
        for _ in range(steps):
            try:
                u = polar_unitary(s * np.exp(1j * np.angle(u)))
            except ValueError:
                break
            res = residual(b, u)
            if res < tol:
                return u, res
        res = residual(b, u)
        if res < best[0]:
            best = (res, u)
    return None, best[0]


def decide_unistochastic_4(b, grid: int = DEFAULT_GRID, tol: float = DEFAULT_TOL) -> UnistochasticCertificate:
    """Decide whether a 4x4 bistochastic matrix is unistochastic.

    Matrices failing the bracelet test are rejected at once. Otherwise rows
    and columns are permuted so that the upper-left 2x2 block has total
    weight below one, the phase ``phi`` of ``U_22`` is scanned over the
    window where both unitarity quadrilaterals close, for each of the four
    branch combinations, and roots of ``|D_11|^2 - B_33`` are refined with
    Brent's method. A rejection means no witness was found at this grid
    resolution and tolerance.
    """
    b = as_bistochastic(b)
    if b.shape != (4, 4):
        raise ValueError("decide_unistochastic_4 needs a 4x4 matrix")
    if not is_bracelet(b).ok:
        return UnistochasticCertificate("not_bracelet", None, None)
    if np.max(np.abs(b - 0.25)) < 1e-12:
        u = special_matrix("fourier", 4) / 2.0
        return UnistochasticCertificate("unistochastic", u, residual(b, u))
    frame = _best_frame(b)
    if frame is None:  # every 2x2 block weighs 1, which forces the flat matrix
        u = special_matrix("fourier", 4) / 2.0
        return _certify(b, u, tol)
    rows, cols, degenerate = frame
    pb = b[np.ix_(rows, cols)]
    unpermute = lambda u: u[np.argsort(rows)][:, np.argsort(cols)]  # noqa: E731
    if degenerate:
        u, res = _phase_search(pb, tol)
        note = "zero segment in every frame; alternating-projection search"
        if u is None:
            return UnistochasticCertificate("rejected_by_search", None, None, note)
        return _certify(b, unpermute(u), tol, note)

    quad = _Quadrilateral(pb)
    window = quad.window()
    note = f"rejected at resolution {grid}, tolerance {tol:g}"
    if window is None:
        return UnistochasticCertificate("rejected_by_search", None, None, note)
    phis = np.linspace(window[0], window[1], max(int(grid), 2))
    for sa, sb in ((1, 1), (-1, 1), (1, -1), (-1, -1)):
        f, ok = quad.mismatch(phis, sa, sb)
        f = np.where(ok, f, np.nan)
        for phi in _candidate_roots(quad, phis, f, sa, sb):
            u = quad.unitary(phi, sa, sb)
            cert = _certify(b, unpermute(u), tol)
            if cert.ok:
                return cert
    return UnistochasticCertificate("rejected_by_search", None, None, note)


def _candidate_roots(quad: _Quadrilateral, phis, f, sa, sb):
    """Brent roots at sign changes, then refined near-touching minima."""
    g = lambda x: float(quad.mismatch(x, sa, sb)[0][0])  # noqa: E731
    fa, fb = f[:-1], f[1:]
    idx = np.nonzero((fa * fb <= 0) & np.isfinite(fa) & np.isfinite(fb))[0]
    for i in idx:
        if fa[i] == 0:
            yield phis[i]
        elif fb[i] == 0:
            yield phis[i + 1]
        else:
            yield brentq(g, phis[i], phis[i + 1], xtol=1e-15, rtol=1e-15)
    af = np.abs(f)
    interior = np.nonzero(
        (af[1:-1] <= af[:-2]) & (af[1:-1] <= af[2:]) & (af[1:-1] < 1e-4)
    )[0] + 1
    for i in interior:
        res = minimize_scalar(
            lambda x: abs(g(x)), bounds=(phis[i - 1], phis[i + 1]), method="bounded",
            options={"xatol": 1e-15},
        )
        yield float(res.x)


def _certify(b, u, tol, note: str = "") -> UnistochasticCertificate:
    res = residual(b, u)
    uni = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
    if res < tol and uni < 1e-9:
        return UnistochasticCertificate("unistochastic", u, res, note)
    return UnistochasticCertificate("rejected_by_search", None, None, note)


# --------------------------------------------------------------------------
# circulant matrices of order 4


def circulant(first_row: Sequence[float]) -> np.ndarray:
    """Circulant matrix whose ``k``-th row is the first row shifted right ``k`` times."""
    r = np.asarray(first_row)
    n = r.size
    return np.array([np.roll(r, k) for k in range(n)])


def circulant_unistochastic_4(a: float, b: float, c: float, d: float) -> UnistochasticCertificate:
    """Witness for a bracelet circulant with first row ``(a, b, c, d)``.

    The unitary is the circulant with first row
    ``(sqrt a, e^{i alpha} sqrt b, e^{i beta} sqrt c, e^{i gamma} sqrt d)``;
    ``beta`` is a root of a continuous function that changes sign on
    ``[pi/2, 3pi/2]`` and ``alpha``, ``gamma`` follow in closed form.
    """
    w = np.array([a, b, c, d], dtype=float)
    if np.any(w < -1e-15) or abs(w.sum() - 1.0) > STOCHASTIC_TOL:
        raise ValueError("circulant weights must be nonnegative and sum to 1")
    w = np.clip(w, 0.0, None)
    target = circulant(w)
    if not is_bracelet(target).ok:
        return UnistochasticCertificate("not_bracelet", None, None)
    shift = 0
    if w[0] * w[2] > w[1] * w[3]:
        # shifting the first row by one swaps the roles of ac and bd
        shift = 1
        w = np.roll(w, 1)
    u = _circulant_phases(*w)
    if shift:
        u = np.roll(u, -1, axis=1)
    return _certify(target, u, 1e-9)


def _circulant_phases(a, b, c, d) -> np.ndarray:
    sa, sb, sc, sd = np.sqrt([a, b, c, d])
    if b * d == 0.0:
        # bracelet with ac = bd = 0 leaves a single nonzero weight: a permutation
        return circulant(np.sqrt([a, b, c, d])).astype(complex)
    eta = -np.sqrt(a * c / (b * d))

    def f(beta):
        return np.arccos(np.clip(eta * np.cos(beta), -1.0, 1.0))

    def gf(beta):
        x, y = beta + f(beta), beta - f(beta)
        return abs(np.sqrt(a * b) + np.exp(1j * x) * np.sqrt(c * d)) - abs(
            np.sqrt(b * c) + np.exp(1j * y) * np.sqrt(a * d)
        )

    lo, hi = np.pi / 2, 3 * np.pi / 2
    glo, ghi = gf(lo), gf(hi)
    if glo == 0.0:
        beta = lo
    elif ghi == 0.0:
        beta = hi
    elif glo * ghi < 0:
        beta = brentq(gf, lo, hi, xtol=1e-15, rtol=1e-15)
    else:  # both ends touch zero within rounding
        beta = lo if abs(glo) <= abs(ghi) else hi
    fb = f(beta)
    num = np.exp(-1j * fb) * sa * sb + np.exp(1j * beta) * sc * sd
    den = np.exp(1j * (fb - beta)) * sb * sc + sa * sd
    if abs(den) < 1e-300:
        gamma = 0.5 * np.angle(-num) if abs(num) > 0 else 0.0
    else:
        gamma = 0.5 * np.angle(-num / den)
    alpha = gamma + fb
    row = np.array([sa, np.exp(1j * alpha) * sb, np.exp(1j * beta) * sc, np.exp(1j * gamma) * sd])
    return circulant(row)


# --------------------------------------------------------------------------
# robust Hadamard matrices


def _is_prime(q: int) -> bool:
    return q >= 2 and all(q % p for p in range(2, int(q**0.5) + 1))


def _field_squares(q: int):
    """Elements of GF(q) as tuples, subtraction, and the quadratic character.

    Supports primes and squares of primes ``p = 3 mod 4``, the latter as
    ``GF(p)[x]/(x^2 + 1)``.
    """
    if _is_prime(q):
        elems = [(x,) for x in range(q)]
        sub = lambda u, v: ((u[0] - v[0]) % q,)  # noqa: E731
        mul = lambda u, v: ((u[0] * v[0]) % q,)  # noqa: E731
    else:
        p = int(round(q**0.5))
        if p * p != q or not _is_prime(p) or p % 4 != 3:
            raise ValueError(f"no finite field construction for order {q}")
        elems = [(x, y) for x in range(p) for y in range(p)]
        sub = lambda u, v: ((u[0] - v[0]) % p, (u[1] - v[1]) % p)  # noqa: E731
        mul = lambda u, v: (  # noqa: E731
            (u[0] * v[0] - u[1] * v[1]) % p,
            (u[0] * v[1] + u[1] * v[0]) % p,
        )
    zero = elems[0]
    squares = {mul(x, x) for x in elems if x != zero}
    chi = lambda x: 0 if x == zero else (1 if x in squares else -1)  # noqa: E731
    return elems, sub, chi


def _paley_core(q: int) -> np.ndarray:
    """Order ``q + 1`` matrix ``[[0, 1^T], [+-1, Q]]`` from the Jacobsthal matrix."""
    elems, sub, chi = _field_squares(q)
    jac = np.array([[chi(sub(y, x)) for y in elems] for x in elems], dtype=float)
    sign = -1.0 if q % 4 == 3 else 1.0
    c = np.zeros((q + 1, q + 1))
    c[0, 1:] = 1.0
    c[1:, 0] = sign
    c[1:, 1:] = jac
    return c


def _skew_core(n: int) -> np.ndarray | None:
    """Skew conference matrix ``S`` (``S^T = -S``, ``S S^T = (n-1) I``) of order ``n``."""
    if n == 2:
        return np.array([[0.0, 1.0], [-1.0, 0.0]])
    q = n - 1
    if q % 4 == 3 and _is_prime(q):
        return _paley_core(q)
    if n % 2 == 0:
        half = _skew_core(n // 2)
        if half is not None:
            eye = np.eye(n // 2)
            return np.block([[half, half + eye], [half - eye, -half]])
    return None


def robust_hadamard_orders(limit: int = 64) -> list[int]:
    """Orders up to ``limit`` for which :func:`robust_hadamard` has a construction."""
    out = []
    for n in range(1, limit + 1):
        try:
            robust_hadamard(n)
        except ValueError:
            continue
        out.append(n)
    return out


def robust_hadamard(n: int) -> np.ndarray:
    """Unnormalized robust Hadamard matrix of order ``n``.

    Every entry has modulus 1, ``H H^dagger = n I`` and every principal
    submatrix on two indices is itself a 2x2 Hadamard matrix. Real skew
    matrices ``I + S`` come from the Paley construction for ``n - 1`` a prime
    ``3 mod 4`` and from doubling; complex ones ``C + iI`` from symmetric
    conference matrices for ``n - 1`` a prime power ``1 mod 4``.
    """
    n = int(n)
    if n == 1:
        return np.ones((1, 1), dtype=complex)
    s = _skew_core(n)
    if s is not None:
        return (np.eye(n) + s).astype(complex)
    q = n - 1
    if q % 4 == 1:
        try:
            c = _paley_core(q)
        except ValueError:
            c = None
        if c is not None:
            return c + 1j * np.eye(n)
    raise ValueError(f"no robust Hadamard construction known here for order {n}")


def is_robust_hadamard(h, tol: float = 1e-10) -> bool:
    h = as_matrix(h)
    n = h.shape[0]
    if np.max(np.abs(np.abs(h) - 1)) > tol:
        return False
    if np.max(np.abs(h @ h.conj().T - n * np.eye(n))) > tol:
        return False
    for i, j in itertools.combinations(range(n), 2):
        m = h[np.ix_((i, j), (i, j))]
        if np.max(np.abs(m @ m.conj().T - 2 * np.eye(2))) > tol:
            return False
    return True


# --------------------------------------------------------------------------
# rays, triangles and equi-entangled bases


def _perm_matrix(p) -> np.ndarray:
    """Accept a permutation as an index sequence or as a 0/1 matrix."""
    a = np.asarray(p)
    if a.ndim == 1:
        n = a.size
        if sorted(a.tolist()) != list(range(n)):
            raise ValueError("not a permutation of 0..n-1")
        m = np.zeros((n, n))
        m[np.arange(n), a] = 1.0
        return m
    if a.ndim == 2 and a.shape[0] == a.shape[1]:
        ok = np.all((a == 0) | (a == 1)) and np.all(a.sum(0) == 1) and np.all(a.sum(1) == 1)
        if not ok:
            raise ValueError("not a permutation matrix")
        return a.astype(float)
    raise ValueError("permutation must be an index list or a square 0/1 matrix")


def _perm_index(p) -> np.ndarray:
    return np.argmax(_perm_matrix(p), axis=1)


def ray_unitary(n: int, alpha_ray: float, p=None) -> RayUnitary:
    """Unitary ``U`` with ``|U|^2 = alpha P + (1 - alpha) W_n``.

    ``U = P (sqrt(x) D + sqrt(y) (H - D))`` where ``H`` is robust Hadamard,
    ``D`` its diagonal, ``x = alpha + (1 - alpha)/n`` and ``y = (1 - alpha)/n``.
    Valid for ``-1/(n-1) <= alpha <= 1``; the negative part is the counter-ray.
    """
    if n < 1:
        raise ValueError("order must be positive")
    lo = -1.0 / (n - 1) if n > 1 else 0.0
    if not (lo - 1e-15 <= alpha_ray <= 1.0 + 1e-15):
        raise ValueError(f"alpha must lie in [{lo:.6g}, 1] for order {n}")
    pm = np.eye(n) if p is None else _perm_matrix(p)
    if pm.shape != (n, n):
        raise ValueError("permutation size does not match n")
    h = robust_hadamard(n)
    d = np.diag(np.diag(h))
    x = max(alpha_ray + (1.0 - alpha_ray) / n, 0.0)
    y = max((1.0 - alpha_ray) / n, 0.0)
    u = pm @ (np.sqrt(x) * d + np.sqrt(y) * (h - d))
    b = alpha_ray * pm + (1.0 - alpha_ray) * np.full((n, n), 1.0 / n)
    return RayUnitary(b, u)


def is_strongly_complementary(p, q) -> bool:
    """Permutations ``P, Q`` with no shared entry such that
    ``P_ij = P_kl = Q_il = 1`` always forces ``Q_kj = 1``."""
    pi, rho = _perm_index(p), _perm_index(q)
    if pi.size != rho.size:
        return False
    n = pi.size
    pm, qm = _perm_matrix(p).astype(int), _perm_matrix(q).astype(int)
    if np.any(pm & qm):
        return False
    for i in range(n):
        for k in range(n):
            j, l = pi[i], pi[k]
            if qm[i, l] and not qm[k, j]:
                return False
    return True


def _pair_unitary(b_weight: float, a_weight: float, c_weight: float, m: int) -> np.ndarray:
    """Unitary for ``I_m (x) [[b, a], [a, b]] + c (J - I_m (x) J_2)`` in pair order.

    Uses a robust Hadamard ``K`` of order ``m``:
    ``U = D_K (x) R + (K - D_K) (x) sqrt(c) [[1, 1], [1, -1]]`` with
    ``R = [[sqrt b, sqrt a], [-sqrt a, sqrt b]]``.
    """
    k = robust_hadamard(m)
    dk = np.diag(np.diag(k))
    r = np.array([[np.sqrt(b_weight), np.sqrt(a_weight)], [-np.sqrt(a_weight), np.sqrt(b_weight)]])
    g = np.sqrt(c_weight) * np.array([[1.0, 1.0], [1.0, -1.0]])
    return np.kron(dk, r) + np.kron(k - dk, g)


def _pair_compatible_hadamard(n: int, attempts: int = 20000, seed: int = 0) -> np.ndarray:
    """Robust Hadamard ``H`` of order ``n`` such that ``H Q`` is robust too,
    where ``Q`` swaps the consecutive pairs ``(0, 1), (2, 3), ...``.

    Then ``sqrt(B) * H`` (entrywise) is unitary for every matrix of the
    triangle spanned by the identity, ``Q`` and ``W_n``. Candidates are
    simultaneous relabellings of rows and columns of :func:`robust_hadamard`.
    """
    h = robust_hadamard(n)
    swap = np.arange(n) ^ 1
    rng = np.random.default_rng(seed)
    for t in range(attempts):
        perm = np.arange(n) if t == 0 else rng.permutation(n)
        cand = h[np.ix_(perm, perm)]
        if is_robust_hadamard(cand[:, swap]):
            return cand
    raise ValueError(f"no pair-compatible robust Hadamard matrix found for order {n}")


def triangle_unistochastic(n: int, p, q, w1: float, w2: float) -> RayUnitary:
    """Unitary for ``w1 P + w2 Q + (1 - w1 - w2) W_n`` with ``P, Q`` strongly complementary.

    ``P^{-1} Q`` is then a fixed-point-free involution; after relabelling its
    transpositions as consecutive pairs the matrix has a pair-block form.
    With a robust Hadamard matrix of order ``n / 2`` the unitary is built by
    :func:`_pair_unitary`; otherwise it is ``sqrt(B)`` times a relabelled
    robust Hadamard matrix of order ``n``, entrywise.
    """
    if n % 2:
        raise ValueError("strongly complementary pairs exist only in even order")
    pm, qm = _perm_matrix(p), _perm_matrix(q)
    if pm.shape != (n, n) or qm.shape != (n, n):
        raise ValueError("permutation size does not match n")
    if not is_strongly_complementary(pm, qm):
        raise ValueError("P and Q are not strongly complementary")
    w3 = 1.0 - w1 - w2
    if min(w1, w2, w3) < -1e-15:
        raise ValueError("weights must be convex")
    inv = np.argmax(pm.T @ qm, axis=1)  # the involution P^T Q as an index map
    order, seen = [], set()
    for i in range(n):
        if i not in seen:
            order += [i, int(inv[i])]
            seen |= {i, int(inv[i])}
    sigma = np.zeros((n, n))
    sigma[np.arange(n), order] = 1.0  # sigma maps the original labels to pair order
    c = w3 / n
    try:
        u0 = _pair_unitary(w1 + c, w2 + c, c, n // 2)
    except ValueError:
        h = _pair_compatible_hadamard(n)
        b0 = np.full((n, n), c) + np.kron(np.eye(n // 2), [[w1, w2], [w2, w1]])
        u0 = np.sqrt(b0) * h
    u = pm @ sigma.T @ u0 @ sigma
    b = w1 * pm + w2 * qm + w3 * np.full((n, n), 1.0 / n)
    return RayUnitary(b, u)


def equi_entangled_basis(u) -> list[np.ndarray]:
    """Vectors ``psi_ij = sum_k U_ik |k> (x) |k + j mod n>`` for ``i, j < n``.

    They form an orthonormal basis of ``C^n (x) C^n``; the Schmidt
    coefficients of ``psi_ij`` are ``|U_ik|^2``, so rows of ``|U|^2`` with
    equal multisets give equally entangled vectors.
    """
    u = require_unitary(u, 1e-9)
    n = u.shape[0]
    out = []
    for i in range(n):
        for j in range(n):
            psi = np.zeros(n * n, dtype=complex)
            for k in range(n):
                psi[k * n + (k + j) % n] = u[i, k]
            out.append(psi)
    return out


def schmidt_coefficients(psi, n: int) -> np.ndarray:
    """Squared Schmidt coefficients of a vector in ``C^n (x) C^n``, descending."""
    s = np.linalg.svd(np.asarray(psi, dtype=complex).reshape(n, n), compute_uv=False)
    return s**2
