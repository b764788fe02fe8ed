"""Dense complex linear algebra kernel.

Matrices are plain two-dimensional ``numpy`` arrays of dtype ``complex128``.
A bipartite matrix of side ``dim_a * dim_b`` is indexed as ``M[(i, k), (j, l)]``
with ``i, j`` labelling the first factor and ``k, l`` the second factor, so the
``(i, j)`` block of size ``dim_b x dim_b`` sits at rows ``i*dim_b ...`` and
columns ``j*dim_b ...``.
"""
from __future__ import annotations

import json
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg
from scipy.stats import ortho_group, unitary_group

UNITARY_TOL = 1e-10
RANK_TOL = 1e-12


class BipartiteDims(NamedTuple):
    """Tensor-factor dimensions attached to a square matrix."""

    dim_a: int
    dim_b: int

    @property
    def side(self) -> int:
        return self.dim_a * self.dim_b


class RankDeficientError(ValueError):
    """Raised when a polar decomposition is asked for a singular matrix."""

    def __init__(self, sigma_min: float, sigma_max: float):
        self.sigma_min = float(sigma_min)
        self.sigma_max = float(sigma_max)
        super().__init__(
            f"matrix is rank deficient: smallest singular value {sigma_min:.3e} "
            f"(largest {sigma_max:.3e})"
        )


def as_matrix(m) -> np.ndarray:
    """Return ``m`` as a finite square-or-rectangular complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains NaN or Inf entries")
    return a


def _square_dims(m: np.ndarray, dims) -> BipartiteDims:
    """Normalize ``dims`` (int n meaning (n, n), or a pair) and check the side."""
    if dims is None:
        side = m.shape[0]
        n = int(round(np.sqrt(side)))
        if n * n != side:
            raise ValueError(f"side {side} is not a perfect square; pass dims")
        dims = BipartiteDims(n, n)
    elif isinstance(dims, (int, np.integer)):
        dims = BipartiteDims(int(dims), int(dims))
    else:
        dims = BipartiteDims(int(dims[0]), int(dims[1]))
    if m.shape[0] != m.shape[1] or m.shape[0] != dims.side:
        raise ValueError(
            f"matrix of shape {m.shape} does not match dims {tuple(dims)}"
        )
    return dims


def reshuffle(m, n: int | None = None) -> np.ndarray:
    """Reshuffle ``M[(i,k),(j,l)] -> M^R[(i,j),(k,l)]``.

    The ``(i, j)`` block of ``m`` becomes row ``(i, j)`` of the result,
    read row by row. Both factors must have the same dimension ``n``.
    """
    m = as_matrix(m)
    d = _square_dims(m, n)
    if d.dim_a != d.dim_b:
        raise ValueError("reshuffling needs equal factor dimensions")
    n = d.dim_a
    return m.reshape(n, n, n, n).transpose(0, 2, 1, 3).reshape(n * n, n * n)


def partial_transpose(m, dims=None, subsystem: str = "B") -> np.ndarray:
    """Partial transpose on one tensor factor.

    ``subsystem="B"`` transposes every block in place; ``"A"`` transposes the
    grid of blocks.
    """
    m = as_matrix(m)
    d = _square_dims(m, dims)
    t = m.reshape(d.dim_a, d.dim_b, d.dim_a, d.dim_b)
    if subsystem.upper() == "B":
        t = t.transpose(0, 3, 2, 1)
    elif subsystem.upper() == "A":
        t = t.transpose(2, 1, 0, 3)
    else:
        raise ValueError("subsystem must be 'A' or 'B'")
    return t.reshape(d.side, d.side)


def partial_trace(m, dims=None, subsystem: str = "B") -> np.ndarray:
    """Trace out ``subsystem`` and return the operator on the other factor."""
    m = as_matrix(m)
    d = _square_dims(m, dims)
    t = m.reshape(d.dim_a, d.dim_b, d.dim_a, d.dim_b)
    if subsystem.upper() == "B":
        return np.einsum("ikjk->ij", t)
    if subsystem.upper() == "A":
        return np.einsum("ikil->kl", t)
    raise ValueError("subsystem must be 'A' or 'B'")


def polar_unitary(x) -> np.ndarray:
    """Unitary factor ``V`` of the polar decomposition ``x = V H``.

    ``V`` is the unitary closest to ``x`` in Frobenius norm. Singular input
    (smallest singular value below ``RANK_TOL`` times the largest) raises
    :class:`RankDeficientError`.
    """
    x = as_matrix(x)
    if x.shape[0] != x.shape[1]:
        raise ValueError("polar decomposition needs a square matrix")
    try:
        w, s, vh = np.linalg.svd(x)
    except np.linalg.LinAlgError:
        # the divide-and-conquer driver occasionally fails on clustered spectra
        w, s, vh = scipy.linalg.svd(x, lapack_driver="gesvd")
    if s[-1] <= RANK_TOL * s[0]:
        raise RankDeficientError(s[-1], s[0])
    return w @ vh


def haar_sample(n: int, group: str = "unitary", seed=None) -> np.ndarray:
    """Draw one Haar-random matrix from U(n) or O(n).

    ``seed`` may be an integer or a ``numpy.random.Generator``; one generator
    should not be shared between threads.
    """
    rng = np.random.default_rng(seed)
    if n == 1:
        if group == "unitary":
            return np.exp(2j * np.pi * rng.random()).reshape(1, 1)
        return np.array([[rng.choice([-1.0, 1.0])]], dtype=complex)
    if group == "unitary":
        return np.asarray(unitary_group.rvs(n, random_state=rng), dtype=complex)
    if group == "orthogonal":
        return np.asarray(ortho_group.rvs(n, random_state=rng), dtype=complex)
    raise ValueError("group must be 'unitary' or 'orthogonal'")


def special_matrix(kind: str, n: int) -> np.ndarray:
    """Identity, swap, Fourier or van der Waerden matrix of side ``n``.

    The Fourier matrix is unnormalized, ``F_jk = exp(2 pi i jk / n)``, so that
    ``F F^dagger = n I``. The swap needs ``n`` to be a perfect square.
    """
    if kind == "identity":
        return np.eye(n, dtype=complex)
    if kind == "swap":
        d = int(round(np.sqrt(n)))
        if d * d != n:
            raise ValueError(f"swap needs a perfect-square side, got {n}")
        s = np.zeros((n, n), dtype=complex)
        for i in range(d):
            for j in range(d):
                s[j * d + i, i * d + j] = 1.0
        return s
    if kind == "fourier":
        k = np.arange(n)
        return np.exp(2j * np.pi * np.outer(k, k) / n)
    if kind == "van_der_waerden":
        return np.full((n, n), 1.0 / n, dtype=complex)
    raise ValueError(f"unknown special matrix kind {kind!r}")


def hs_distance_sq(a, b) -> float:
    """Squared Hilbert-Schmidt distance ``sum |a_ij - b_ij|^2``."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.sum(np.abs(a - b) ** 2))


def unitarity_residual(u) -> float:
    """Largest entry of ``|U^dagger U - I|``."""
    u = as_matrix(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1]))))


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and unitarity_residual(u) <= tol


def require_unitary(u, tol: float = UNITARY_TOL) -> np.ndarray:
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {u.shape}")
    r = unitarity_residual(u)
    if r > tol:
        raise ValueError(f"matrix is not unitary (residual {r:.3e} > {tol:.1e})")
    return u


def matrix_to_json(m) -> dict:
    """Serialize to ``{"rows", "cols", "data": [[re, im], ...]}`` row-major."""
    m = as_matrix(m)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in m.ravel()],
    }


def matrix_from_json(obj) -> np.ndarray:
    """Inverse of :func:`matrix_to_json`; accepts a dict or a JSON string."""
    if isinstance(obj, (str, bytes)):
        obj = json.loads(obj)
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from None
    if rows < 1 or cols < 1 or len(data) != rows * cols:
        raise ValueError(f"data length {len(data)} does not match {rows}x{cols}")
    arr = np.asarray(data, dtype=float)
    if arr.shape != (rows * cols, 2):
        raise ValueError("each entry must be a [re, im] pair")
    return as_matrix((arr[:, 0] + 1j * arr[:, 1]).reshape(rows, cols))


def load_matrix(path) -> np.ndarray:
    with open(path) as fh:
        return matrix_from_json(json.load(fh))


def save_matrix(path, m) -> None:
    with open(path, "w") as fh:
        json.dump(matrix_to_json(m), fh)


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out
