"""Entanglement functionals of bipartite gates and their derivatives.

All gates act on ``C^n (x) C^n`` and are ``n^2 x n^2`` matrices. Derivatives
are taken along right multiplication ``U -> U exp(i sum_j eps_j H_j)`` with
the Hermitian basis returned by :func:`hermitian_basis`.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .core import (
    as_matrix,
    partial_transpose,
    require_unitary,
    reshuffle,
    special_matrix,
)

ZERO_EIG_REL = 1e-6


class GateFunctionalValue(NamedTuple):
    e_p: float
    g_t: float
    s_e: float


class DerivativeBundle(NamedTuple):
    gradient: np.ndarray
    hessian: np.ndarray | None = None


def _side_to_n(u: np.ndarray, n: int | None) -> int:
    side = u.shape[0]
    if n is None:
        n = int(round(np.sqrt(side)))
    if u.shape != (n * n, n * n):
        raise ValueError(f"matrix of shape {u.shape} is not of side n^2 = {n * n}")
    return n


def _gamma(m: np.ndarray, n: int) -> np.ndarray:
    return partial_transpose(m, (n, n), "B")


def _quartic(a: np.ndarray) -> float:
    """``Tr((A A^dagger)^2)``, i.e. the sum of fourth powers of singular values."""
    h = a @ a.conj().T
    return float(np.real(np.vdot(h, h)))


# --------------------------------------------------------------------------
# states


def generalized_concurrence(psi, dims) -> float:
    """``2 (1 - Tr rho_A^2)`` of a normalized bipartite pure state."""
    psi = np.asarray(psi, dtype=complex).ravel()
    da, db = (dims, dims) if isinstance(dims, (int, np.integer)) else dims
    if psi.size != da * db:
        raise ValueError(f"state length {psi.size} does not match dims {da}x{db}")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise ValueError("state is not normalized")
    c = psi.reshape(da, db)
    rho = c @ c.conj().T
    return float(2.0 * (1.0 - np.real(np.vdot(rho, rho))))


# --------------------------------------------------------------------------
# gate functionals


def choi_linear_entropy(u, n: int | None = None) -> float:
    """Linear entropy of the Choi state of ``u`` across (A-out, A-in)|(B-out, B-in).

    Equals ``1 - Tr((U^R U^R+)^2) / n^4``; zero for local gates and
    ``1 - 1/n^2`` for the swap.
    """
    u = as_matrix(u)
    n = _side_to_n(u, n)
    return 1.0 - _quartic(reshuffle(u, n)) / n**4


def entangling_power(u, n: int | None = None) -> float:
    """Entangling power from the reshuffled and partially transposed gate."""
    u = require_unitary(u)
    n = _side_to_n(u, n)
    N = n * n
    qr = _quartic(reshuffle(u, n))
    qg = _quartic(_gamma(u, n))
    return N / (N - 1) * ((N + 1) / N - qr / N**2 - qg / N**2)


def entangling_power_choi(u, n: int | None = None) -> float:
    """Entangling power written through Choi linear entropies of U, US and S."""
    u = require_unitary(u)
    n = _side_to_n(u, n)
    s = special_matrix("swap", n * n)
    e_s = 1.0 - 1.0 / n**2
    return (choi_linear_entropy(u, n) + choi_linear_entropy(u @ s, n) - e_s) / e_s


def gate_typicality(u, n: int | None = None) -> float:
    """``[E(U) - E(US) + E(S)] / (2 E(S))``; 0 for the identity, 1 for the swap."""
    u = require_unitary(u)
    n = _side_to_n(u, n)
    s = special_matrix("swap", n * n)
    e_s = 1.0 - 1.0 / n**2
    return (choi_linear_entropy(u, n) - choi_linear_entropy(u @ s, n) + e_s) / (2 * e_s)


def singular_entropy(x) -> float:
    """Normalized linear entropy of the squared singular values of ``x``.

    ``N/(N-1) (1 - Tr(XX+XX+) / Tr(XX+)^2)``, equal to 1 exactly when ``x`` is
    a multiple of a unitary and 0 for rank one.
    """
    x = as_matrix(x)
    N = x.shape[0]
    h = x @ x.conj().T
    tr = float(np.real(np.trace(h)))
    if tr == 0.0:
        raise ValueError("singular entropy of the zero matrix is undefined")
    return N / (N - 1) * (1.0 - float(np.real(np.vdot(h, h))) / tr**2)


def avg_singular_entropy(x, n: int | None = None) -> float:
    """Mean singular entropy of ``x``, ``x^R`` and ``x^Gamma``."""
    x = as_matrix(x)
    n = _side_to_n(x, n)
    return (
        singular_entropy(x) + singular_entropy(reshuffle(x, n)) + singular_entropy(_gamma(x, n))
    ) / 3.0


def gate_functionals(u, n: int | None = None) -> GateFunctionalValue:
    """``(e_p, g_t, s_e)`` clipped to [0, 1] for reporting."""
    clip = lambda v: float(min(1.0, max(0.0, v)))  # noqa: E731
    return GateFunctionalValue(
        clip(entangling_power(u, n)), clip(gate_typicality(u, n)), clip(avg_singular_entropy(u, n))
    )


# --------------------------------------------------------------------------
# derivatives


def hermitian_basis(side: int) -> np.ndarray:
    """Basis of ``side x side`` Hermitian matrices as an array ``(side^2, side, side)``.

    Order: the diagonal units ``|i><i|``, then ``|k><l| + |l><k|`` for
    ``k < l``, then ``i(|k><l| - |l><k|)`` for ``k < l``. The elements are
    pairwise Hilbert-Schmidt orthogonal.
    """
    out = np.zeros((side * side, side, side), dtype=complex)
    idx = 0
    for i in range(side):
        out[idx, i, i] = 1.0
        idx += 1
    pairs = [(k, l) for k in range(side) for l in range(k + 1, side)]
    for k, l in pairs:
        out[idx, k, l] = out[idx, l, k] = 1.0
        idx += 1
    for k, l in pairs:
        out[idx, k, l] = 1j
        out[idx, l, k] = -1j
        idx += 1
    return out


def _trace_with_basis(k: np.ndarray) -> np.ndarray:
    """``Tr(H_i K)`` for every basis element, without building the basis."""
    side = k.shape[0]
    iu, ju = np.triu_indices(side, 1)
    diag = np.diag(k)
    plus = k[ju, iu] + k[iu, ju]
    minus = 1j * (k[ju, iu] - k[iu, ju])
    return np.concatenate([diag, plus, minus])


def _rearrangements(n: int):
    return (lambda m: reshuffle(m, n), lambda m: _gamma(m, n))


def ep_gradient(u, n: int | None = None) -> np.ndarray:
    """Gradient of the entangling power in the Hermitian-basis coordinates.

    Component ``i`` is ``4/(n^2(n^2-1)) Im sum_T Tr(T(U H_i) T(U)^+ T(U) T(U)^+)``
    with ``T`` running over reshuffling and partial transposition.
    """
    u = require_unitary(u)
    n = _side_to_n(u, n)
    N = n * n
    k = np.zeros_like(u)
    for t in _rearrangements(n):
        a = t(u)
        q = a @ a.conj().T @ a
        k += t(q).conj().T @ u
    return 4.0 / (N * (N - 1)) * np.imag(_trace_with_basis(k))


def ep_hessian(u, n: int | None = None, basis: np.ndarray | None = None) -> np.ndarray:
    """Hessian of ``eps -> e_p(U exp(i sum eps_j H_j))`` at ``eps = 0``.

    Returned symmetrized, of shape ``(n^4, n^4)``. Cost is dominated by three
    dense products of size ``n^4``; about a minute at ``n = 6``.
    """
    u = require_unitary(u)
    n = _side_to_n(u, n)
    N = n * n
    hs = hermitian_basis(N) if basis is None else basis
    m = hs.shape[0]
    uh = np.matmul(u, hs)  # U H_k
    hflat = hs.reshape(m, -1)
    total = np.zeros((m, m))
    for axes, t in zip(((0, 2, 1, 3), (0, 3, 2, 1)), _rearrangements(n)):
        a = t(u)
        ad = a.conj().T
        mm = a @ ad
        q = mm @ a
        kk = t(q).conj().T @ u
        g = uh.reshape(m, n, n, n, n).transpose(0, *(ax + 1 for ax in axes)).reshape(m, N, N)
        ga = np.matmul(g, ad)
        z = 1j * (ga - ga.conj().transpose(0, 2, 1))
        zflat = z.reshape(m, -1)
        c = np.real(zflat @ zflat.conj().T)  # Tr(Z_k Z_l), Z Hermitian
        mg = np.matmul(mm, g).reshape(m, -1)
        c += 2.0 * np.real(mg @ g.reshape(m, -1).conj().T)
        hk = np.matmul(hs, kk).transpose(0, 2, 1).reshape(m, -1)
        c -= 2.0 * np.real(hflat @ hk.T)
        total += c + c.T
    return -total / (N * (N - 1))


def hessian_spectrum(h: np.ndarray, zero_rel: float = ZERO_EIG_REL) -> dict:
    """Eigenvalues of a symmetric Hessian and their sign counts."""
    w = np.linalg.eigvalsh(0.5 * (h + h.T))
    thr = zero_rel * float(np.max(np.abs(w))) if w.size else 0.0
    return {
        "eigenvalues": w,
        "positive": int(np.sum(w > thr)),
        "zero": int(np.sum(np.abs(w) <= thr)),
        "negative": int(np.sum(w < -thr)),
        "threshold": thr,
    }


def se_gradient(x, n: int | None = None) -> np.ndarray:
    """Gradient of the average singular entropy over the real basis of matrices.

    The first ``n^4`` components are along ``|k><l|`` (row-major in ``k, l``),
    the last ``n^4`` along ``i|k><l|``.
    """
    x = as_matrix(x)
    n = _side_to_n(x, n)
    N = n * n
    coeff = np.zeros((N, N), dtype=complex)
    for t in _rearrangements(n):
        xt = t(x)
        h = xt @ xt.conj().T
        s = float(np.real(np.trace(h)))
        if s == 0.0:
            raise ValueError("average singular entropy of the zero matrix is undefined")
        xi = float(np.real(np.vdot(h, h))) / s
        y = xt.conj().T @ (xi * np.eye(N) - h) / s**2
        coeff += t(y.T)
    h = x @ x.conj().T
    s = float(np.real(np.trace(h)))
    xi = float(np.real(np.vdot(h, h))) / s
    coeff += (x.conj().T @ (xi * np.eye(N) - h) / s**2).T
    pref = 4.0 * N / (N - 1) / 3.0
    return pref * np.concatenate([np.real(coeff).ravel(), -np.imag(coeff).ravel()])
