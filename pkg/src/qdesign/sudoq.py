"""Quantum Sudoku (SudoQ) designs and their cardinality.

A SudoQ of block size ``n`` is an ``n^2 x n^2`` grid of unit vectors in
``C^{n^2}`` in which every row, every column and every ``n x n`` block is an
orthonormal basis. Grids are stored as arrays of shape ``(n^2, n^2, n^2)``:
row, column, amplitude. Computational basis labels are 1-based in JSON and
docstrings (``|1>, ..., |n^2>``) and 0-based in array indices.
"""
from __future__ import annotations

import json
from collections import Counter
from typing import NamedTuple, Sequence

import numpy as np

from .core import haar_sample, require_unitary, special_matrix

GRID_TOL = 1e-10
DISTINCT_TOL = 1e-8


class SudoQGrid(NamedTuple):
    n: int
    entries: np.ndarray  # (n^2, n^2, n^2) complex


class SudoQViolation(NamedTuple):
    kind: str  # "row" | "column" | "block" | "norm"
    index: int
    cells: tuple[tuple[int, int], tuple[int, int]]
    overlap: float


class SudoQReport(NamedTuple):
    ok: bool
    violations: list
    certified: int  # number of rows, columns and blocks that are bases


class CardinalityReport(NamedTuple):
    cardinality: int
    kind: str  # classical | apparently_quantum | genuinely_quantum
    representatives: list  # one (row, col) cell per distinct vector

    def to_json(self) -> dict:
        return {
            "cardinality": self.cardinality,
            "class": self.kind,
            "representatives": [list(c) for c in self.representatives],
        }


# --------------------------------------------------------------------------
# grids


def make_grid(entries, n: int | None = None, normalize: bool = True) -> SudoQGrid:
    """Wrap an ``(N, N, N)`` array, ``N = n^2``, optionally normalizing each entry."""
    e = np.array(entries, dtype=complex)
    if e.ndim != 3 or e.shape[0] != e.shape[1] or e.shape[1] != e.shape[2]:
        raise ValueError(f"grid entries must have shape (N, N, N), got {e.shape}")
    side = e.shape[0]
    if n is None:
        n = int(round(np.sqrt(side)))
    if n * n != side:
        raise ValueError(f"grid side {side} is not the square of the block size {n}")
    norms = np.linalg.norm(e, axis=2)
    if np.any(norms == 0):
        raise ValueError("grid contains a zero vector")
    if normalize:
        e = e / norms[:, :, None]
    elif np.max(np.abs(norms - 1)) > GRID_TOL:
        raise ValueError("grid entries are not unit vectors")
    return SudoQGrid(int(n), e)


def grid_sets(n: int):
    """Rows, columns and blocks as ``(kind, index, list of cells)``."""
    side = n * n
    for r in range(side):
        yield "row", r, [(r, c) for c in range(side)]
    for c in range(side):
        yield "column", c, [(r, c) for r in range(side)]
    for b in range(side):
        br, bc = divmod(b, n)
        yield "block", b, [(br * n + i, bc * n + j) for i in range(n) for j in range(n)]


def verify_sudoq(g: SudoQGrid, tol: float = GRID_TOL) -> SudoQReport:
    """Check that every row, column and block is an orthonormal basis.

    Each violation names the set and the pair of cells whose overlap
    ``|<u|v>|`` exceeds ``tol``; the diagonal of a Gram matrix is checked
    against 1 and reported with ``kind = "norm"``.
    """
    e = g.entries
    violations = []
    certified = 0
    for kind, idx, cells in grid_sets(g.n):
        vecs = np.array([e[r, c] for r, c in cells])
        gram = vecs.conj() @ vecs.T
        bad = False
        for a in range(len(cells)):
            if abs(gram[a, a] - 1.0) > tol:
                violations.append(SudoQViolation("norm", idx, (cells[a], cells[a]), float(abs(gram[a, a]))))
                bad = True
            for b in range(a + 1, len(cells)):
                if abs(gram[a, b]) > tol:
                    violations.append(SudoQViolation(kind, idx, (cells[a], cells[b]), float(abs(gram[a, b]))))
                    bad = True
        certified += not bad
    return SudoQReport(not violations, violations, certified)


def _distinct(vectors: np.ndarray, tol: float):
    """Group unit vectors equal up to a global phase; returns representative indices."""
    reps: list[int] = []
    rep_vecs = np.zeros((0, vectors.shape[1]), dtype=complex)
    for idx, v in enumerate(vectors):
        if rep_vecs.shape[0] and np.max(np.abs(rep_vecs.conj() @ v)) > 1.0 - tol:
            continue
        reps.append(idx)
        rep_vecs = np.vstack([rep_vecs, v])
    return reps


def count_distinct(vectors, tol: float = DISTINCT_TOL) -> int:
    """Number of distinct unit vectors up to phase (``|<u|v>| > 1 - tol`` means equal)."""
    v = np.asarray(vectors, dtype=complex)
    v = v / np.linalg.norm(v, axis=1, keepdims=True)
    return len(_distinct(v, tol))


def cardinality(g: SudoQGrid, tol: float = DISTINCT_TOL) -> CardinalityReport:
    """Number of distinct entries up to global phase and the quantumness class."""
    side = g.n * g.n
    flat = g.entries.reshape(side * side, side)
    reps = _distinct(flat, tol)
    c = len(reps)
    mags = np.abs(flat)
    classical = bool(np.all(np.sum(mags > tol, axis=1) == 1))
    if c > side:
        kind = "genuinely_quantum"
    elif classical:
        kind = "classical"
    else:
        kind = "apparently_quantum"
    return CardinalityReport(c, kind, [divmod(i, side) for i in reps])


def transform_grid(g: SudoQGrid, u) -> SudoQGrid:
    """Apply one unitary to every entry; validity and cardinality are preserved."""
    u = require_unitary(u, 1e-9)
    return SudoQGrid(g.n, np.einsum("ab,rcb->rca", u, g.entries))


def grid_to_json(g: SudoQGrid) -> dict:
    return {
        "n": g.n,
        "entries": [
            [[[float(z.real), float(z.imag)] for z in cell] for cell in row] for row in g.entries
        ],
    }


def grid_from_json(obj) -> SudoQGrid:
    """Load ``{"n": n, "entries": [[[[re, im], ...], ...], ...]}``; amplitudes are normalized."""
    if isinstance(obj, (str, bytes)):
        obj = json.loads(obj)
    try:
        n = int(obj["n"])
        arr = np.asarray(obj["entries"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed grid JSON: {exc}") from None
    side = n * n
    if arr.shape != (side, side, side, 2):
        raise ValueError(f"grid JSON of shape {arr.shape} does not match n = {n}")
    return make_grid(arr[..., 0] + 1j * arr[..., 1], n)


def load_grid(path) -> SudoQGrid:
    with open(path) as fh:
        return grid_from_json(json.load(fh))


def save_grid(path, g: SudoQGrid) -> None:
    with open(path, "w") as fh:
        json.dump(grid_to_json(g), fh)


def grid_from_kets(rows: Sequence[Sequence[dict]], n: int) -> SudoQGrid:
    """Build a grid from cells written as ``{label: amplitude}`` with 1-based labels."""
    side = n * n
    e = np.zeros((side, side, side), dtype=complex)
    for r, row in enumerate(rows):
        for c, cell in enumerate(row):
            for label, amp in cell.items():
                e[r, c, int(label) - 1] = amp
    return make_grid(e, n)


# --------------------------------------------------------------------------
# constructions


def construct_from_families(us: Sequence, vs: Sequence) -> SudoQGrid:
    """Grid with cell ``(i n + k, j n + l)`` equal to ``u^(i)_{j+k} (x) w^(j)_{i+l}``.

    ``u^(i)_m`` is row ``m`` of ``us[i]`` and ``w^(j)_m`` row ``m`` of
    ``vs[j]``, indices mod ``n``. Block ``(i, j)`` runs over ``k, l``.
    """
    n = len(us)
    if n < 1 or len(vs) != n:
        raise ValueError("need two families of n unitaries each")
    us = [require_unitary(u) for u in us]
    vs = [require_unitary(v) for v in vs]
    if any(u.shape != (n, n) for u in us + vs):
        raise ValueError(f"family members must be {n}x{n}")
    side = n * n
    e = np.zeros((side, side, side), dtype=complex)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    e[i * n + k, j * n + l] = np.kron(us[i][(j + k) % n], vs[j][(i + l) % n])
    return SudoQGrid(n, e)


def family_cardinality(family: Sequence, tol: float = DISTINCT_TOL) -> int:
    """Distinct rows, up to phase, across all members of a unitary family."""
    return count_distinct(np.vstack([np.asarray(u) for u in family]), tol)


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % p for p in range(2, int(n**0.5) + 1))


def weyl_heisenberg_mubs(n: int) -> list[np.ndarray]:
    """Eigenbases of ``Z, X, XZ, ..., XZ^{n-1}`` for prime ``n``.

    ``X = sum_j |j><j+1|`` and ``Z = sum_j w^j |j><j|`` with ``w = e^{2 pi i/n}``
    and 1-based ``j``. Basis ``t`` is returned as an ``n x n`` array whose row
    ``m`` is the eigenvector with eigenvalue ``w^m`` (``m`` 0-based) and first
    amplitude ``1/sqrt(n)``; the ``Z`` basis is the computational one. For
    ``n = 2`` the spectrum of ``X Z^k`` is ``i^k w^m`` and the labels follow it.
    """
    if not _is_prime(n):
        raise ValueError(f"Weyl-Heisenberg bases need a prime dimension, got {n}")
    w = np.exp(2j * np.pi / n)
    bases = [np.eye(n, dtype=complex)]
    labels = np.arange(1, n + 1)
    for k in range(n):
        basis = np.zeros((n, n), dtype=complex)
        shift = 1.0 if n % 2 else np.exp(1j * np.pi * k / n)
        for m in range(n):
            a = np.ones(n, dtype=complex)
            for j in range(1, n):  # a_{j+1} = lambda w^{-k (j+1)} a_j, 1-based j
                a[j] = shift * w**m * w ** (-k * labels[j]) * a[j - 1]
            basis[m] = a / np.sqrt(n)
        bases.append(basis)
    return bases


def weyl_heisenberg_operators(n: int):
    """``(X, Z)`` generalized Pauli matrices with the conventions above."""
    w = np.exp(2j * np.pi / n)
    x = np.roll(np.eye(n, dtype=complex), 1, axis=1)  # |j><j+1|
    z = np.diag(w ** np.arange(1, n + 1))
    return x, z


def construct_wh_sudoq(n: int) -> SudoQGrid:
    """Family construction with both families equal to the first ``n``
    Weyl-Heisenberg bases; every entry is a product of two MUB vectors and
    the cardinality is ``n^4``."""
    fam = weyl_heisenberg_mubs(n)[:n]
    return construct_from_families(fam, fam)


def classical_sudoq(n: int) -> SudoQGrid:
    """Quantized Sudoku from identity families: cell ``(i n + k, j n + l)`` is
    ``|j+k> (x) |i+l>``, so every entry is a computational basis vector and
    the cardinality is ``n^2``.
    """
    eye = [np.eye(n, dtype=complex)] * n
    return construct_from_families(eye, eye)


# --------------------------------------------------------------------------
# random 4x4 designs


def _sudoku_symmetry(rng, n: int):
    """Random row and column permutation preserving bands, stacks and blocks."""
    def perm():
        bands = rng.permutation(n)
        return np.concatenate([b * n + rng.permutation(n) for b in bands])

    return perm(), perm()


def _intercalates(symbols: np.ndarray, n: int):
    """Pairs of rows and columns whose four cells hold two symbols crosswise and
    pair up inside blocks, so that rotating the two symbols there keeps every
    row, column and block a basis."""
    side = n * n
    out = []
    for r1 in range(side):
        for r2 in range(r1 + 1, side):
            for c1 in range(side):
                for c2 in range(c1 + 1, side):
                    a, b = symbols[r1, c1], symbols[r1, c2]
                    if symbols[r2, c1] != b or symbols[r2, c2] != a:
                        continue
                    same_band = r1 // n == r2 // n
                    same_stack = c1 // n == c2 // n
                    if same_band or same_stack:
                        out.append(((r1, r2), (c1, c2), (a, b)))
    return out


def _random_rotation(rng) -> np.ndarray:
    return haar_sample(2, "unitary", rng)


def random_sudoq_4x4(rng) -> SudoQGrid:
    """One valid 4x4 SudoQ from a mixture of generators.

    Either the family construction with members drawn from a small pool (so
    rows repeat with positive probability), or a quantized classical grid
    with 0-2 rotated intercalates. Both are then relabelled by a Sudoku
    symmetry and a global Haar unitary.
    """
    n = 2
    if rng.random() < 0.5:
        pool = [np.eye(2, dtype=complex), special_matrix("fourier", 2) / np.sqrt(2)]
        pool.append(haar_sample(2, "unitary", rng))

        def member():
            if rng.random() < 0.5:
                return pool[rng.integers(len(pool))]
            return haar_sample(2, "unitary", rng)

        g = construct_from_families([member(), member()], [member(), member()])
    else:
        g = classical_sudoq(n)
        symbols = np.argmax(np.abs(g.entries), axis=2)
        e = g.entries.copy()
        choices = _intercalates(symbols, n)
        used: set = set()
        for _ in range(rng.integers(0, 3)):
            if not choices:
                break
            (r1, r2), (c1, c2), (a, b) = choices[rng.integers(len(choices))]
            cells = {(r1, c1), (r1, c2), (r2, c1), (r2, c2)}
            if cells & used:
                continue
            used |= cells
            rot = _random_rotation(rng)
            for r, c in cells:
                v = e[r, c]
                sub = np.array([v[a], v[b]])
                v = v.copy()
                v[a], v[b] = rot @ sub
                e[r, c] = v
        g = SudoQGrid(n, e)
    rows, cols = _sudoku_symmetry(rng, n)
    g = SudoQGrid(n, g.entries[np.ix_(rows, cols)])
    return transform_grid(g, haar_sample(4, "unitary", rng))


GENERATORS = ("mixed", "identity", "haar")


def classify_random_4x4(samples: int, seed=None, generator: str = "mixed", check: bool = True) -> Counter:
    """Histogram of cardinalities over randomly generated valid 4x4 designs.

    ``generator`` is ``mixed`` (see :func:`random_sudoq_4x4`), ``identity``
    (identity families) or ``haar`` (Haar-random families); the last two are
    also relabelled by a global Haar unitary.
    """
    if generator not in GENERATORS:
        raise ValueError(f"unknown generator {generator!r}")
    rng = np.random.default_rng(seed)
    hist: Counter = Counter()
    for _ in range(samples):
        if generator == "mixed":
            g = random_sudoq_4x4(rng)
        else:
            if generator == "identity":
                fam = [[np.eye(2, dtype=complex)] * 2 for _ in range(2)]
            else:
                fam = [[haar_sample(2, "unitary", rng) for _ in range(2)] for _ in range(2)]
            g = transform_grid(construct_from_families(*fam), haar_sample(4, "unitary", rng))
        if check and not verify_sudoq(g, 1e-9).ok:
            raise RuntimeError("generator produced an invalid grid")
        hist[cardinality(g).cardinality] += 1
    return hist


# --------------------------------------------------------------------------
# displayed 4x4 designs


def _k(*terms):
    """Cell from signed 1-based labels, e.g. ``_k(3, -4)`` is ``|3> - |4>``."""
    return {abs(t): (1.0 if t > 0 else -1.0) for t in terms}


DESIGN_CLASSICAL = [
    [_k(1), _k(2), _k(3), _k(4)],
    [_k(3), _k(4), _k(1), _k(2)],
    [_k(4), _k(1), _k(2), _k(3)],
    [_k(2), _k(3), _k(4), _k(1)],
]
DESIGN_ROTATED = [
    [_k(1), _k(2), _k(3, 4), _k(3, -4)],
    [_k(3, 4), _k(3, -4), _k(1), _k(2)],
    [_k(3, -4), _k(1), _k(2), _k(3, 4)],
    [_k(2), _k(3, 4), _k(3, -4), _k(1)],
]
DESIGN_C6 = [
    [_k(1), _k(2), _k(3), _k(4)],
    [_k(3), _k(4), _k(1), _k(2)],
    [_k(2, -4), _k(1), _k(2, 4), _k(3)],
    [_k(2, 4), _k(3), _k(2, -4), _k(1)],
]
DESIGN_C16 = [
    [_k(1), _k(2), _k(3, 4), _k(3, -4)],
    [_k(3), _k(4), _k(1, -2), _k(1, 2)],
    [_k(2, 4), _k(1, -3), _k(1, 2, 3, -4), _k(1, -2, 3, 4)],
    [_k(2, -4), _k(1, 3), _k(1, 2, -3, 4), _k(1, -2, -3, -4)],
]
DISPLAYED_DESIGNS = {
    "sudoq_classical": DESIGN_CLASSICAL,
    "sudoq_rotated": DESIGN_ROTATED,
    "sudoq_c6": DESIGN_C6,
    "sudoq_c16": DESIGN_C16,
}


def displayed_design(name: str) -> SudoQGrid:
    """One of the four displayed 4x4 designs, normalized."""
    return grid_from_kets(DISPLAYED_DESIGNS[name], 2)
