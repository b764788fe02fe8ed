import json

import numpy as np
import pytest

from qdesign import core


def test_reshuffle_turns_blocks_into_rows():
    m = np.arange(16).reshape(4, 4)
    r = core.reshuffle(m, 2)
    # block (0, 1) of m is [[2, 3], [6, 7]] and becomes row 1
    assert np.array_equal(r[1], [2, 3, 6, 7])
    assert np.array_equal(r[0], [0, 1, 4, 5])


def test_reshuffle_and_transposes_are_involutions(rng):
    for n in (2, 3, 4):
        m = rng.normal(size=(n * n, n * n)) + 1j * rng.normal(size=(n * n, n * n))
        assert np.array_equal(core.reshuffle(core.reshuffle(m, n), n), m)
        for s in ("A", "B"):
            assert np.array_equal(core.partial_transpose(core.partial_transpose(m, n, s), n, s), m)


def test_partial_transposes_compose_to_full_transpose(rng):
    m = rng.normal(size=(6, 6))
    both = core.partial_transpose(core.partial_transpose(m, (2, 3), "A"), (2, 3), "B")
    assert np.array_equal(both, m.T)


def test_partial_transpose_of_swap():
    s = core.special_matrix("swap", 9)
    # the partial transpose of the swap is n times the projector on the maximally entangled state
    phi = np.eye(3).ravel() / np.sqrt(3)
    assert np.allclose(core.partial_transpose(s, 3), 3 * np.outer(phi, phi))


def test_partial_trace_of_product(rng):
    a = rng.normal(size=(2, 2))
    b = rng.normal(size=(3, 3))
    m = np.kron(a, b)
    assert np.allclose(core.partial_trace(m, (2, 3), "B"), a * np.trace(b))
    assert np.allclose(core.partial_trace(m, (2, 3), "A"), b * np.trace(a))


def test_dims_mismatch_raises():
    with pytest.raises(ValueError):
        core.reshuffle(np.eye(5))
    with pytest.raises(ValueError):
        core.partial_transpose(np.eye(6), (2, 2))


def test_polar_unitary_is_closest_unitary(rng):
    x = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    v = core.polar_unitary(x)
    assert core.is_unitary(v)
    for s in range(20):
        w = core.haar_sample(5, "unitary", s)
        assert core.hs_distance_sq(x, v) <= core.hs_distance_sq(x, w) + 1e-12


def test_polar_unitary_rank_deficient():
    x = np.diag([1.0, 1.0, 0.0])
    with pytest.raises(core.RankDeficientError) as info:
        core.polar_unitary(x)
    assert info.value.sigma_min == 0.0


def test_haar_sample_reproducible_and_unitary():
    a = core.haar_sample(6, "unitary", 3)
    b = core.haar_sample(6, "unitary", 3)
    assert np.array_equal(a, b)
    assert core.is_unitary(a)
    o = core.haar_sample(6, "orthogonal", 3)
    assert core.is_unitary(o) and np.allclose(o.imag, 0)
    with pytest.raises(ValueError):
        core.haar_sample(3, "symplectic", 0)


def test_special_matrices():
    f = core.special_matrix("fourier", 4)
    assert np.allclose(f @ f.conj().T, 4 * np.eye(4))
    assert np.allclose(core.special_matrix("van_der_waerden", 4).sum(axis=0), 1)
    s = core.special_matrix("swap", 4)
    assert np.array_equal(s @ s, np.eye(4))
    with pytest.raises(ValueError):
        core.special_matrix("swap", 5)


def test_require_unitary():
    with pytest.raises(ValueError):
        core.require_unitary(2 * np.eye(2))
    with pytest.raises(ValueError):
        core.require_unitary(np.ones((2, 3)))


def test_matrix_json_round_trip_is_bitwise(tmp_path, rng):
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    again = core.matrix_from_json(json.dumps(core.matrix_to_json(m)))
    assert np.array_equal(again, m)
    path = tmp_path / "m.json"
    core.save_matrix(path, m)
    assert np.array_equal(core.load_matrix(path), m)


@pytest.mark.parametrize(
    "payload",
    [
        {"rows": 2, "cols": 2, "data": [[1, 0]]},
        {"rows": 2, "cols": 2},
        {"rows": 1, "cols": 1, "data": [[1, 0, 0]]},
        {"rows": 1, "cols": 1, "data": [["nan", 0]]},
    ],
)
def test_matrix_json_rejects_malformed(payload):
    with pytest.raises(ValueError):
        core.matrix_from_json(payload)


def test_kron_all():
    a, b = np.eye(2), np.array([[0, 1], [1, 0]])
    assert np.array_equal(core.kron_all([a, b]), np.kron(a, b))
