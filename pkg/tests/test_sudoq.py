import numpy as np
import pytest

from qdesign import sudoq
from qdesign.core import haar_sample, special_matrix


def test_classical_grid_is_valid_and_classical():
    for n in (2, 3):
        g = sudoq.classical_sudoq(n)
        rep = sudoq.verify_sudoq(g)
        assert rep.ok and rep.certified == 3 * n * n
        card = sudoq.cardinality(g)
        assert card.cardinality == n * n and card.kind == "classical"


def test_swapped_entries_are_reported():
    e = sudoq.classical_sudoq(2).entries.copy()
    e[0, 0], e[1, 0] = e[1, 0].copy(), e[0, 0].copy()
    rep = sudoq.verify_sudoq(sudoq.make_grid(e))
    assert not rep.ok
    assert {v.kind for v in rep.violations} >= {"row"}
    assert all(v.overlap == pytest.approx(1.0) for v in rep.violations)


def test_make_grid_checks_shape_and_norm():
    with pytest.raises(ValueError):
        sudoq.make_grid(np.ones((3, 3, 3)))
    with pytest.raises(ValueError):
        sudoq.make_grid(np.zeros((4, 4, 4)))
    with pytest.raises(ValueError):
        sudoq.make_grid(2 * sudoq.classical_sudoq(2).entries, normalize=False)


def test_cardinality_ignores_phases(rng):
    g = sudoq.displayed_design("sudoq_c6")
    phases = np.exp(2j * np.pi * rng.random(g.entries.shape[:2]))
    h = sudoq.make_grid(g.entries * phases[:, :, None])
    assert sudoq.verify_sudoq(h).ok
    assert sudoq.cardinality(h).cardinality == 6


def test_global_unitary_preserves_validity_and_cardinality():
    u = haar_sample(4, "unitary", 5)
    for name in sudoq.DISPLAYED_DESIGNS:
        g = sudoq.displayed_design(name)
        h = sudoq.transform_grid(g, u)
        assert sudoq.verify_sudoq(h).ok
        assert sudoq.cardinality(h).cardinality == sudoq.cardinality(g).cardinality


def test_displayed_designs():
    want = {"sudoq_classical": (4, "classical"), "sudoq_rotated": (4, "apparently_quantum"),
            "sudoq_c6": (6, "genuinely_quantum"), "sudoq_c16": (16, "genuinely_quantum")}
    for name, (c, kind) in want.items():
        rep = sudoq.cardinality(sudoq.displayed_design(name))
        assert (rep.cardinality, rep.kind) == (c, kind)
    with pytest.raises(KeyError):
        sudoq.displayed_design("nope")


def test_json_round_trip(tmp_path):
    g = sudoq.displayed_design("sudoq_c16")
    again = sudoq.grid_from_json(sudoq.grid_to_json(g))
    assert again.n == 2 and np.allclose(again.entries, g.entries, atol=1e-15)
    path = tmp_path / "grid.json"
    sudoq.save_grid(path, g)
    assert np.allclose(sudoq.load_grid(path).entries, g.entries, atol=1e-15)
    with pytest.raises(ValueError):
        sudoq.grid_from_json({"n": 3, "entries": sudoq.grid_to_json(g)["entries"]})


def test_grid_from_kets():
    rows = [[{"0": 1.0} if (r + c) % 4 == 0 else {str((r // 2 + 2 * (r % 2) + c) % 4): 1.0}
             for c in range(4)] for r in range(4)]
    g = sudoq.grid_from_kets(rows, 2)
    assert g.entries.shape == (4, 4, 4)
    assert np.allclose(np.linalg.norm(g.entries, axis=2), 1)


def test_weyl_heisenberg_bases_are_mutually_unbiased():
    for n in (2, 3, 5):
        bases = sudoq.weyl_heisenberg_mubs(n)
        assert len(bases) == n + 1
        for a in range(n + 1):
            assert np.allclose(bases[a] @ bases[a].conj().T, np.eye(n), atol=1e-12)
            for b in range(a + 1, n + 1):
                assert np.allclose(np.abs(bases[a] @ bases[b].conj().T) ** 2, 1 / n, atol=1e-12)
    with pytest.raises(ValueError):
        sudoq.weyl_heisenberg_mubs(4)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_weyl_heisenberg_eigenvectors(n):
    x, z = sudoq.weyl_heisenberg_operators(n)
    w = np.exp(2j * np.pi / n)
    bases = sudoq.weyl_heisenberg_mubs(n)
    for k in range(n):
        op = x @ np.linalg.matrix_power(z, k)
        shift = 1 if n % 2 else 1j**k
        for m in range(n):
            v = bases[k + 1][m]
            assert np.allclose(op @ v, shift * w**m * v, atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_weyl_heisenberg_grid(n):
    g = sudoq.construct_wh_sudoq(n)
    assert sudoq.verify_sudoq(g).ok
    assert sudoq.cardinality(g).cardinality == n**4


@pytest.mark.parametrize("n", [2, 3])
def test_family_construction_is_valid(n):
    us = [haar_sample(n, "unitary", 10 + i) for i in range(n)]
    vs = [haar_sample(n, "unitary", 20 + i) for i in range(n)]
    g = sudoq.construct_from_families(us, vs)
    assert sudoq.verify_sudoq(g).ok
    assert sudoq.cardinality(g).cardinality == sudoq.family_cardinality(us) * sudoq.family_cardinality(vs)


def test_family_construction_with_two_distinct_bases():
    n = 3
    f = special_matrix("fourier", n) / np.sqrt(n)
    us = [np.eye(n), f, np.eye(n)]
    vs = [np.eye(n)] * n
    rep = sudoq.cardinality(sudoq.construct_from_families(us, vs))
    assert rep.cardinality == 2 * n * n and rep.kind == "genuinely_quantum"


def test_family_construction_rejects_bad_families():
    with pytest.raises(ValueError):
        sudoq.construct_from_families([np.eye(2)] * 2, [np.eye(2)])
    with pytest.raises(ValueError):
        sudoq.construct_from_families([np.eye(3)] * 2, [np.eye(3)] * 2)


def test_random_classification_is_reproducible():
    a = sudoq.classify_random_4x4(40, seed=3)
    b = sudoq.classify_random_4x4(40, seed=3)
    assert a == b and sum(a.values()) == 40
    assert set(a) <= {4, 6, 8, 16}
    haar = sudoq.classify_random_4x4(10, seed=1, generator="haar")
    assert set(haar) == {16}
    with pytest.raises(ValueError):
        sudoq.classify_random_4x4(1, generator="other")
