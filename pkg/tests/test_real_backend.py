import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

import oracles
from dualqr.real_backend import (
    SketchConfig,
    diagonal_rank,
    gaussian_sketch,
    pinv,
    qr_real,
    rqrcp,
    sylvester_general,
)

FLAGS = [(p, t) for p in (False, True) for t in (False, True)]


def penrose_defects(a, g):
    return (
        np.linalg.norm(a @ g @ a - a),
        np.linalg.norm(g @ a @ g - g),
        np.linalg.norm((a @ g).T - a @ g),
        np.linalg.norm((g @ a).T - g @ a),
    )


# qr_real


@pytest.mark.parametrize("pivot,thin", FLAGS)
def test_qr_identity(pivot, thin):
    f = qr_real(np.eye(3), pivot=pivot, thin=thin)
    assert_allclose(f.q, np.eye(3), atol=0)
    assert_allclose(f.r, np.eye(3), atol=0)
    assert_array_equal(f.perm, [0, 1, 2])
    assert f.rank == 3


@pytest.mark.parametrize("pivot,thin", FLAGS)
def test_qr_seeded_6x4(pivot, thin, rng):
    a = rng.standard_normal((6, 4))
    f = qr_real(a, pivot=pivot, thin=thin)
    assert np.linalg.norm(a[:, f.perm] - f.q @ f.r) <= 1e-12 * np.linalg.norm(a)
    assert f.q.shape == ((6, 4) if thin else (6, 6))
    assert np.all(np.tril(f.r, -1) == 0)


def test_qr_zero_column_pivoted_last(rng):
    a = rng.standard_normal((5, 4))
    a[:, 1] = 0.0
    f = qr_real(a, pivot=True)
    assert f.perm[-1] == 1
    assert f.rank == 3


def test_qr_thin_positive_diagonal(rng):
    f = qr_real(rng.standard_normal((7, 4)), thin=True)
    assert np.all(np.diag(f.r) > 0)


def test_qr_matches_reference_after_signs(rng):
    a = rng.standard_normal((6, 4))
    f = qr_real(a, thin=True)
    q_ref, r_ref = oracles.householder_full_qr(a)
    assert_allclose(f.r, r_ref[:4], atol=1e-12)
    assert_allclose(f.q, q_ref[:, :4], atol=1e-12)


def test_qr_many_shapes_reconstruct():
    rng = np.random.default_rng(7)
    for case in range(200):
        m, n = rng.integers(1, 40, size=2)
        a = rng.standard_normal((m, n))
        pivot = bool(case % 2)
        f = qr_real(a, pivot=pivot, thin=bool(case % 3 == 0) and m >= n)
        assert np.linalg.norm(a[:, f.perm] - f.q @ f.r) <= 1e-12 * np.linalg.norm(a)
        assert np.linalg.norm(f.q.T @ f.q - np.eye(f.q.shape[1])) <= 1e-12 * max(m, n)
        if pivot:
            d = np.abs(np.diag(f.r))
            assert np.all(d[:-1] >= d[1:])


def test_diagonal_rank_threshold():
    r = np.diag([1.0, 1e-3, 1e-20])
    assert diagonal_rank(r) == 2
    assert diagonal_rank(np.zeros((3, 3))) == 0


# pinv


def test_pinv_trivial():
    assert_allclose(pinv(np.eye(4)), np.eye(4), atol=0)
    assert_array_equal(pinv(np.zeros((3, 2))), np.zeros((2, 3)))


def test_pinv_rank_one_closed_form(rng):
    u, v = rng.standard_normal(5), rng.standard_normal(3)
    a = np.outer(u, v)
    g = pinv(a)
    assert_allclose(g, np.outer(v, u) / (u @ u * (v @ v)), atol=1e-14)
    tol = 1e-10 * (1 + np.linalg.norm(a))
    assert max(penrose_defects(a, g)) <= tol


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 8), st.integers(0, 2**32 - 1))
def test_pinv_penrose(m, n, r, seed):
    rng = np.random.default_rng(seed)
    r = min(r, m, n)
    a = rng.standard_normal((m, r)) @ rng.standard_normal((r, n))
    assert max(penrose_defects(a, pinv(a))) <= 1e-10 * (1 + np.linalg.norm(a))


# Sylvester


def test_sylvester_identity_operators():
    c = np.array([[1.0, 2.0], [3.0, 4.0]])
    sol = sylvester_general(np.eye(2), np.eye(2), c)
    assert sol.solvable
    assert_allclose(sol.x, c, atol=1e-15)
    assert_allclose(sol.y, 0, atol=1e-15)


def test_sylvester_zero_operators_unsolvable():
    c = np.array([[1.0, 2.0], [3.0, 4.0]])
    sol = sylvester_general(np.zeros((2, 2)), np.zeros((2, 2)), c)
    assert not sol.solvable
    assert sol.condition_residual == pytest.approx(np.linalg.norm(c))


def planted_system(rng):
    m, k, l, n = rng.integers(2, 8, size=4)
    k, l = min(k, m - 1), min(l, n - 1)  # leave room for an inconsistent part
    a, b = rng.standard_normal((m, k)), rng.standard_normal((l, n))
    x0, y0 = rng.standard_normal((k, n)), rng.standard_normal((m, l))
    return a, b, a @ x0 - y0 @ b


def test_sylvester_planted_recovered(rng):
    for _ in range(100):
        a, b, c = planted_system(rng)
        sol = sylvester_general(a, b, c)
        assert sol.solvable
        assert np.linalg.norm(a @ sol.x - sol.y @ b - c) <= 1e-9


def test_sylvester_inconsistent_flagged(rng):
    for _ in range(100):
        a, b, c = planted_system(rng)
        left = np.linalg.svd(a)[0][:, a.shape[1] :]
        right = np.linalg.svd(b)[2][b.shape[0] :].T
        bad = c + left @ rng.standard_normal((left.shape[1], right.shape[1])) @ right.T
        sol = sylvester_general(a, b, bad)
        assert not sol.solvable
        assert sol.condition_residual == pytest.approx(
            oracles.sylvester_condition(a, b, bad), rel=1e-8
        )


def test_sylvester_free_parameters_stay_solutions(rng):
    a, b, c = planted_system(rng)
    z = rng.standard_normal((a.shape[0], b.shape[0]))
    w = rng.standard_normal((a.shape[1], b.shape[1]))
    sol = sylvester_general(a, b, c, z, w)
    assert np.linalg.norm(a @ sol.x - sol.y @ b - c) <= 1e-9


def test_sylvester_shape_checks():
    with pytest.raises(ValueError):
        sylvester_general(np.eye(2), np.eye(3), np.zeros((2, 2)))


# randomized QRCP


def test_sketch_config_validation():
    assert SketchConfig(10).sample_rank == 18
    for bad in ({"target_rank": 0}, {"target_rank": 1, "oversampling": -1}):
        with pytest.raises(ValueError):
            SketchConfig(**bad)


def test_rqrcp_low_rank_reconstruction(rng):
    for seed in range(5):
        a = rng.standard_normal((60, 4)) @ rng.standard_normal((4, 30))
        f = rqrcp(a, SketchConfig(4, 8, seed))
        assert f.q.shape == (60, 4) and f.r.shape == (4, 30)
        assert np.linalg.norm(a[:, f.perm] - f.q @ f.r) <= 1e-8 * np.linalg.norm(a)


def test_rqrcp_full_rank_square(rng):
    a = rng.standard_normal((5, 5))
    f = rqrcp(a, SketchConfig(5, 0, 3))
    assert np.linalg.norm(a[:, f.perm] - f.q @ f.r) <= 1e-10


def test_rqrcp_deterministic(rng):
    a = rng.standard_normal((40, 20))
    f1, f2 = rqrcp(a, SketchConfig(6, 8, 11)), rqrcp(a, SketchConfig(6, 8, 11))
    assert_array_equal(f1.q, f2.q)
    assert_array_equal(f1.r, f2.r)
    assert_array_equal(f1.perm, f2.perm)


def test_rqrcp_rank_range():
    with pytest.raises(ValueError):
        rqrcp(np.ones((3, 4)), SketchConfig(4))


def test_gaussian_sketch_deterministic():
    assert_array_equal(gaussian_sketch(3, 4, 5), gaussian_sketch(3, 4, 5))
    assert not np.array_equal(gaussian_sketch(3, 4, 5), gaussian_sketch(3, 4, 6))


def test_sketch_norm_expectation():
    a = np.random.default_rng(0).standard_normal(50)
    l = 18
    mean = np.mean([np.sum((gaussian_sketch(l, a.size, s) @ a) ** 2) for s in range(2000)])
    assert abs(mean - l * (a @ a)) <= 0.05 * l * (a @ a)
