from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from nonlocal_bh.core.errors import InvalidArgumentError
from nonlocal_bh.fem.mesh import TensorMesh
from nonlocal_bh.fem.quadrature import (
    composite_layered_rule,
    gauss_legendre,
    layered_cell_rule,
    simpson38_cell,
    simpson38_node_weights,
    tensorize,
)


def test_simpson38_examples():
    rule = simpson38_cell((0.0, 1.0))

    assert rule.integrate(lambda x: x**3) == pytest.approx(0.25, abs=1e-15)
    expected = (3 * (1 / 3) ** 4 + 3 * (2 / 3) ** 4 + 1) / 8
    assert rule.integrate(lambda x: x**4) == pytest.approx(expected, rel=1e-14)
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-15)


def test_simpson38_rejects_degenerate_cell():
    with pytest.raises(InvalidArgumentError):
        simpson38_cell((0.5, 0.5))


def test_gauss_legendre_two_point_nodes():
    rule = gauss_legendre(2, (-1.0, 1.0))

    np.testing.assert_allclose(rule.points, [-1 / math.sqrt(3), 1 / math.sqrt(3)], rtol=1e-14)
    np.testing.assert_allclose(rule.weights, [1.0, 1.0], rtol=1e-14)

    unit = gauss_legendre(2, (0.0, 1.0))
    np.testing.assert_allclose(unit.points, [(1 - 1 / math.sqrt(3)) / 2, (1 + 1 / math.sqrt(3)) / 2], rtol=1e-14)
    np.testing.assert_allclose(unit.weights, [0.5, 0.5], rtol=1e-14)


def test_gauss_legendre_zero_length_interval():
    rule = gauss_legendre(5, (0.3, 0.3))

    assert np.all(rule.weights == 0.0)
    assert np.all(rule.points == 0.3)


def test_gauss_legendre_rejects_unsupported_order():
    with pytest.raises(InvalidArgumentError):
        gauss_legendre(4, (0.0, 1.0))


@pytest.mark.parametrize("n", [2, 5, 15])
def test_gauss_legendre_exact_up_to_degree_2n_minus_1(n, rng):
    for _ in range(5):
        a, b = np.sort(rng.uniform(-2.0, 2.0, size=2))
        rule = gauss_legendre(n, (a, b))
        assert np.all(rule.weights > 0)
        for k in range(2 * n):
            exact = (b ** (k + 1) - a ** (k + 1)) / (k + 1)
            scale = (max(abs(a), abs(b)) ** (k + 1) * 2) / (k + 1)
            assert abs(rule.integrate(lambda x: x**k) - exact) <= 1e-13 * max(abs(exact), scale)


def test_layered_rule_branches():
    split = layered_cell_rule((0.0, 0.05), 0.005)
    single = layered_cell_rule((0.0, 0.05), 0.01)

    assert len(split) == 15 and len(single) == 15
    assert np.all(split.points[:5] < 0.015) and np.all(split.points[10:] > 0.035)
    np.testing.assert_allclose(single.points, gauss_legendre(15, (0.0, 0.05)).points)
    assert split.weights.sum() == pytest.approx(0.05, rel=1e-14)
    assert single.weights.sum() == pytest.approx(0.05, rel=1e-14)


def test_layered_rule_rejects_bad_delta():
    with pytest.raises(InvalidArgumentError):
        layered_cell_rule((0.0, 0.05), 0.0)


@pytest.mark.parametrize(
    "delta,tol",
    [
        (0.01, 1e-8),  # 15점 단일 패널
        (0.005, 1e-3),  # 5점 패널 세 개: 경계층 폭 3δ 에서 GL5 정확도가 한계
    ],
)
def test_layered_rule_on_edge_centred_gaussian(delta, tol):
    cell = (0.0, 0.05)
    bump = lambda x: np.exp(-((np.asarray(x) - cell[0]) ** 2) / delta**2)
    oracle, _ = integrate.quad(bump, *cell, epsabs=0.0, epsrel=1e-13)

    got = layered_cell_rule(cell, delta).integrate(bump)

    assert abs(got - oracle) <= tol * oracle


def test_tensorize_examples():
    h = 0.05
    rx = gauss_legendre(5, (0.0, h))
    ry = gauss_legendre(5, (0.2, 0.2 + h))
    rule = tensorize(rx, ry)

    assert len(rule) == 25
    assert rule.weights.sum() == pytest.approx(h * h, rel=1e-14)
    got = rule.integrate(lambda p: p[:, 0] * p[:, 1])
    expected = rx.integrate(lambda x: x) * ry.integrate(lambda y: y)
    assert got == pytest.approx(expected, abs=1e-14)

    big = tensorize(gauss_legendre(15, (0.0, 1.0)), gauss_legendre(15, (0.0, 1.0)))
    assert len(big) == 225 and big.points.shape == (225, 2)


def test_composite_layered_rule_covers_unit_interval():
    mesh = TensorMesh(n_cells=20)
    rule = composite_layered_rule(mesh, 0.0125)

    assert len(rule) == 300
    assert rule.weights.sum() == pytest.approx(1.0, rel=1e-13)
    assert np.all(np.diff(rule.points) > 0)


def test_simpson_node_weights_align_with_basis_nodes():
    mesh = TensorMesh(n_cells=4)
    weights = simpson38_node_weights(mesh)

    assert weights.shape == (mesh.n_dofs_per_dim,)
    assert weights.sum() == pytest.approx(1.0, rel=1e-14)
    # 셀 경계 노드는 양쪽 셀에서 1/8 씩 받는다.
    assert weights[3] == pytest.approx(2 * mesh.h / 8, rel=1e-14)
    assert weights @ mesh.nodes**3 == pytest.approx(0.25, rel=1e-14)
    for i in range(mesh.n_cells):
        np.testing.assert_allclose(
            simpson38_cell(mesh.cell(i)).points, mesh.nodes[3 * i : 3 * i + 4], rtol=0.0, atol=1e-15
        )
