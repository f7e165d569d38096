"""Tests for force classification, closedness, exactness, and conjugation."""

from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose

from nilmag.algebra import MetricNilAlgebra
from nilmag.errors import DegenerateForceError, InvalidForceError, UnsupportedForceError
from nilmag.lorentz import (
    ForceType,
    LorentzForce,
    check_closed,
    conjugate_force,
    exactness_test,
    random_closed_type1,
    type2_from_vector,
    verify_central_constraints,
)


def h3():
    return MetricNilAlgebra.heisenberg(1)


def h5():
    return MetricNilAlgebra.heisenberg(2)


def h3_times_r2():
    return MetricNilAlgebra.from_structure(5, [(1, 2, 3, 1.0)])


def _skew(rng, n):
    a = rng.normal(size=(n, n))
    return 0.5 * (a - a.T)


def test_force_requires_skew_and_finite():
    alg = h3()
    with pytest.raises(InvalidForceError):
        LorentzForce(alg, np.eye(3))
    with pytest.raises(InvalidForceError):
        LorentzForce(alg, np.full((3, 3), np.nan))
    with pytest.raises(InvalidForceError):
        LorentzForce(alg, np.zeros((4, 4)))


def test_force_type_classification():
    alg = h5()
    rng = np.random.default_rng(1)
    m_type1 = np.zeros((5, 5))
    m_type1[:4, :4] = _skew(rng, 4)
    assert LorentzForce(alg, m_type1).force_type() is ForceType.TYPE_I

    m_type2 = np.zeros((5, 5))
    m_type2[:4, 4] = [1.0, -2.0, 0.5, 0.0]
    m_type2[4, :4] = -m_type2[:4, 4]
    assert LorentzForce(alg, m_type2).force_type() is ForceType.TYPE_II

    assert LorentzForce(alg, m_type1 + m_type2).force_type() is ForceType.MIXED
    assert LorentzForce(alg, np.zeros((5, 5))).force_type() is ForceType.TYPE_I


def test_every_2form_on_h3_is_closed_with_zero_residual():
    """dim 3 has a single triple whose cyclic sum cancels identically."""
    alg = h3()
    basis_forms = []
    for i, j in [(0, 1), (0, 2), (1, 2)]:
        m = np.zeros((3, 3))
        m[i, j], m[j, i] = -1.0, 1.0
        basis_forms.append(m)
    for m in basis_forms:
        rep = check_closed(alg, m)
        assert rep.closed
        assert rep.max_residual == 0.0
        assert rep.frobenius_residual == 0.0


def test_nonclosed_form_on_h5_reports_violating_triple():
    """omega = xi^1 wedge xi^5 on H5 fails d omega = 0 on (e1, e3, e4)."""
    alg = h5()
    m = np.zeros((5, 5))
    m[4, 0], m[0, 4] = 1.0, -1.0  # omega(x, y) = x1 y5 - x5 y1
    rep = check_closed(alg, m)
    assert not rep.closed
    assert rep.worst_triple == (0, 2, 3)
    assert abs(rep.max_residual - 1.0) <= 1e-15


def test_type1_closed_iff_vanishes_on_commutator():
    alg = h3_times_r2()
    rng = np.random.default_rng(5)
    # closed: skew on v + skew on ker j only
    f = random_closed_type1(alg, rng)
    assert f.force_type() is ForceType.TYPE_I
    assert check_closed(alg, f).closed
    rep = verify_central_constraints(alg, f)
    assert rep.ok
    assert rep.commutator_residual <= 1e-14
    assert rep.kernel_residual <= 1e-14

    # not closed: F_z rotates the commutator direction into a flat one
    m = np.zeros((5, 5))
    m[2, 3], m[3, 2] = -1.0, 1.0  # e3 (commutator) <-> e4 (flat)
    fbad = LorentzForce(alg, m)
    assert fbad.force_type() is ForceType.TYPE_I
    assert not check_closed(alg, fbad).closed
    assert not verify_central_constraints(alg, fbad).ok


def test_verify_central_constraints_rejects_type2():
    alg = h3()
    with pytest.raises(UnsupportedForceError):
        verify_central_constraints(alg, type2_from_vector(alg, [1.0, 0.0]))


def test_exactness_recognizes_central_derivative_forces():
    rng = np.random.default_rng(9)
    for alg in [h3(), h5(), MetricNilAlgebra.quaternionic(1)]:
        z = rng.normal(size=alg.dim_z)
        m = np.zeros((alg.dim, alg.dim))
        m[: alg.dim_v, : alg.dim_v] = alg.j_map(z)
        res = exactness_test(alg, m)
        assert res.is_exact
        assert res.residual <= 1e-12
        assert_allclose(alg.z_part(res.z_tilde), z, atol=1e-10)
        assert_allclose(alg.v_part(res.z_tilde), np.zeros(alg.dim_v), atol=0)


def test_exactness_rejects_unequal_rotation_rates_on_h5():
    """F = diag(mu1 R, mu2 R) is exact iff mu1 = mu2; residual |mu1-mu2|*sqrt(2)."""
    alg = h5()
    r = np.array([[0.0, -1.0], [1.0, 0.0]])
    for mu1, mu2 in [(1.0, 1.0), (-1.0, 2.0), (0.3, 0.7)]:
        m = np.zeros((5, 5))
        m[:2, :2] = mu1 * r
        m[2:4, 2:4] = mu2 * r
        res = exactness_test(alg, m)
        if mu1 == mu2:
            assert res.is_exact
        else:
            assert not res.is_exact
            # nearest exact force is the average rate; each 2x2 block then
            # carries 2 (|mu1-mu2|/2)^2, so the Frobenius gap is |mu1 - mu2|
            fro = abs(mu1 - mu2)
            norm_f = np.linalg.norm(m)
            assert abs(res.residual - fro / max(1.0, norm_f)) <= 1e-12
            assert_allclose(alg.z_part(res.z_tilde), [(mu1 + mu2) / 2], atol=1e-12)


def test_exactness_requires_zero_central_block():
    alg = h3_times_r2()
    rng = np.random.default_rng(13)
    m = np.zeros((5, 5))
    m[:2, :2] = alg.j_map(np.array([0.7, 0.0, 0.0]))
    ker = alg.kernel_z_basis()
    b = _skew(rng, 2)
    m[2:, 2:] = ker.T @ b @ ker
    res = exactness_test(alg, m)
    assert not res.is_exact  # nonzero action on flat directions is not j(Z~) (+) 0


def test_type2_from_vector_matrix_and_errors():
    alg = h3()
    f = type2_from_vector(alg, [2.0, -1.0])
    want = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 2.0], [-1.0, -2.0, 0.0]])
    assert_allclose(f.matrix, want, atol=0)
    assert f.force_type() is ForceType.TYPE_II
    assert check_closed(alg, f).closed  # every 2-form on H3 is closed
    # F(V + Z) = [V, u] + j(Z) u
    rng = np.random.default_rng(3)
    u = np.array([2.0, -1.0])
    for _ in range(10):
        x = rng.normal(size=3)
        via_def = alg.bracket(alg.embed_v(x[:2]), alg.embed_v(u)) + alg.embed_v(
            alg.j_map(x[2:]) @ u
        )
        assert_allclose(f(x), via_def, atol=1e-14)
    # kernel of F is spanned by u itself
    assert_allclose(f(alg.embed_v(u)), np.zeros(3), atol=0)

    with pytest.raises(DegenerateForceError):
        type2_from_vector(alg, [0.0, 0.0])
    with pytest.raises(UnsupportedForceError):
        type2_from_vector(h5(), [1.0, 0.0])
    with pytest.raises(InvalidForceError):
        type2_from_vector(alg, [1.0, 0.0, 0.5])  # central component not allowed


def test_conjugate_force_by_rotation_automorphism():
    """Rotations of v (+) matching central action are automorphisms of H3."""
    alg = h3()
    theta = 0.73
    c, s = np.cos(theta), np.sin(theta)
    phi = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    # rotations commute with j(e3), so conjugating the exact force is neutral
    m = np.zeros((3, 3))
    m[:2, :2] = alg.j_map(np.array([0.9]))
    g = conjugate_force(alg, m, phi)
    assert_allclose(g.matrix, m, atol=1e-14)
    # conjugating a type-II force rotates its direction vector
    u = np.array([1.0, -0.5])
    f = type2_from_vector(alg, u)
    g2 = conjugate_force(alg, f, phi)
    u_rot = phi[:2, :2] @ u
    assert_allclose(g2.matrix, type2_from_vector(alg, u_rot).matrix, atol=1e-14)
    # closedness is invariant under automorphism conjugation
    assert check_closed(alg, g2).closed


def test_conjugate_force_scaling_and_validation():
    alg = h3()
    f = type2_from_vector(alg, [1.0, 1.0])
    g = conjugate_force(alg, f, np.eye(3), r=2.5)
    assert_allclose(g.matrix, 2.5 * f.matrix, atol=0)
    with pytest.raises(InvalidForceError):
        conjugate_force(alg, f, 2.0 * np.eye(3))  # not orthogonal
    # orthogonal but not an automorphism: swap e1 <-> e3
    swap = np.eye(3)[[2, 1, 0]]
    with pytest.raises(InvalidForceError):
        conjugate_force(alg, f, swap)


def test_conjugation_preserves_closedness_residuals_for_basis_permutation():
    """Exact residual equality for an automorphism that permutes basis vectors."""
    alg = h5()
    # swap the two symplectic pairs: (X1,Y1) <-> (X2,Y2); fixes Z
    phi = np.eye(5)[[2, 3, 0, 1, 4]].T
    m = np.zeros((5, 5))
    m[4, 0], m[0, 4] = 1.0, -1.0
    rep = check_closed(alg, m)
    g = conjugate_force(alg, m, phi)
    rep2 = check_closed(alg, g)
    assert rep.max_residual == rep2.max_residual
    assert rep.closed == rep2.closed
    # frobenius residual is invariant under any orthogonal automorphism
    theta = 0.4
    c, s = np.cos(theta), np.sin(theta)
    rot = np.eye(5)
    rot[:2, :2] = [[c, -s], [s, c]]
    g3 = conjugate_force(alg, m, rot)
    rep3 = check_closed(alg, g3)
    assert abs(rep3.frobenius_residual - rep.frobenius_residual) <= 1e-12


def test_random_closed_type1_is_closed_across_presets():
    rng = np.random.default_rng(21)
    for alg in [h3(), h5(), MetricNilAlgebra.quaternionic(1), h3_times_r2()]:
        for _ in range(5):
            f = random_closed_type1(alg, rng)
            assert f.force_type() is ForceType.TYPE_I
            assert check_closed(alg, f).closed
