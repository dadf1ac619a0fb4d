import cmath
import math

import numpy as np
import pytest
from conftest import sample_omega

from gyre.elliptic import EllipticModulus, complete_K, sn_unit
from gyre.weierstrass import (
    FAMILY_R,
    FAMILY_T,
    SingularPathError,
    WeierstrassData,
    flat_structure,
    gauss_map_along,
    get_family,
    immersion,
    immersion_at,
    in_omega,
    psi,
    psi_closed_form_T,
    psi_pair,
    segment_integrals,
    theta_h,
    theta_h_reference,
)
from gyre.weierstrass import edge_vectors_T


def test_family_table():
    assert get_family("t") is FAMILY_T and get_family(FAMILY_R) is FAMILY_R
    assert (FAMILY_T.screw_order, FAMILY_T.root_exponent, FAMILY_T.strip_period) == (4, 0.5, 2.0)
    assert (FAMILY_R.screw_order, FAMILY_R.root_exponent, FAMILY_R.strip_period) == (3, 2 / 3, 1.5)
    assert FAMILY_R.angle_step == pytest.approx(2 * math.pi / 3)
    with pytest.raises(ValueError):
        get_family("X")


def test_in_omega():
    assert in_omega(0.2j, "T")  # between the two circles
    assert not in_omega(0.3 + 0.2j, "T")  # inside |tau - 1/2| < 1/2
    assert in_omega(1j, "T") and in_omega(1j, "R")
    assert in_omega(0.7 + 1j, "T") and not in_omega(0.7 + 1j, "R")
    assert not in_omega(-1 + 1j, "T")
    assert not in_omega(-0.5 + 0.3j, "T")


def test_data_invariants():
    for tau in (0.3 + 0.8j, 1.2 + 0.5j, -0.7 + 0.3j):
        d = WeierstrassData("T", tau, theta=0.3)
        assert abs(d.rho**4 - d.modulus.m) < 1e-12 * abs(d.modulus.m)
        assert abs(d.rho - d.modulus.m_power(0.25)) < 1e-12 * abs(d.rho)
        assert d.dh == pytest.approx(cmath.exp(-0.3j))
        assert d.with_theta(1.0).theta == 1.0 and d.theta == 0.3
    with pytest.raises(ValueError):
        WeierstrassData("T", 0.3 - 0.1j)


# -- Gauss map continuation -------------------------------------------------------------


def test_gauss_map_constant_path_is_principal_root():
    for fam in (FAMILY_T, FAMILY_R):
        d = WeierstrassData(fam, 0.2 + 0.9j)
        f = d.rho * sn_unit(0.25, d.tau)
        G = gauss_map_along([0.25, 0.25, 0.25], d)
        principal = cmath.exp(fam.root_exponent * cmath.log(f))
        assert np.allclose(G, principal, atol=1e-14)


@pytest.mark.parametrize("fam", [FAMILY_T, FAMILY_R])
def test_monodromy(fam):
    d = WeierstrassData(fam, 0.2 + 0.9j)
    for centre, winding in ((0.5, 1), (d.tau / 2, -1), (0.5 + d.tau / 2, -1)):
        loop = centre + 0.05 * np.exp(2j * np.pi * np.linspace(0, 1, 33))
        G = gauss_map_along(loop, d)
        expected = cmath.exp(2j * math.pi * fam.root_exponent * winding)
        assert abs(G[-1] / G[0] - expected) < 1e-12
        # consecutive samples never jump by more than pi/2 in argument
        assert np.max(np.abs(np.angle(G[1:] / G[:-1]))) < math.pi / 2
    # a loop enclosing nothing closes up
    loop = 0.25 + d.tau / 4 + 0.05 * np.exp(2j * np.pi * np.linspace(0, 1, 33))
    G = gauss_map_along(loop, d)
    assert abs(G[-1] - G[0]) < 1e-13


def test_gauss_map_endpoints_and_interior_guard():
    d = WeierstrassData("T", 0.1 + 0.8j)
    G = gauss_map_along(np.linspace(0, 0.25, 5), d)
    assert G[0] == 0
    G = gauss_map_along([0.25, d.tau / 2], d)
    assert np.isinf(G[-1])
    with pytest.raises(SingularPathError):
        gauss_map_along([0.25, 0.5, 0.75], d)
    with pytest.raises(SingularPathError):
        gauss_map_along([-0.25, 0.25], d)  # segment passes through the zero at 0


# -- psi and theta_h -------------------------------------------------------------------


@pytest.mark.parametrize("family", ["T", "R"])
def test_dual_integral_identity(family):
    for tau in sample_omega(20, family, seed=2):
        IG, IH = psi_pair(WeierstrassData(family, tau, 0.0))
        assert abs(IG - IH) < 1e-8 * abs(IG), tau


def test_psi_closed_form_at_r_one():
    tau = 1 + 1.3j
    num = psi(WeierstrassData("T", tau, 0.0))
    assert abs(num - psi_closed_form_T(tau)) < 1e-8 * abs(num)
    # the printed r = 1 formula
    mod = EllipticModulus.from_tau(tau)
    mt = mod.m
    q = mod.m_tilde_power(0.25)
    mu = (1 + q) ** 2 / (2 + 2 * q * q)
    printed = (
        cmath.exp(1j * math.pi / 4)
        * (1 - 1j)
        / (2 * math.sqrt(2))
        * mod.m_tilde_power(-0.125)
        / cmath.sqrt(1 + cmath.sqrt(mt))
        * complete_K(mu)
        / mod.K
    )
    assert abs(printed - num) < 1e-8 * abs(num)


def test_psi_closed_form_across_omega():
    for tau in sample_omega(12, "T", seed=4, im_min=0.1):
        num = psi(WeierstrassData("T", tau, 0.0))
        assert abs(num - psi_closed_form_T(tau)) < 1e-8 * abs(num), tau


def test_mu_limit():
    q = 1.0
    assert (1 + q) ** 2 / (2 + 2 * q * q) == 1.0


def test_edge_vectors_match_flat_edges():
    for tau in (0.3 + 0.8j, -0.6 + 1.2j, 0.8 + 0.5j):
        d = WeierstrassData("T", tau, 0.0)
        inner, outer = edge_vectors_T(tau)
        e_in = segment_integrals(d, 0, 0.5)[0]
        t2 = d.reduced.tilde / 2
        e_out = segment_integrals(d, t2, t2 + 0.5)[0]
        assert abs(abs(inner) - abs(e_in)) < 1e-9 * abs(e_in)
        assert abs(abs(outer) - abs(e_out)) < 1e-9 * abs(e_out)


@pytest.mark.parametrize("t", [0.6, 1.0, 1.5, 2.5])
def test_calibration_lines(t):
    assert theta_h(complex(-1, t), "T") == pytest.approx(math.pi / 2, abs=1e-8)
    assert theta_h(complex(-1, t), "R") == pytest.approx(math.pi / 2, abs=1e-8)
    assert theta_h(complex(1, t), "T") == pytest.approx(0, abs=1e-8)
    assert theta_h(complex(0.5, t), "R") == pytest.approx(0, abs=1e-8)


def test_hclp_point():
    assert abs(theta_h(0.5 + 0.5j, "R")) < 1e-6


def test_theta_h_large_im():
    assert theta_h(0.2 + 6j, "T") == pytest.approx(0.2 * math.pi, abs=1e-3)
    assert theta_h_reference(0.2 + 6j, "T") == pytest.approx(0.2 * math.pi)


def test_theta_h_continuous_along_vertical():
    # no sheet jumps (pi for T, 2pi/3 for R): steps stay far below them
    ys = np.linspace(0.3, 3, 55)
    for fam, x in (("T", 0.0), ("T", -0.6), ("R", -0.3)):
        vals = np.array([theta_h(complex(x, y), fam) for y in ys])
        assert np.max(np.abs(np.diff(vals))) < 0.1


# -- flat structure ----------------------------------------------------------------------


@pytest.mark.parametrize("fam, tau", [(FAMILY_T, 0.3 + 0.2j), (FAMILY_T, -0.2 + 0.9j), (FAMILY_R, 0.1 + 0.7j)])
def test_flat_structure_rotational_closure(fam, tau):
    d = WeierstrassData(fam, tau)
    n = 8
    angle = 2 * math.pi / fam.screw_order
    for line in flat_structure(d, "Phi1", n):
        v = line.vertices
        edges = np.diff(v)
        assert len(edges) == fam.screw_order
        # closes after screw_order edges
        assert abs(np.sum(edges)) < 1e-9 * abs(edges[0])
        s = line.samples
        for j in range(len(edges) - 1):
            a = s[j * n : (j + 1) * n + 1] - v[j]
            b = s[(j + 1) * n : (j + 2) * n + 1] - v[j + 1]
            rot = b[-1] / a[-1]
            assert abs(abs(rot) - 1) < 1e-9
            assert abs(abs(cmath.phase(rot)) - angle) < 1e-9
            assert np.max(np.abs(b - rot * a)) < 1e-6 * abs(edges[0])


def test_flat_structure_edge_inversion_symmetry():
    d = WeierstrassData("T", 0.3 + 0.6j)
    n = 10
    for line in flat_structure(d, "Phi2", n):
        s, v = line.samples, line.vertices
        for j in range(len(v) - 1):
            edge = s[j * n : (j + 1) * n + 1]
            mid = (v[j] + v[j + 1]) / 2
            assert np.max(np.abs((edge - mid) + (edge[::-1] - mid))) < 1e-9 * abs(v[1] - v[0])


def test_flat_structure_phi1_phi2_swap():
    d = WeierstrassData("T", 0.3 + 0.2j)
    b1, t1 = flat_structure(d, "Phi1", 4)
    b2, t2 = flat_structure(d, "Phi2", 4)
    e = lambda line: abs(line.vertices[1] - line.vertices[0])
    # the inner square of Phi1 is the outer one of Phi2 and vice versa
    assert e(b1) == pytest.approx(e(t2), rel=1e-9)
    assert e(t1) == pytest.approx(e(b2), rel=1e-9)
    assert e(b1) < e(t1)
    with pytest.raises(ValueError):
        flat_structure(d, "Phi3")


def test_flat_structure_scales_with_dh():
    d0 = WeierstrassData("R", 0.1 + 0.7j, 0.0)
    d1 = d0.with_theta(0.7)
    b0, _ = flat_structure(d0, "Phi1", 4)
    b1, _ = flat_structure(d1, "Phi1", 4)
    assert np.allclose(b1.samples, cmath.exp(-0.7j) * b0.samples, atol=1e-12)


# -- immersion ----------------------------------------------------------------------------


def test_immersion_heights_at_half_pi():
    d = WeierstrassData("T", 0.2 + 1.1j, math.pi / 2)
    y = np.linspace(0, 0.55, 5)
    X = immersion(d, np.linspace(0, 2, 9), y)
    assert np.allclose(X[..., 2], y[:, None] - 0.0, atol=1e-15)
    assert np.allclose(immersion_at(d, 0.25), 0, atol=1e-15)


@pytest.mark.parametrize("fam, tau", [(FAMILY_T, 0.2 + 1.1j), (FAMILY_T, -0.7 + 0.6j), (FAMILY_R, -0.3 + 0.7j)])
def test_immersion_grid_matches_pointwise(fam, tau):
    d = WeierstrassData(fam, tau, theta=0.7)
    x = np.linspace(0, fam.strip_period, 7)
    y = np.linspace(0, tau.imag / 2, 5)
    X = immersion(d, x, y)
    for i, j in ((0, 0), (4, 6), (2, 3), (1, 5), (4, 0)):
        z = x[j] + 1j * y[i]
        assert np.max(np.abs(X[i, j] - immersion_at(d, z))) < 1e-10
    assert X[..., 2] == pytest.approx(((d.dh * (x[None, :] + 1j * y[:, None] - 0.25)).real))


def test_immersion_alignment_at_theta_h():
    for fam, tau in (("T", 0.1 + 0.9j), ("R", -0.4 + 0.8j)):
        d = WeierstrassData(fam, tau, theta_h(tau, fam))
        a = immersion_at(d, 0)
        b = immersion_at(d, (1 + tau) / 2)
        assert np.hypot(*(a - b)[:2]) < 1e-9
        assert abs(a[2] - b[2]) > 0.05


def test_immersion_rejects_outside_strip():
    d = WeierstrassData("T", 0.2 + 1.1j)
    with pytest.raises(ValueError):
        immersion(d, [0.3], [0.6])
