import math

import numpy as np
import pytest

from localstats import lattice_space as ls
from localstats.functions import TestFunction
from localstats.sequences import AffineLatticeSpec, gen_directions, gen_sqrt
from localstats.statistics import count_stat

G = ls.AffineGroupElement


def random_element(rng):
    return G(ls.random_sl2(rng), rng.normal(size=2))


def close(g, h, tol=1e-12):
    return np.max(np.abs(g.m - h.m)) <= tol and np.max(np.abs(g.xi - h.xi)) <= tol


def integer_gamma(rng, length=4):
    t = np.array([[1, 1], [0, 1]])
    s = np.array([[0, -1], [1, 0]])
    m = np.eye(2, dtype=int)
    for _ in range(length):
        m = m @ np.linalg.matrix_power(t, int(rng.integers(-3, 4))) @ s
    return m.astype(float)


# ---------------------------------------------------------------- group


def test_compose_examples(rng):
    a, b = rng.normal(size=2), rng.normal(size=2)
    assert close(ls.compose(G.translation(a), G.translation(b)), G.translation(a + b))
    m = ls.random_sl2(rng)
    assert close(ls.compose(G.matrix(m), G.matrix(np.linalg.inv(m))), G.identity())


def test_compose_associative_and_inverse(rng):
    for _ in range(50):
        g, h, k = (random_element(rng) for _ in range(3))
        assert close((g @ h) @ k, g @ (h @ k), 1e-11)
        assert close(g @ ls.inverse(g), G.identity(), 1e-11)
        assert close(G.identity() @ g, g) and close(g @ G.identity(), g)


def test_determinant_checked():
    with pytest.raises(ValueError):
        G(np.diag([2.0, 1.0]), (0, 0))


def test_apply_point(rng):
    g = random_element(rng)
    assert np.allclose(ls.apply_point(np.zeros(2), g), g.xi, atol=0)
    assert np.array_equal(ls.apply_point(np.array([1.0, 0.0]), G.identity()), [1.0, 0.0])
    for _ in range(50):
        g, h = random_element(rng), random_element(rng)
        x = rng.normal(size=2)
        assert np.allclose(ls.apply_point(ls.apply_point(x, g), h), ls.apply_point(x, g @ h), atol=1e-12)


def test_iwasawa_examples():
    c = ls.iwasawa(np.eye(2))
    assert (c.u, c.v, c.phi) == (0.0, 1.0, 0.0)
    c = ls.iwasawa(ls.a_mat(4.0))
    assert (c.u, c.v, c.phi) == (0.0, 4.0, 0.0)
    with pytest.raises(ValueError):
        ls.iwasawa(np.diag([1.1, 1.0]))


def test_iwasawa_round_trip(rng):
    for _ in range(200):
        m = ls.random_sl2(rng)
        c = ls.iwasawa(m)
        assert 0 <= c.phi < 2 * math.pi and c.v > 0
        assert np.max(np.abs(ls.recompose(c) - m)) <= 1e-12
        c2 = ls.iwasawa(ls.recompose(c))
        assert abs(c2.u - c.u) <= 1e-12 and abs(c2.v - c.v) <= 1e-12
        assert abs(math.remainder(c2.phi - c.phi, 2 * math.pi)) <= 1e-12


def test_tau_is_moebius_image_of_i(rng):
    m = ls.random_sl2(rng)
    (a, b), (c, d) = m
    assert ls.iwasawa(m).tau == pytest.approx((a * 1j + b) / (c * 1j + d), abs=1e-12)


def test_affine_iwasawa_round_trip(rng):
    for _ in range(50):
        g = random_element(rng)
        assert close(ls.from_iwasawa(ls.affine_iwasawa(g)), g, 1e-11)


def test_coordinate_action_identity(rng):
    c = ls.affine_iwasawa(random_element(rng))
    assert ls.coordinate_action(G.identity(), c) == c


def test_coordinate_action_matches_compose(rng):
    for _ in range(100):
        gamma = integer_gamma(rng)
        m = rng.integers(-3, 4, size=2).astype(float)
        g = ls.compose(G.translation(m), G.matrix(gamma))
        coords = ls.affine_iwasawa(G(ls.random_sl2(rng), rng.normal(size=2)))
        direct = ls.affine_iwasawa(ls.compose(g, ls.from_iwasawa(coords)))
        via = ls.coordinate_action(g, coords)
        assert via.v == pytest.approx(direct.v, rel=1e-10)
        assert via.u == pytest.approx(direct.u, abs=1e-9)
        assert abs(math.remainder(via.phi - direct.phi, 2 * math.pi)) <= 1e-9
        assert np.allclose(via.xi, direct.xi, atol=1e-9)


def test_coordinate_action_translation_part():
    g = G.matrix(ls.n_mat(2.0))  # (c, d) = (0, 1)
    c = ls.coordinate_action(g, ls.IwasawaCoords(0.3, 0.7, 1.0, (0.1, 0.2)))
    assert c.v == pytest.approx(0.7) and c.u == pytest.approx(2.3) and c.phi == pytest.approx(1.0)


# ---------------------------------------------------------------- counting


def test_lattice_count_examples():
    tri = ls.TriangleRegion(0.0, 1.0)
    assert ls.lattice_count(G.identity(), tri) == 0
    assert ls.lattice_count(G.matrix(ls.a_mat(0.25)), tri) == 1


def test_regions_reject_bad_input():
    with pytest.raises(ValueError):
        ls.TriangleRegion(1.0, 1.0)
    with pytest.raises(ValueError):
        ls.TriangleRegion(0.0, 1.0, "other")


@pytest.mark.parametrize("kind", ["disc", "box", "triangle", "sqrt-triangle"])
def test_lattice_count_matches_bruteforce(rng, kind):
    for _ in range(40):
        g = G(ls.random_sl2(rng, log_v_scale=2.0), rng.normal(size=2))
        if kind == "disc":
            region = ls.Disc(rng.uniform(0.5, 6), tuple(rng.normal(size=2)))
        elif kind == "box":
            x0, y0 = rng.normal(size=2)
            region = ls.Box(x0, x0 + rng.uniform(0.1, 5), y0, y0 + rng.uniform(0.1, 5))
        else:
            lo = rng.uniform(-2, 1)
            region = ls.TriangleRegion(lo, lo + rng.uniform(0.05, 2), "sqrt" if kind == "sqrt-triangle" else "directions")
        assert ls.lattice_count(g, region) == ls.lattice_count_bruteforce(g, region)


def test_disc_count_near_area(rng):
    g = G(ls.random_sl2(rng), rng.normal(size=2))
    n = ls.lattice_count(g, ls.Disc(60.0))
    assert abs(n - math.pi * 3600) < 4 * 2 * math.pi * 60


# ---------------------------------------------------------------- bound checks


def test_cone_bound_example():
    spec = AffineLatticeSpec(np.eye(2), (0.0, 0.0))
    chk = ls.cone_bound_check(spec, 0.0, (-0.1, 0.1), 2 * math.log(50), vartheta=0.05, t0=50)
    assert chk.holds and chk.lhs <= chk.rhs


def test_cone_bound_random_sweep(rng):
    spec = AffineLatticeSpec(ls.random_sl2(rng), (math.sqrt(2), math.sqrt(5)))
    t = 2 * math.log(150)
    seq = gen_directions(spec, math.exp(t / 2))
    for x in rng.uniform(0, 1, 100):
        lo = rng.uniform(-3, 2)
        chk = ls.cone_bound_check(spec, x, (lo, lo + rng.uniform(0.1, 2)), t, seq=seq)
        assert chk.holds


def test_cone_bound_rejects_small_t():
    spec = AffineLatticeSpec(np.eye(2), (0.1, 0.2))
    with pytest.raises(ValueError):
        ls.cone_bound_check(spec, 0.2, (0, 1), 2 * math.log(10))
    with pytest.raises(ValueError):
        ls.cone_bound_check(spec, 0.2, (0, 1), 2 * math.log(200), vartheta=0.0)


def test_sqrt_zero_window():
    t_max = 10_000
    seq = gen_sqrt(t_max)
    x = 0.25 / math.sqrt(t_max)
    for iv in [(-1, 1), (0, 1), (-0.5, 0.2)]:
        chk = ls.sqrt_bound_check(x, iv, t_max, seq=seq)
        assert chk.zero_window and chk.zero_holds and chk.lhs == 0
        assert count_stat(seq, x, iv) == 0


def test_sqrt_bound_random_sweep(rng):
    t_max = 10_000
    seq = gen_sqrt(t_max)
    for x in rng.uniform(-0.5, 0.5, 200):
        assert ls.sqrt_bound_check(x, (0, 1), t_max, seq=seq).holds


def test_sqrt_bound_errors():
    with pytest.raises(ValueError):
        ls.sqrt_bound_check(0.1, (0.5, 0.5), 10_000)
    with pytest.raises(ValueError):
        ls.sqrt_bound_check(0.7, (0, 1), 10_000)


def test_cusp_examples():
    chk = ls.cusp_bound_check(G.matrix(ls.a_mat(100.0)), ls.Disc(1.0))
    assert chk.rhs == 21 and chk.holds and chk.lhs == ls.lattice_count_bruteforce(G.matrix(ls.a_mat(100.0)), ls.Disc(1.0))
    g = ls.from_iwasawa(ls.IwasawaCoords(0.0, 100.0, 0.0, (0.5, 0.0)))
    chk = ls.cusp_bound_check(g, ls.Disc(1.0))
    assert chk.rhs == 0 and chk.lhs == 0


def test_cusp_power_form(rng):
    for _ in range(100):
        coords = ls.IwasawaCoords(rng.uniform(-2, 2), rng.uniform(4.01, 400), rng.uniform(0, 2 * math.pi),
                                  tuple(rng.normal(size=2)))
        chk = ls.cusp_bound_check(ls.from_iwasawa(coords), ls.Disc(1.0), s=2.5)
        assert chk.count_factor in (0, 1) and chk.holds and chk.holds_power


def test_cusp_preconditions():
    with pytest.raises(ValueError):
        ls.cusp_bound_check(G.matrix(ls.a_mat(0.5)), ls.Disc(1.0))
    with pytest.raises(ValueError):
        ls.cusp_bound_check(G.matrix(ls.a_mat(2.0)), ls.Disc(1.0), s=1.0)


# ---------------------------------------------------------------- bounding function


def test_bounding_example():
    coords = ls.IwasawaCoords(0.0, 4.0, 0.0)
    val = ls.bounding_function(coords, TestFunction.hat(), 4.0, 0.0, c_max=5)
    assert val.value == 2.0 and sorted(val.cosets) == [(0, -1), (0, 1)]
    assert ls.bounding_function(coords, TestFunction.hat(), 5.0, 0.0).value == 0.0


def test_cosets_complete_against_brute(rng):
    for _ in range(20):
        tau = complex(rng.uniform(-1, 1), math.exp(rng.uniform(-1, 3)))
        r_cut = rng.uniform(1, 3)
        brute = sorted((c, d) for c in range(-30, 31) for d in range(-60, 61)
                       if math.gcd(c, d) == 1 and tau.imag / abs(c * tau + d) ** 2 >= r_cut)
        assert sorted(ls.coset_representatives(tau, r_cut)) == brute


def test_bounding_beta_scaling():
    coords = ls.IwasawaCoords(0.2, 9.0, 0.0, (0.05, 0.3))
    f = TestFunction.hat(0.0, 3.0)
    b0 = ls.bounding_function(coords, f, 1.0, 0.0)
    b1 = ls.bounding_function(coords, f, 1.0, 1.0)
    expect = 0.0
    for c, d in b0.cosets:
        vg = coords.v / abs(c * coords.tau + d) ** 2
        x1 = d * coords.xi[0] - c * coords.xi[1]
        expect += vg * sum(float(f((x1 + m) * math.sqrt(vg))) for m in range(-20, 21))
    assert b1.value == pytest.approx(expect, rel=1e-12)
    assert b0.value > 0


def test_bounding_rejects_small_c_max():
    with pytest.raises(ValueError):
        ls.bounding_function(ls.IwasawaCoords(0.5, 0.05, 0.0), TestFunction.hat(), 1.0, 0.0, c_max=1)


def test_dominance_recipe(rng):
    f, beta = ls.dominance_test_function((0, 1), 2.0, "sqrt")
    tri = ls.TriangleRegion(0, 1, "sqrt")
    r_cut = 1.0
    for _ in range(100):
        coords = ls.IwasawaCoords(rng.uniform(-1, 1), math.exp(rng.uniform(0, 5)), rng.uniform(0, 2 * math.pi),
                                  tuple(rng.normal(size=2)))
        x = ls.lattice_count(ls.from_iwasawa(coords), tri)
        assert x ** 2 <= ls.bounding_function(coords, f, r_cut, beta).value + 1e-9


# ---------------------------------------------------------------- horocycle experiment


def test_horocycle_examples():
    hat = TestFunction.hat()
    xi = (math.sqrt(2), math.sqrt(3))
    assert ls.horocycle_mass_experiment(xi, hat, 0.0, 1e6, 0.01, u_grid=2001) == 0.0
    hi = ls.horocycle_mass_experiment(xi, hat, 1.2, 100, 1e-3, "nonlinear", u_grid=4001)
    lo = ls.horocycle_mass_experiment(xi, hat, 1.2, 400, 1e-3, "nonlinear", u_grid=4001)
    assert hi >= lo
    hi = ls.horocycle_mass_experiment(xi, hat, 0.5, 100, 1e-3, "linear", u_grid=4001)
    lo = ls.horocycle_mass_experiment(xi, hat, 0.5, 1000, 1e-3, "linear", u_grid=4001)
    assert hi >= lo


@pytest.mark.parametrize("kw", [dict(theta=1.0), dict(theta=0.0), dict(eta=-0.1), dict(beta=1.4, eta=5.0),
                                dict(beta=1.6)])
def test_horocycle_rejects_bad_parameters(kw):
    args = dict(beta=1.2, theta=0.5, eta=0.5) | kw
    with pytest.raises(ValueError):
        ls.horocycle_mass_experiment((0, 0), TestFunction.hat(), args.pop("beta"), 10.0, 1e-2, "nonlinear",
                                     u_grid=11, **args)


def test_horocycle_rejects_unknown_variant():
    with pytest.raises(ValueError):
        ls.horocycle_mass_experiment((0, 0), TestFunction.hat(), 0.5, 10.0, 0.1, "other")
