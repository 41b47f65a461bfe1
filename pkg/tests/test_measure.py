import math

import numpy as np
import pytest

from zonediag import Box, DomainError, FinitePointSet, Norm, PreconditionError, SiteTuple, Space, build
from zonediag.measure import (
    concentration_report_raster, constant_profile, decay_table, density_check, exit_time,
    growth_factor, radial_profile, radial_volume, raster_cell_volume, ray_T, shell_width,
    sphere_surface, unit_directions,
)
from zonediag.raster import Grid
from zonediag.regions import RegionTuple
from zonediag.zone import iterate


def scan_T(space, p, theta, A, n=20001):
    """End of the feasible interval found by a dense scan of t."""
    cap = exit_time(space.world, p, theta)[0]
    t = np.linspace(0, cap, n)
    x = p + t[:, None] * theta
    ok = t * space.norm.of(theta) <= space.point_to_set(x, A)
    bad = np.nonzero(~ok)[0]
    return (t[-1], t[-1] - t[-2]) if not len(bad) else (t[bad[0] - 1], t[1] - t[0])


def test_sphere_surface():
    assert sphere_surface(2) == pytest.approx(2 * math.pi)
    assert sphere_surface(3) == pytest.approx(4 * math.pi)


def test_ray_two_sites_l2():
    s = Space(Box((-5, -5), (5, 5)))
    assert ray_T(s, [0, 0], np.array([1.0, 0.0]), [[2.0, 0.0]]) == pytest.approx(1.0, abs=1e-9)
    # away from A the ray runs to the box boundary
    assert ray_T(s, [0, 0], np.array([-1.0, 0.0]), [[2.0, 0.0]]) == pytest.approx(5.0)


@pytest.mark.parametrize("norm", list(Norm))
def test_ray_against_dense_scan(norm):
    rng = np.random.default_rng(2)
    s = Space(Box((-3, -3), (3, 3)), norm)
    for _ in range(25):
        A = rng.uniform(-3, 3, (4, 2))
        p = rng.uniform(-2, 2, 2)
        if s.point_to_set(p[None], A)[0] < 0.1:
            continue
        theta = unit_directions(2, 1, rng)
        t, step = scan_T(s, p, theta, A)
        assert abs(ray_T(s, p, theta[0], A) - t) <= step + 1e-9


def test_ray_errors():
    s = Space(Box((0, 0), (1, 1)))
    th = np.array([1.0, 0.0])
    with pytest.raises(DomainError):
        ray_T(s, [0.5, 0.5], th, np.zeros((0, 2)))
    with pytest.raises(DomainError):
        ray_T(s, [2, 2], th, [[0.1, 0.1]])
    with pytest.raises(DomainError):
        ray_T(s, [0.1, 0.1], th, [[0.1, 0.1]])
    with pytest.raises(DomainError):
        ray_T(Space(FinitePointSet([[0.0, 0.0], [1.0, 1.0]])), [0, 0], th, [[1.0, 1.0]])


@pytest.mark.parametrize("m", [2, 3])
def test_constant_profile_ball(m):
    vol, se = radial_volume(constant_profile(1.3, m, 100_000, np.random.default_rng(m)))
    exact = math.pi ** (m / 2) / math.gamma(m / 2 + 1) * 1.3 ** m
    assert vol == pytest.approx(exact, rel=1e-12) and se < 1e-9


def test_radial_volume_needs_samples():
    with pytest.raises(ValueError):
        radial_volume(constant_profile(1, 2, 10, np.random.default_rng(0)))


def test_half_plane_square_cell():
    # the cell of the origin among its four lattice neighbours is the unit l2 square
    s = Space(Box((-3, -3), (3, 3)))
    A = [[1, 0], [-1, 0], [0, 1], [0, -1]]
    vol, se = radial_volume(radial_profile(s, [0, 0], A, 100_000, np.random.default_rng(0)))
    assert abs(vol - 1.0) <= 4 * se + 1e-3


def test_radial_matches_raster_cell():
    s = Space(Box((0, 0), (6, 6)))
    pts = [[[x, y]] for x in range(1, 6) for y in range(1, 6)]
    t = SiteTuple(s, tuple(np.array(p, float) for p in pts))
    g = Grid((0, 0), (6, 6), 601)
    fields = build(s, t, g).site_fields
    k = 12
    vol, _ = radial_volume(radial_profile(s, t[k][0], t.others(k), 100_000, np.random.default_rng(1)))
    ref = raster_cell_volume(g, fields, k)
    assert abs(vol - ref) / ref <= 0.02


def test_constants():
    assert growth_factor(1.0, 1.0, 0.5) == pytest.approx(1 + 1 / 32)
    assert growth_factor(1.0, 2.0, 0.01) == pytest.approx(1.005)
    assert shell_width(1.0, 0.01) == 0.01
    tab = decay_table(1.1)
    assert [m for m, _ in tab] == [2, 3, 4, 5, 6]
    assert all(b < a for (_, a), (_, b) in zip(tab, tab[1:]))


@pytest.fixture(scope="module")
def lattice_zone():
    s = Space(Box((0, 0), (6, 6)))
    pts = [[[x, y]] for x in range(1, 6) for y in range(1, 6)]
    ctx = build(s, pts, Grid((0, 0), (6, 6), 241))
    return iterate(ctx, 200)


def test_concentration_m2(lattice_zone):
    rep = concentration_report_raster(lattice_zone.even_limit, 0.5)
    assert rep.has_interior and rep.passed
    assert rep.ratio <= rep.ratio_bound + rep.ratio_slack
    assert len(rep.csv_lines()) == len(rep.regions) + 1 and "c^-m decay" in rep.text()


def test_concentration_preconditions(lattice_zone):
    R = lattice_zone.even_limit
    with pytest.raises(PreconditionError):
        concentration_report_raster(R, 0.5, rho=0.1)
    with pytest.raises(PreconditionError):
        concentration_report_raster(RegionTuple.of_sites(R.context), 0.5)


def test_no_interior_region(lattice_zone):
    rep = concentration_report_raster(lattice_zone.even_limit, 5.0)
    assert not rep.has_interior and not rep.passed
    assert "not met" in rep.text()


def test_density_check():
    s = Space(Box((0, 0), (6, 6)))
    pts = [[[0.25 + 0.5 * i, 0.25 + 0.5 * j]] for i in range(12) for j in range(12)]
    t = SiteTuple(s, tuple(np.array(p) for p in pts))
    rep = density_check(s.world, t, 1.0, Grid((0, 0), (6, 6), 241))
    assert rep.passed
    sparse = SiteTuple(s, (np.array([[1.0, 1.0]]), np.array([[5.0, 5.0]])))
    assert not density_check(s.world, sparse, 1.0, Grid((0, 0), (6, 6), 61)).ball_ok


def test_ray_bisector_example():
    s = Space(Box((-3, -3), (3, 3)))
    assert ray_T(s, [-1, 0], np.array([1.0, 0.0]), [[1, 0]]) == pytest.approx(1.0, abs=1e-9)
    assert ray_T(s, [-1, 0], np.array([-1.0, 0.0]), [[1, 0]]) == pytest.approx(2.0)
    assert ray_T(s, [-1, 0], np.array([-1.0, 0.0]), [[1, 0]], t_max=0.5) == pytest.approx(0.5)


def test_lattice_rays_bounded_by_ball_radius():
    s = Space(Box((-4, -4), (4, 4)))
    A = np.array([[x, y] for x in range(-4, 5) for y in range(-4, 5) if (x, y) != (0, 0)], float)
    T = ray_T(s, [0, 0], unit_directions(2, 2000, np.random.default_rng(0)), A)
    assert T.max() <= np.sqrt(2) / 2 + 1e-9


def test_scaled_constant_profile():
    vol, _ = radial_volume(constant_profile(2.0, 2, 1000, np.random.default_rng(0)))
    assert vol == pytest.approx(4 * math.pi)


def test_growth_factor_arithmetic():
    assert growth_factor(0.32, 1.0, 1.0) == pytest.approx(1.01)


def test_concentration_needs_two_dimensions():
    s = Space(Box((0,), (6,)))
    ctx = build(s, [[[1.0]], [[3.0]], [[5.0]]], Grid((0,), (6,), 121))
    with pytest.raises(PreconditionError):
        concentration_report_raster(iterate(ctx, 100).even_limit, 0.5)


def test_density_fails_on_thin_slab():
    s = Space(Box((0, 0), (10, 1)))
    t = SiteTuple(s, (np.array([[1.0, 0.0]]), np.array([[9.0, 1.0]])))
    rep = density_check(s.world, t, 1.0, Grid((0, 0), (10, 1), (101, 11)))
    assert not rep.center_ok and not rep.passed
