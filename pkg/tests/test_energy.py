import math

import numpy as np
import pytest
import sympy as sp
from scipy import integrate

from fracmin.energy import (EnergyKernel, el_residual, energy, energy_value, gradient,
                            gradient_bound_ratio, hminus_norm, lagrange_multiplier)
from fracmin.errors import ZeroField
from fracmin.grid import Field, Grid, frac_kinetic, frac_laplacian_apply
from fracmin.nonlinearity import NonlinearitySpec, zero_nonlinearity

from oracles import (bo_half_laplacian, bo_soliton, gaussian_cubic_potential,
                     gaussian_kinetic_torus)

CUBIC = NonlinearitySpec("pure_power", ell=1.0)


def test_gaussian_energy_parts():
    g = Grid(1, 40.0, 512, 0.5)
    u = g.sample(lambda x: 1.3 * np.exp(-x * x))
    r = energy(u, CUBIC)
    assert r.kinetic == pytest.approx(0.5 * gaussian_kinetic_torus(0.5, 40.0, amplitude=1.3), rel=1e-10)
    assert r.potential == pytest.approx(gaussian_cubic_potential(1.3), rel=1e-12)
    assert r.total == pytest.approx(r.kinetic - r.potential, rel=1e-14)
    assert energy_value(u, CUBIC) == pytest.approx(r.total, rel=1e-14)
    assert set(r.to_dict()) >= {"kinetic", "potential", "total", "lambda", "el_residual"}


def test_energy_vanishes_for_zero_field_and_constant_free_field():
    g = Grid(1, 10.0, 64, 0.5)
    assert energy_value(g.zeros(), CUBIC) == 0.0
    assert energy_value(Field(g, np.ones(g.shape)), zero_nonlinearity()) == 0.0


def test_single_mode_multiplier_without_nonlinearity():
    L, k, s = 10.0, 2, 0.4
    g = Grid(1, L, 64, s)
    u = g.sample(lambda x: np.cos(2 * np.pi * k * x / L))
    lam = lagrange_multiplier(u, zero_nonlinearity())
    # grad J = (-Delta)^s u, an eigenfunction, so lambda is the eigenvalue.
    assert lam == pytest.approx((2 * np.pi * k / L) ** (2 * s), rel=1e-12)
    assert el_residual(u, zero_nonlinearity()) < 1e-12


def test_multiplier_undefined_on_zero_field():
    with pytest.raises(ZeroField):
        lagrange_multiplier(Grid(1, 10.0, 32, 0.5).zeros(), CUBIC)


def _random_field(g, rng, scale=1.0):
    # smooth random field: random low modes times an envelope
    vals = rng.standard_normal(g.shape)
    smooth = np.fft.ifftn(np.fft.fftn(vals) * np.exp(-g.xi_norm ** 2)).real
    return Field(g, scale * smooth / np.max(np.abs(smooth)))


def _fd_check(spec, g, seed, pairs=20):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(pairs):
        u = _random_field(g, rng, 1.5)
        v = _random_field(g, rng, 1.0)
        ana = float(np.sum(gradient(u, spec).values * v.values)) * g.cell_volume
        h = 1e-4
        jp = energy_value(u + v * h, spec)
        jm = energy_value(u - v * h, spec)
        fd = (jp - jm) / (2 * h)
        worst = max(worst, abs(ana - fd) / max(abs(ana), 1e-12))
    return worst


@pytest.mark.parametrize("spec", [
    CUBIC,
    NonlinearitySpec("pure_power", ell=0.6),
    NonlinearitySpec("periodic_power", sigma=0.8),
])
def test_gradient_matches_finite_differences(spec):
    assert _fd_check(spec, Grid(1, 20.0, 128, 0.5), 7) <= 1e-5


def test_gradient_in_two_dimensions():
    g = Grid(2, 10.0, 32, 0.75)
    assert _fd_check(NonlinearitySpec("pure_power", ell=1.0), g, 1, pairs=5) <= 1e-5


def test_kernel_agrees_with_field_functions():
    g = Grid(1, 20.0, 128, 0.5)
    u = _random_field(g, np.random.default_rng(0))
    k = EnergyKernel(CUBIC, g)
    assert k.kinetic(u.values) == pytest.approx(frac_kinetic(u), rel=1e-13)
    np.testing.assert_allclose(k.lap(u.values), frac_laplacian_apply(u).values, atol=1e-13)
    assert k.mass(u.values) == pytest.approx(u.mass, rel=1e-14)


def test_hminus_norm_of_constant():
    g = Grid(1, 10.0, 32, 0.5)
    c = Field(g, np.full(g.shape, 2.0))
    # The zero mode carries multiplier 1, so the dual norm equals the L2 norm.
    assert hminus_norm(c) == pytest.approx(math.sqrt(c.mass), rel=1e-13)


def test_gradient_bound_ratio_is_finite_and_positive():
    g = Grid(1, 20.0, 128, 0.5)
    u = _random_field(g, np.random.default_rng(5))
    r = gradient_bound_ratio(u, CUBIC)
    assert 0 < r < 10


# -- soliton oracle ------------------------------------------------------------


def test_soliton_closed_form_symbolically():
    x = sp.symbols("x", real=True)
    Q = 2 / (1 + x ** 2)
    # (-Delta)^(1/2) = H d/dx with H[1/(1+x^2)] = x/(1+x^2).
    half_lap = sp.diff(2 * x / (1 + x ** 2), x)
    assert sp.simplify(half_lap - (2 * (1 - x ** 2) / (1 + x ** 2) ** 2)) == 0
    # Q solves (-Delta)^(1/2) Q + Q = Q^2, i.e. lambda = -1 for F = |t|^3/3.
    assert sp.simplify(half_lap + Q - Q ** 2) == 0
    assert sp.integrate(Q ** 2, (x, -sp.oo, sp.oo)) == 2 * sp.pi


def test_hilbert_transform_of_lorentzian_numerically():
    # principal value (1/pi) p.v. int f(y) / (x - y) dy for f = 1/(1+y^2)
    for x0 in (0.3, 1.7):
        val, _ = integrate.quad(lambda y: 1 / (1 + y * y), -200, 200, weight="cauchy", wvar=x0)
        tail = 2 * x0 / 200 ** 2  # both far tails, leading order
        assert -val / np.pi == pytest.approx(x0 / (1 + x0 * x0), abs=2e-5 + tail)


@pytest.mark.parametrize("L,M,res_tol", [(80.0, 2048, 5e-3), (320.0, 8192, 6e-4)])
def test_soliton_satisfies_discrete_equation(L, M, res_tol):
    g = Grid(1, L, M, 0.5)
    Q = g.sample(bo_soliton)
    r = energy(Q, CUBIC)
    assert r.lambda_ == pytest.approx(-1.0, abs=2e-3)
    assert r.el_residual < res_tol
    err = np.max(np.abs(frac_laplacian_apply(Q).values - bo_half_laplacian(g.axis)))
    assert err < 40.0 / L ** 2


def test_tabulated_gradient_between_nodes():
    from fracmin.nonlinearity import Tabulation
    nodes = np.linspace(-4, 4, 81)
    spec = NonlinearitySpec("user_tabulated", table=Tabulation(tuple(nodes), (tuple(nodes ** 4 / 4),)))
    g = Grid(1, 20.0, 64, 0.5)
    rng = np.random.default_rng(8)
    # values at segment midpoints so a small probe never crosses a node
    u = Field(g, rng.choice(nodes[:-1] + 0.05, g.shape) * 0.5)
    v = Field(g, rng.uniform(-1, 1, g.shape))
    ana = g.cell_volume * float(np.sum(gradient(u, spec).values * v.values))
    h = 1e-4
    fd = (energy_value(u + v * h, spec) - energy_value(u - v * h, spec)) / (2 * h)
    assert ana == pytest.approx(fd, rel=1e-8)
