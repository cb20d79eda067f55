import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracmin.errors import ConfigError, MissingComparison, TabulationRange
from fracmin.grid import Grid
from fracmin.nonlinearity import (Envelope, NonlinearitySpec, PeriodicCoefficient, SamplePlan,
                                  Tabulation, check_hypotheses, cutoff, cutoff_bounds,
                                  cutoff_split, quadratic_nonlinearity, zero_nonlinearity)

G1 = Grid(1, 40.0, 256, 0.5)
G2 = Grid(2, 20.0, 64, 0.75)


def sqrt_table():
    t = np.linspace(-4, 4, 801)
    return NonlinearitySpec("user_tabulated", table=Tabulation(tuple(t), (tuple(np.sqrt(np.abs(t))),)))


def perturbed():
    return NonlinearitySpec("perturbed_periodic", ell=1.0, sigma=1.0,
                            coefficient=PeriodicCoefficient(1.0, 0.5),
                            envelope=Envelope("gaussian", 1.0, 1.0))


FAMILIES = {
    "pure_power": NonlinearitySpec("pure_power", ell=1.0),
    "weighted_power": NonlinearitySpec("weighted_power", alpha=2.5, p_F1=1.0, delta_F1=0.7),
    "periodic_power": NonlinearitySpec("periodic_power", sigma=1.0,
                                       coefficient=PeriodicCoefficient(1.0, 0.5)),
    "perturbed_periodic": perturbed(),
    "user_tabulated": NonlinearitySpec(
        "user_tabulated",
        table=Tabulation(tuple(np.linspace(-3, 3, 61)),
                         (tuple(np.abs(np.linspace(-3, 3, 61)) ** 3 / 3),))),
}


def test_pure_power_values():
    s = FAMILIES["pure_power"]
    assert s.F(0.0, 2.0) == pytest.approx(8 / 3)
    assert s.F(5.0, -2.0) == pytest.approx(8 / 3)
    assert s.dF(0.0, -2.0) == pytest.approx(-4.0)
    assert s.dF(0.0, 0.0) == 0.0


@pytest.mark.parametrize("name", ["pure_power", "weighted_power", "periodic_power",
                                  "perturbed_periodic"])
@settings(max_examples=30, deadline=None)
@given(x=st.floats(-5, 5), t=st.floats(-3, 3).filter(lambda v: abs(v) > 1e-2))
def test_derivative_matches_difference_quotient(name, x, t):
    spec = FAMILIES[name]
    h = 1e-6
    fd = (spec.F((x,), t + h) - spec.F((x,), t - h)) / (2 * h)
    assert float(spec.dF((x,), t)) == pytest.approx(float(fd), rel=1e-6, abs=1e-8)


def test_periodic_coefficient_has_unit_period():
    a = PeriodicCoefficient(1.0, 0.4)
    x = np.linspace(-2, 2, 17)
    np.testing.assert_allclose(a((x,)), a((x + 1.0,)), atol=1e-12)
    assert a((np.array([0.0]), np.array([0.0])))[0] == pytest.approx(1.4)
    with pytest.raises(ConfigError):
        PeriodicCoefficient(0.1, 0.5)


def test_envelopes():
    assert Envelope("gaussian", 2.0, 1.0)((np.array([1.0]),))[0] == pytest.approx(2 * np.exp(-1))
    assert Envelope("sech", 1.0, 2.0)((np.array([2.0]),))[0] == pytest.approx(1 / np.cosh(1))
    with pytest.raises(ConfigError):
        Envelope("gaussian", -1.0)


def test_tabulation_interpolates_and_guards_range():
    tab = Tabulation((0.0, 1.0, 2.0), ((0.0, 1.0, 4.0),))
    assert tab.F(0.0, 1.5) == pytest.approx(2.5)
    assert tab.dF(0.0, 1.5) == pytest.approx(3.0)
    with pytest.raises(TabulationRange):
        tab.F(0.0, 2.5)
    with pytest.raises(ConfigError):
        Tabulation((0.0, 0.0), ((1.0, 1.0),))


def test_two_dimensional_table():
    tab = Tabulation((0.0, 1.0), ((0.0, 1.0), (0.0, 3.0)), r_nodes=(0.0, 2.0))
    assert tab.F((np.array(1.0),), 1.0) == pytest.approx(2.0)
    with pytest.raises(TabulationRange):
        tab.F((np.array(3.0),), 0.5)


@pytest.mark.parametrize("kwargs,rule", [
    (dict(family="pure_power", ell=1.0, p_F1=2.5), "p ∈ [0,2)"),
    (dict(family="pure_power", ell=1.0, delta_F1=0.0), "delta_F1 > 0"),
    (dict(family="pure_power"), "ell required"),
    (dict(family="magic"), "family"),
    (dict(family="weighted_power"), "alpha required"),
])
def test_invalid_specs_name_the_rule(kwargs, rule):
    with pytest.raises(ConfigError) as exc:
        NonlinearitySpec(**kwargs)
    assert exc.value.rule == rule


def test_bind_rejects_supercritical_and_small_dimension():
    with pytest.raises(ConfigError) as exc:
        NonlinearitySpec("pure_power", ell=3.0).bind(G1)
    assert exc.value.rule == "ell < 4s/N"
    with pytest.raises(ConfigError) as exc:
        NonlinearitySpec("pure_power", ell=0.5).bind(Grid(1, 10.0, 32, 0.75))
    assert exc.value.rule == "N >= 2s"
    assert FAMILIES["pure_power"].bind(G1) is FAMILIES["pure_power"].bind(G1)


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_bound_evaluation_matches_pointwise(name):
    spec = FAMILIES[name]
    g = G2 if name != "user_tabulated" else G1
    b = spec.bind(g)
    t = np.sin(sum(g.coords)) * 2.0
    np.testing.assert_allclose(b.F(t), spec.F(g.coords, t) * np.ones(g.shape), rtol=1e-13)
    np.testing.assert_allclose(b.dF(t), spec.dF(g.coords, t) * np.ones(g.shape), rtol=1e-13)


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_round_trip_serialization(name):
    spec = FAMILIES[name]
    assert NonlinearitySpec.from_dict(spec.to_dict()) == spec


def test_helper_nonlinearities():
    z = zero_nonlinearity()
    assert np.all(z.F((np.array([0.3]),), np.array([1.0, 2.0])) == 0)
    q = quadratic_nonlinearity(0.5)
    assert q.F((np.array([7.0]),), 2.0)[0] == pytest.approx(2.0)


def test_comparison_structure():
    p = perturbed()
    c = p.comparison()
    assert c.family == "periodic_power"
    assert c.F((np.array([0.0]),), 1.0) < p.F((np.array([0.0]),), 1.0)
    assert FAMILIES["pure_power"].comparison() is None
    assert FAMILIES["pure_power"].periodic_part() is FAMILIES["pure_power"]


@settings(max_examples=40, deadline=None)
@given(st.floats(-50, 50))
def test_cutoff_split_bounds(t):
    spec = FAMILIES["pure_power"]
    d1, d2 = cutoff_split(spec, 0.0, t)
    assert float(d1 + d2) == pytest.approx(float(spec.dF(0.0, t)))
    assert 0.0 <= cutoff(t) <= 1.0
    m1, m2 = cutoff_bounds(spec, 0.0, t, 1, 0.5, 1.0)
    assert m1 >= -1e-12 and m2 >= -1e-12


# -- hypothesis verifier ------------------------------------------------------


@pytest.mark.parametrize("ell", [0.1, 0.5, 1.0, 1.9])
def test_pure_power_passes_its_hypotheses(ell):
    rep = check_hypotheses(NonlinearitySpec("pure_power", ell=ell), SamplePlan.default())
    assert rep.passed("F0", "F1", "F2", "F4", "F5")
    assert rep.verdicts["F3"].status == "not_applicable"
    assert rep.verdicts["F6"].status == "not_applicable"
    assert rep.ranges["lattice_sound_only"] is True


def test_pure_power_fitted_constants_are_sharp():
    rep = check_hypotheses(FAMILIES["pure_power"], SamplePlan.default())
    # |t|^3/3 <= A(t^2 + |t|^3) with the best constant 1/3 attained as t grows.
    assert rep.verdicts["F0"].constants["A"] == pytest.approx(1 / 3, rel=1e-2)
    assert rep.verdicts["F0"].constants["A"] <= 1 / 3


def test_perturbed_periodic_passes_all():
    rep = check_hypotheses(perturbed(), SamplePlan.default())
    assert rep.passed(*rep.verdicts), {k: v.detail for k, v in rep.verdicts.items()}
    assert len(rep.verdicts) == 7


def test_square_root_fails_scaling_with_witness():
    rep = check_hypotheses(sqrt_table(), SamplePlan.default(hypotheses=("F2",)))
    v = rep.verdicts["F2"]
    assert v.status == "fail"
    w = v.witness
    t, theta = w["t"], w["theta"]
    # F(theta t) vs theta^2 F(t) evaluated directly from the closed form.
    assert np.sqrt(abs(theta * t)) < theta ** 2 * np.sqrt(abs(t))
    assert w["lhs"] == pytest.approx(np.sqrt(abs(theta * t)), rel=1e-6)
    assert w["rhs"] == pytest.approx(theta ** 2 * np.sqrt(abs(t)), rel=1e-6)


def test_given_constant_too_small_fails():
    spec = NonlinearitySpec("pure_power", ell=1.0, A=0.2)
    v = check_hypotheses(spec, SamplePlan.default(hypotheses=("F0",))).verdicts["F0"]
    assert v.status == "fail" and v.witness is not None


def test_negative_nonlinearity_fails_nonnegativity():
    t = np.linspace(-3, 3, 61)
    spec = NonlinearitySpec("user_tabulated", ell=1.0,
                            table=Tabulation(tuple(t), (tuple(-t ** 2),)))
    v = check_hypotheses(spec, SamplePlan.default(hypotheses=("F0",))).verdicts["F0"]
    assert v.status == "fail"


def test_explicit_request_without_comparison_raises():
    with pytest.raises(MissingComparison):
        check_hypotheses(FAMILIES["pure_power"], SamplePlan.default(hypotheses=("F3",)))


def test_comparison_equal_everywhere_fails_strictness():
    base = NonlinearitySpec("periodic_power", sigma=1.0)
    same = NonlinearitySpec("periodic_power", sigma=1.0, comparison_spec=base)
    v = check_hypotheses(same, SamplePlan.default()).verdicts["F6"]
    assert v.status == "fail"
