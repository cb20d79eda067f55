"""Built-in nonlinearities F(x, t), their t-derivatives and hypothesis checks.

Families
--------
``pure_power``          ``|t|^(l+2) / (l+2)``
``weighted_power``      ``delta * (1 + |x|^2)^(-p/2) * |t|^alpha``
``periodic_power``      ``a(x) |t|^(sigma+2) / (sigma+2)`` with ``a`` 1-periodic
``perturbed_periodic``  ``periodic_power + g(x) t^2`` with ``g`` decaying
``user_tabulated``      bilinear interpolation of tabulated samples in
                        ``(|x|, t)``; x-independent when no radii are given

Every evaluator is vectorized: ``x`` is an N-tuple of coordinate arrays (or
floats) broadcastable against ``t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .errors import ConfigError, MissingComparison, TabulationRange

FAMILIES = ("pure_power", "weighted_power", "periodic_power", "perturbed_periodic", "user_tabulated")
HYPOTHESES = ("F0", "F1", "F2", "F3", "F4", "F5", "F6")


@dataclass(frozen=True)
class PeriodicCoefficient:
    """``a(x) = base + amplitude * prod_i cos(2 pi x_i)``, period 1 per axis."""

    base: float = 1.0
    amplitude: float = 0.0

    def __post_init__(self):
        if self.base < abs(self.amplitude):
            raise ConfigError("periodic coefficient must be nonnegative",
                              rule="base >= |amplitude|")

    def __call__(self, x):
        if self.amplitude == 0.0:
            return self.base + 0.0 * _radius(x)
        prod = 1.0
        for c in x:
            prod = prod * np.cos(2.0 * np.pi * np.asarray(c))
        return self.base + self.amplitude * prod


@dataclass(frozen=True)
class Envelope:
    """Nonnegative perturbation envelope ``g(x)``.

    ``gaussian``: ``amplitude * exp(-|x|^2 / width^2)``; ``sech``:
    ``amplitude * sech(|x| / width)``; ``constant``: ``amplitude`` everywhere
    (does not decay, so (F3) fails for it; useful as a quadratic test term).
    """

    kind: str = "gaussian"
    amplitude: float = 1.0
    width: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "sech", "constant"):
            raise ConfigError(f"unknown envelope kind {self.kind!r}", rule="envelope kind")
        if self.amplitude < 0:
            raise ConfigError("envelope must be nonnegative", rule="g >= 0")
        if not self.width > 0:
            raise ConfigError("envelope width must be positive", rule="width > 0")

    def __call__(self, x):
        r = _radius(x)
        if self.kind == "gaussian":
            return self.amplitude * np.exp(-(r / self.width) ** 2)
        if self.kind == "sech":
            return self.amplitude / np.cosh(np.minimum(r / self.width, 350.0))
        return self.amplitude + 0.0 * r


@dataclass(frozen=True)
class Tabulation:
    """Samples ``values[i][j] = F(r_i, t_j)``; a single row means x-independent."""

    t_nodes: tuple
    values: tuple
    r_nodes: tuple = ()

    def __post_init__(self):
        t = np.asarray(self.t_nodes, dtype=float)
        vals = np.atleast_2d(np.asarray(self.values, dtype=float))
        if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0):
            raise ConfigError("t_nodes must be strictly increasing", rule="t_nodes increasing")
        rows = len(self.r_nodes) or 1
        if vals.shape != (rows, t.size):
            raise ConfigError(f"table shape {vals.shape} != ({rows}, {t.size})", rule="table shape")
        if self.r_nodes and np.any(np.diff(np.asarray(self.r_nodes, dtype=float)) <= 0):
            raise ConfigError("r_nodes must be strictly increasing", rule="r_nodes increasing")
        object.__setattr__(self, "t_nodes", tuple(map(float, t)))
        object.__setattr__(self, "values", tuple(tuple(map(float, row)) for row in vals))
        object.__setattr__(self, "r_nodes", tuple(map(float, self.r_nodes)))

    @property
    def t_range(self):
        return self.t_nodes[0], self.t_nodes[-1]

    def _interp(self, x, t, deriv):
        tn = np.asarray(self.t_nodes)
        vals = np.asarray(self.values)
        t = np.asarray(t, dtype=float)
        if np.any(t < tn[0]) or np.any(t > tn[-1]):
            raise TabulationRange(f"t outside tabulated range [{tn[0]}, {tn[-1]}]")
        j = np.clip(np.searchsorted(tn, t, side="right") - 1, 0, tn.size - 2)
        dt = tn[j + 1] - tn[j]
        w = (t - tn[j]) / dt
        if len(self.r_nodes) < 2:
            i0 = i1 = 0
            wr = 0.0
        else:
            rn = np.asarray(self.r_nodes)
            r = _radius(x)
            if np.any(r < rn[0]) or np.any(r > rn[-1]):
                raise TabulationRange(f"|x| outside tabulated range [{rn[0]}, {rn[-1]}]")
            r, j, w, dt = np.broadcast_arrays(r, j, w, dt)
            i0 = np.clip(np.searchsorted(rn, r, side="right") - 1, 0, rn.size - 2)
            i1 = i0 + 1
            wr = (r - rn[i0]) / (rn[i1] - rn[i0])
        lo0, lo1 = vals[i0, j], vals[i0, j + 1]
        hi0, hi1 = vals[i1, j], vals[i1, j + 1]
        if deriv:
            return ((lo1 - lo0) * (1 - wr) + (hi1 - hi0) * wr) / dt
        return (lo0 + w * (lo1 - lo0)) * (1 - wr) + (hi0 + w * (hi1 - hi0)) * wr

    def F(self, x, t):
        return self._interp(x, t, False)

    def dF(self, x, t):
        return self._interp(x, t, True)


def _radius(x):
    if np.isscalar(x):
        return np.abs(np.asarray(x, dtype=float))
    return np.sqrt(sum(np.asarray(c, dtype=float) ** 2 for c in x))


def _abs_pow_times(t, e):
    """``|t|^e * t`` with the value 0 at t = 0 for any e > -1."""
    a = np.abs(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(a > 0, a ** e * t, 0.0)
    return out


@dataclass(frozen=True)
class NonlinearitySpec:
    """Parameterized nonlinearity together with its hypothesis constants.

    Constants left as ``None`` are filled by family defaults in
    :meth:`resolved` or fitted by :func:`check_hypotheses`.
    """

    family: str
    ell: float | None = None
    alpha: float | None = None
    beta: float | None = None
    gamma: float | None = None
    sigma: float | None = None
    A: float | None = None
    A_prime: float | None = None
    B: float | None = None
    B_prime: float | None = None
    delta_F1: float | None = None
    p_F1: float = 0.0
    R_F1: float = 1.0
    S_F1: float = 1.0
    coefficient: PeriodicCoefficient = field(default_factory=PeriodicCoefficient)
    envelope: Envelope = field(default_factory=Envelope)
    table: Tabulation | None = None
    comparison_spec: "NonlinearitySpec | None" = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}", rule="family", path="family")
        if not 0.0 <= self.p_F1 < 2.0:
            raise ConfigError(f"p_F1 = {self.p_F1} outside [0, 2)", rule="p ∈ [0,2)", path="p_F1")
        if self.delta_F1 is not None and not self.delta_F1 > 0:
            raise ConfigError("delta_F1 must be positive", rule="delta_F1 > 0", path="delta_F1")
        if not self.R_F1 > 0:
            raise ConfigError("R_F1 must be positive", rule="R_F1 > 0", path="R_F1")
        if not self.S_F1 > 0:
            raise ConfigError("S_F1 must be positive", rule="S_F1 > 0", path="S_F1")
        if self.family == "pure_power" and self.ell is None:
            raise ConfigError("pure_power needs ell", rule="ell required", path="ell")
        if self.family in ("periodic_power", "perturbed_periodic") and self.sigma is None:
            object.__setattr__(self, "sigma", self.ell if self.ell is not None else None)
            if self.sigma is None:
                raise ConfigError(f"{self.family} needs sigma", rule="sigma required", path="sigma")
        if self.family == "weighted_power" and self.alpha is None:
            raise ConfigError("weighted_power needs alpha", rule="alpha required", path="alpha")
        if self.family == "user_tabulated" and self.table is None:
            raise ConfigError("user_tabulated needs a table", rule="table required", path="table")
        for name in ("ell", "alpha", "beta", "gamma", "sigma"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"{name} must be positive", rule=f"{name} > 0", path=name)

    # -- evaluation ---------------------------------------------------------

    def F(self, x, t):
        t = np.asarray(t, dtype=float)
        fam = self.family
        if fam == "pure_power":
            e = self.ell + 2.0
            return np.abs(t) ** e / e
        if fam == "weighted_power":
            w = (1.0 + _radius(x) ** 2) ** (-0.5 * self.p_F1)
            return self._delta * w * np.abs(t) ** self.alpha
        if fam == "periodic_power":
            e = self.sigma + 2.0
            return self.coefficient(x) * np.abs(t) ** e / e
        if fam == "perturbed_periodic":
            e = self.sigma + 2.0
            return self.coefficient(x) * np.abs(t) ** e / e + self.envelope(x) * t * t
        return self.table.F(x, t)

    def dF(self, x, t):
        t = np.asarray(t, dtype=float)
        fam = self.family
        if fam == "pure_power":
            return _abs_pow_times(t, self.ell)
        if fam == "weighted_power":
            w = (1.0 + _radius(x) ** 2) ** (-0.5 * self.p_F1)
            return self._delta * w * self.alpha * _abs_pow_times(t, self.alpha - 2.0)
        if fam == "periodic_power":
            return self.coefficient(x) * _abs_pow_times(t, self.sigma)
        if fam == "perturbed_periodic":
            return self.coefficient(x) * _abs_pow_times(t, self.sigma) + 2.0 * self.envelope(x) * t
        return self.table.dF(x, t)

    @property
    def _delta(self):
        return 1.0 if self.delta_F1 is None else self.delta_F1

    # -- structure ----------------------------------------------------------

    @property
    def growth_exponent(self) -> float | None:
        """Exponent ``l`` with ``F ~ |t|^(l+2)`` at infinity, if known."""
        if self.family == "pure_power":
            return self.ell
        if self.family == "weighted_power":
            return self.alpha - 2.0
        if self.family in ("periodic_power", "perturbed_periodic"):
            return self.sigma if self.ell is None else max(self.ell, self.sigma)
        return self.ell

    def periodic_part(self) -> "NonlinearitySpec | None":
        """The Z^N-periodic function playing the role of F-infinity in (F4), (F5)."""
        if self.comparison_spec is not None:
            return self.comparison_spec
        if self.family in ("pure_power", "periodic_power"):
            return self
        if self.family == "perturbed_periodic":
            return replace(self, family="periodic_power", envelope=Envelope(), comparison_spec=None)
        return None

    def comparison(self) -> "NonlinearitySpec | None":
        """A distinct periodic comparison F-infinity for (F3), (F6) and J-infinity."""
        if self.comparison_spec is not None:
            return self.comparison_spec
        if self.family == "perturbed_periodic":
            return self.periodic_part()
        return None

    def bind(self, grid) -> "BoundNonlinearity":
        """Validate against ``grid`` and precompute coefficient arrays."""
        return _bind(self, grid)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        out = {"family": self.family}
        for name in ("ell", "alpha", "beta", "gamma", "sigma", "A", "A_prime", "B", "B_prime",
                     "delta_F1", "p_F1", "R_F1", "S_F1"):
            v = getattr(self, name)
            if v is not None:
                out[name] = v
        if self.family in ("periodic_power", "perturbed_periodic"):
            out["periodic_coefficient"] = {"base": self.coefficient.base,
                                           "amplitude": self.coefficient.amplitude}
        if self.family == "perturbed_periodic":
            out["perturbation_envelope"] = {"kind": self.envelope.kind,
                                            "amplitude": self.envelope.amplitude,
                                            "width": self.envelope.width}
        if self.table is not None:
            out["table"] = {"t_nodes": list(self.table.t_nodes),
                            "values": [list(r) for r in self.table.values],
                            "r_nodes": list(self.table.r_nodes)}
        if self.comparison_spec is not None:
            out["comparison"] = self.comparison_spec.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "NonlinearitySpec":
        data = dict(data)
        kwargs = {}
        if "periodic_coefficient" in data:
            kwargs["coefficient"] = PeriodicCoefficient(**data.pop("periodic_coefficient"))
        if "perturbation_envelope" in data:
            kwargs["envelope"] = Envelope(**data.pop("perturbation_envelope"))
        if "table" in data:
            t = data.pop("table")
            kwargs["table"] = Tabulation(tuple(t["t_nodes"]), tuple(map(tuple, t["values"])),
                                         tuple(t.get("r_nodes", ())))
        if "comparison" in data:
            kwargs["comparison_spec"] = cls.from_dict(data.pop("comparison"))
        return cls(**data, **kwargs)


def zero_nonlinearity() -> NonlinearitySpec:
    """``F == 0``, expressed as a periodic power with vanishing coefficient."""
    return NonlinearitySpec("periodic_power", sigma=1.0, coefficient=PeriodicCoefficient(0.0, 0.0))


def quadratic_nonlinearity(weight: float = 1.0) -> NonlinearitySpec:
    """``F(x, t) = weight * t^2`` (perturbed periodic with zero power part)."""
    return NonlinearitySpec("perturbed_periodic", sigma=1.0,
                            coefficient=PeriodicCoefficient(0.0, 0.0),
                            envelope=Envelope("constant", amplitude=weight))


class BoundNonlinearity:
    """A spec evaluated against one grid: ``F`` and ``dF`` on node arrays."""

    def __init__(self, spec: NonlinearitySpec, grid):
        self.spec = spec
        self.grid = grid
        x = grid.coords
        fam = spec.family
        self._coef = None
        self._env = None
        self._weight = None
        if fam in ("periodic_power", "perturbed_periodic"):
            self._coef = np.asarray(spec.coefficient(x), dtype=float)
        if fam == "perturbed_periodic":
            self._env = np.asarray(spec.envelope(x), dtype=float)
        if fam == "weighted_power":
            self._weight = spec._delta * (1.0 + grid.radius ** 2) ** (-0.5 * spec.p_F1)

    def F(self, t):
        spec = self.spec
        fam = spec.family
        if fam == "pure_power":
            e = spec.ell + 2.0
            return np.abs(t) ** e / e
        if fam == "weighted_power":
            return self._weight * np.abs(t) ** spec.alpha
        if fam in ("periodic_power", "perturbed_periodic"):
            e = spec.sigma + 2.0
            out = self._coef * np.abs(t) ** e / e
            if self._env is not None:
                out = out + self._env * t * t
            return out
        return spec.table.F(self.grid.coords, t)

    def dF(self, t):
        spec = self.spec
        fam = spec.family
        if fam == "pure_power":
            return _abs_pow_times(t, spec.ell)
        if fam == "weighted_power":
            return self._weight * spec.alpha * _abs_pow_times(t, spec.alpha - 2.0)
        if fam in ("periodic_power", "perturbed_periodic"):
            out = self._coef * _abs_pow_times(t, spec.sigma)
            if self._env is not None:
                out = out + 2.0 * self._env * t
            return out
        return spec.table.dF(self.grid.coords, t)


@lru_cache(maxsize=64)
def _bind(spec: NonlinearitySpec, grid) -> BoundNonlinearity:
    if grid.dim < 2 * grid.s:
        raise ConfigError(f"N = {grid.dim} < 2s = {2 * grid.s}", rule="N >= 2s", path="s")
    ell = spec.growth_exponent
    crit = grid.critical_exponent
    if ell is not None and not ell < crit:
        raise ConfigError(f"growth exponent {ell} is not below 4s/N = {crit}",
                          rule="ell < 4s/N", path="ell")
    return BoundNonlinearity(spec, grid)


def eval_F(spec: NonlinearitySpec, x, t):
    return spec.F(x, t)


def eval_dF(spec: NonlinearitySpec, x, t):
    return spec.dF(x, t)


def cutoff(t):
    """Piecewise-linear cutoff: 1 on ``|t| < 1``, ``2 - |t|`` on ``[1, 2]``, 0 beyond."""
    a = np.abs(np.asarray(t, dtype=float))
    return np.clip(2.0 - a, 0.0, 1.0)


def cutoff_split(spec: NonlinearitySpec, x, t):
    """Split ``dF = d1 + d2`` into its small-amplitude and large-amplitude parts."""
    df = spec.dF(x, t)
    d1 = cutoff(t) * df
    d2 = df - d1
    return d1, d2


def cutoff_bounds(spec: NonlinearitySpec, x, t, dim: int, s: float, A: float):
    """Margins of ``|d1| <= A(1+2^(l+1))|t|`` and ``|d2| <= 2A|t|^(1+4s/N)``.

    Nonnegative entries mean the bound holds at that sample.
    """
    d1, d2 = cutoff_split(spec, x, t)
    a = np.abs(np.asarray(t, dtype=float))
    ell = spec.growth_exponent
    m1 = A * (1.0 + 2.0 ** (ell + 1.0)) * a - np.abs(d1)
    m2 = 2.0 * A * a ** (1.0 + 4.0 * s / dim) - np.abs(d2)
    return m1, m2


# -- hypothesis verification ------------------------------------------------


@dataclass(frozen=True)
class SamplePlan:
    """Finite lattices on which hypotheses are checked.

    Verdicts are lattice-sound only: a pass means no violation was found on
    these samples and no unbounded trend was detected at the lattice edges.
    """

    dim: int
    s: float
    box_length: float
    radii: tuple
    t_values: tuple
    thetas: tuple
    directions: tuple
    hypotheses: tuple = HYPOTHESES
    rtol: float = 1e-12
    f1_slack: float = 1e-12
    edge_slope_tol: float = 1e-2
    f3_tol: float = 1e-6

    @classmethod
    def default(cls, dim=1, s=0.5, box_length=40.0, hypotheses=HYPOTHESES, **kw):
        radii = (0.0,) + tuple(np.logspace(-2, math.log10(0.5 * box_length), 30))
        t = tuple(np.logspace(-6, 3, 181))
        thetas = tuple(np.logspace(0, 2, 21))
        if dim == 1:
            dirs = ((1.0,), (-1.0,))
        else:
            ang = np.linspace(0, 2 * np.pi, 8, endpoint=False)
            dirs = tuple((float(np.cos(a)), float(np.sin(a))) for a in ang)
        return cls(dim, s, box_length, radii, t, thetas, dirs, tuple(hypotheses), **kw)

    @classmethod
    def for_grid(cls, grid, **kw):
        return cls.default(grid.dim, grid.s, grid.box_length, **kw)

    def points(self):
        """Sample points as an N-tuple of arrays of shape (n_radii, n_dirs)."""
        r = np.asarray(self.radii)[:, None]
        d = np.asarray(self.directions)
        return tuple(r * d[None, :, i] for i in range(self.dim))

    def signed_t(self):
        t = np.asarray(self.t_values)
        return np.concatenate([t, -t])


@dataclass
class HypothesisVerdict:
    status: str
    witness: dict | None = None
    detail: str = ""
    constants: dict = field(default_factory=dict)

    def to_dict(self):
        return {"status": self.status, "witness": self.witness, "detail": self.detail,
                "constants": self.constants}


@dataclass
class HypothesisReport:
    verdicts: dict
    ranges: dict

    def passed(self, *names) -> bool:
        return all(self.verdicts[n].status == "pass" for n in names)

    def to_dict(self):
        return {"verdicts": {k: v.to_dict() for k, v in self.verdicts.items()},
                "ranges": self.ranges}


def _witness(x, t, theta=None, **extra):
    w = {"x": [float(c) for c in np.atleast_1d(x)], "t": float(t),
         "theta": None if theta is None else float(theta)}
    w.update({k: float(v) for k, v in extra.items()})
    return w


def _point(X, idx):
    return np.array([c[idx] for c in X])


def _tab_mask(spec, t):
    """Restrict tabulated specs to their t range."""
    if spec.table is None:
        return np.ones_like(t, dtype=bool)
    lo, hi = spec.table.t_range
    return (t >= lo) & (t <= hi)


def _edge_growth(ratio, t_abs, slope_tol, decay=0.9):
    """Detect a ratio that keeps growing toward either end of a log lattice.

    The log-log slope over the last pair of samples is compared with the slope
    two decades further in.  A ratio converging to a finite limit has a slope
    that decays toward the edge; a power-law blow-up keeps it constant.
    ``ratio`` has t on its last axis; returns ``(side, index)`` or None.
    """
    lt = np.log(t_abs)
    with np.errstate(divide="ignore", invalid="ignore"):
        lr = np.log(ratio)
    n = lt.size
    k = min(n - 2, max(1, int(np.searchsorted(lt, lt[0] + 2 * np.log(10.0)))))

    def slope(a, b):
        return (lr[..., b] - lr[..., a]) / (lt[b] - lt[a])

    lo_edge, lo_in = -slope(0, 1), -slope(k, k + 1)
    hi_edge, hi_in = slope(n - 2, n - 1), slope(n - 2 - k, n - 1 - k)
    with np.errstate(invalid="ignore"):
        bad_lo = np.isfinite(lo_edge) & (lo_edge > slope_tol) & (lo_edge >= decay * lo_in)
        bad_hi = np.isfinite(hi_edge) & (hi_edge > slope_tol) & (hi_edge >= decay * hi_in)
    if np.any(bad_lo):
        return "small_t", np.unravel_index(int(np.argmax(bad_lo)), bad_lo.shape)
    if np.any(bad_hi):
        return "large_t", np.unravel_index(int(np.argmax(bad_hi)), bad_hi.shape)
    return None


def _check_growth_bound(spec, X, t, F, low_exp, high_exp, given, name, plan, deriv=False):
    """Shared logic for the two-sided power bounds in (F0) and (F4)."""
    a = np.abs(t)
    denom = a ** low_exp + a ** high_exp
    Fv = spec.dF(tuple(c[..., None] for c in X), t) * np.ones_like(F) if deriv else F
    signed = np.sign(t) * Fv if deriv else Fv
    neg = signed < -plan.rtol * np.maximum(np.abs(signed), 1e-300)
    if np.any(neg):
        i = np.unravel_index(int(np.argmax(neg)), neg.shape)
        return HypothesisVerdict("fail", _witness(_point(X, i[:-1]), t[i[-1]], value=signed[i]),
                                 f"{name}: negative value")
    ratio = signed / denom
    fitted = float(np.max(ratio))
    if given is not None:
        over = ratio > given * (1.0 + plan.rtol)
        if np.any(over):
            i = np.unravel_index(int(np.argmax(ratio - given)), ratio.shape)
            return HypothesisVerdict("fail", _witness(_point(X, i[:-1]), t[i[-1]], lhs=signed[i],
                                                      rhs=given * denom[i[-1]]),
                                     f"{name}: bound with constant {given} violated",
                                     {"fitted": fitted})
    pos = t > 0
    edge = _edge_growth(np.where(ratio[..., pos] > 0, ratio[..., pos], np.nan), a[pos],
                        plan.edge_slope_tol)
    if edge is not None:
        side, i = edge
        tt = a[pos][0] if side == "small_t" else a[pos][-1]
        return HypothesisVerdict("fail", _witness(_point(X, i), tt, ratio=np.nan_to_num(fitted)),
                                 f"{name}: ratio grows without bound toward {side}",
                                 {"fitted": fitted})
    return HypothesisVerdict("pass", None, f"{name}: lattice bound holds", {"fitted": fitted})


def check_hypotheses(spec: NonlinearitySpec, plan: SamplePlan) -> HypothesisReport:
    """Check (F0)-(F6) on the lattices of ``plan``.

    (F0) and (F4): nonnegativity, a fitted (or given) bounding constant and no
    unbounded growth of the bounding ratio at the lattice edges.  The
    derivative condition is read on ``sign(t) * dF`` so that odd
    nonlinearities qualify.
    (F1): lower bound on ``|x| >= R``, ``0 < |t| < S`` plus the exponent window.
    (F2), (F5): scaling inequalities over the theta lattice.
    (F3): decay in |x| of ``sup_t |F - F_inf| / (t^2 + |t|^(beta+2))``.
    (F6): ``F_inf <= F`` everywhere with strict inequality at two or more
    sampled points (a lattice proxy for positive measure).
    """
    X = plan.points()
    t_all = plan.signed_t()
    mask = _tab_mask(spec, t_all)
    t = t_all[mask]
    Xb = tuple(c[..., None] for c in X)
    Fv = np.asarray(spec.F(Xb, t), dtype=float) * np.ones(X[0].shape + t.shape)
    verdicts = {}
    crit = 4.0 * plan.s / plan.dim
    requested = set(plan.hypotheses)
    periodic = spec.periodic_part()
    comparison = spec.comparison()
    ell = spec.growth_exponent if spec.growth_exponent is not None else spec.ell

    if "F0" in requested:
        if ell is None:
            verdicts["F0"] = HypothesisVerdict("not_applicable", None, "no growth exponent ell")
        elif not 0 < ell < crit:
            verdicts["F0"] = HypothesisVerdict("fail", {"rule": "0 < ell < 4s/N", "ell": ell,
                                                        "critical": crit}, "ell out of range")
        else:
            v = _check_growth_bound(spec, X, t, Fv, 2.0, ell + 2.0, spec.A, "F0", plan)
            if v.status == "pass":
                d = _check_growth_bound(spec, X, t, Fv, 1.0, ell + 1.0, spec.A_prime, "F0'",
                                        plan, deriv=True)
                if d.status != "pass":
                    v = d
                else:
                    v.constants = {"A": v.constants["fitted"], "A_prime": d.constants["fitted"]}
            verdicts["F0"] = v

    if "F1" in requested:
        verdicts["F1"] = _check_f1(spec, plan, X, t, Fv)

    if "F2" in requested:
        verdicts["F2"] = _check_scaling(spec, plan, X, t, 2.0, "F2")

    need_cmp = {"F3", "F6"} & requested
    if comparison is None:
        explicit = tuple(plan.hypotheses) != HYPOTHESES
        for name in sorted(need_cmp):
            if explicit:
                raise MissingComparison(f"{name} requested but {spec.family} has no comparison F_inf")
            verdicts[name] = HypothesisVerdict("not_applicable", None, "no comparison F_inf")
    else:
        Fc = np.asarray(comparison.F(Xb, t), dtype=float) * np.ones_like(Fv)
        if "F3" in requested:
            verdicts["F3"] = _check_f3(spec, comparison, plan, X, t, Fv, Fc)
        if "F6" in requested:
            verdicts["F6"] = _check_f6(plan, X, t, Fv, Fc)

    if "F4" in requested:
        if periodic is None:
            verdicts["F4"] = HypothesisVerdict("not_applicable", None, "no periodic part")
        else:
            ell4 = periodic.growth_exponent if spec.ell is None else spec.ell
            gam = spec.gamma if spec.gamma is not None else 0.5 * ell4
            if not 0 < gam < ell4 < crit:
                verdicts["F4"] = HypothesisVerdict("fail", {"rule": "0 < gamma < ell < 4s/N",
                                                            "gamma": gam, "ell": ell4,
                                                            "critical": crit},
                                                   "exponents out of order")
            else:
                Fp = np.asarray(periodic.F(Xb, t), dtype=float) * np.ones_like(Fv)
                v = _check_growth_bound(periodic, X, t, Fp, gam + 2.0, ell4 + 2.0, spec.B, "F4", plan)
                if v.status == "pass":
                    d = _check_growth_bound(periodic, X, t, Fp, gam + 1.0, ell4 + 1.0,
                                            spec.B_prime, "F4'", plan, deriv=True)
                    if d.status != "pass":
                        v = d
                    else:
                        v.constants = {"B": v.constants["fitted"], "B_prime": d.constants["fitted"],
                                       "gamma": gam}
                verdicts["F4"] = v

    if "F5" in requested:
        if periodic is None:
            verdicts["F5"] = HypothesisVerdict("not_applicable", None, "no periodic part")
        else:
            sig = spec.sigma if spec.sigma is not None else periodic.growth_exponent
            if not 0 < sig < crit:
                verdicts["F5"] = HypothesisVerdict("fail", {"rule": "0 < sigma < 4s/N",
                                                            "sigma": sig, "critical": crit},
                                                   "sigma out of range")
            else:
                verdicts["F5"] = _check_scaling(periodic, plan, X, t, sig + 2.0, "F5")

    ranges = {
        "radii": [float(plan.radii[0]), float(plan.radii[-1])],
        "t": [float(np.min(np.abs(t))), float(np.max(np.abs(t)))],
        "theta": [float(plan.thetas[0]), float(plan.thetas[-1])],
        "n_directions": len(plan.directions),
        "lattice_sound_only": True,
    }
    return HypothesisReport({k: verdicts[k] for k in HYPOTHESES if k in verdicts}, ranges)


def _check_f1(spec, plan, X, t, Fv):
    fam = spec.family
    if spec.alpha is not None:
        alpha = spec.alpha
    elif fam == "pure_power":
        alpha = spec.ell + 2.0
    elif fam in ("periodic_power", "perturbed_periodic"):
        alpha = spec.sigma + 2.0
    else:
        return HypothesisVerdict("not_applicable", None, "no alpha for F1")
    p = spec.p_F1
    N = plan.dim
    if not N + 2 * plan.s > 0.5 * N * alpha + p:
        return HypothesisVerdict("fail", {"rule": "N + 2s > (N/2) alpha + p", "lhs": N + 2 * plan.s,
                                          "rhs": 0.5 * N * alpha + p}, "exponent window violated")
    r = np.asarray(plan.radii)
    rsel = r >= spec.R_F1
    tsel = (np.abs(t) < spec.S_F1) & (t != 0)
    if not np.any(rsel) or not np.any(tsel):
        return HypothesisVerdict("not_applicable", None, "empty F1 region on lattice")
    Fr = Fv[rsel][..., tsel]
    rr = r[rsel][:, None, None]
    lower = rr ** (-p) * np.abs(t[tsel]) ** alpha
    ratio = Fr / lower
    fitted = float(np.min(ratio))
    delta = spec.delta_F1 if spec.delta_F1 is not None else fitted
    Xs = tuple(c[rsel] for c in X)
    viol = Fr < delta * lower - plan.f1_slack
    if np.any(viol) or not delta > 0:
        i = np.unravel_index(int(np.argmax(delta * lower - Fr)), Fr.shape)
        return HypothesisVerdict("fail", _witness(_point(Xs, i[:-1]), t[tsel][i[-1]], lhs=Fr[i],
                                                  rhs=delta * lower[i]),
                                 "F1 lower bound violated", {"delta": delta, "alpha": alpha, "p": p})
    # the infimum must not drift to zero at the edges of the region
    tpos = t[tsel] > 0
    edge = _edge_growth(1.0 / ratio[..., tpos], np.abs(t[tsel][tpos]), plan.edge_slope_tol)
    if edge is not None and edge[0] == "small_t":
        i = edge[1]
        return HypothesisVerdict("fail", _witness(_point(Xs, i), np.min(np.abs(t[tsel]))),
                                 "F1 ratio tends to zero as t -> 0", {"delta_fit": fitted})
    if rsel.sum() >= 2:
        rmin = np.min(ratio, axis=(1, 2))
        lr = np.log(np.asarray(r[rsel]))
        slope = (math.log(rmin[-1]) - math.log(rmin[-2])) / (lr[-1] - lr[-2])
        if slope < -plan.edge_slope_tol:
            i = (int(rsel.sum()) - 1, 0)
            return HypothesisVerdict("fail", _witness(_point(Xs, i), np.max(np.abs(t[tsel]))),
                                     "F1 ratio tends to zero as |x| grows", {"delta_fit": fitted})
    return HypothesisVerdict("pass", None, "F1 lower bound holds on lattice",
                             {"delta": delta, "alpha": alpha, "p": p})


def _check_scaling(spec, plan, X, t, power, name):
    """``F(x, theta t) >= theta^power F(x, t)`` on the lattice."""
    th = np.asarray(plan.thetas)
    tt = t[:, None] * th[None, :]
    ok = _tab_mask(spec, tt) & _tab_mask(spec, t)[:, None]
    tt_eval = np.where(ok, tt, t[:, None])
    Xb = tuple(c[..., None, None] for c in X)
    lhs = np.asarray(spec.F(Xb, tt_eval), dtype=float) * np.ones(X[0].shape + tt.shape)
    base = np.asarray(spec.F(tuple(c[..., None] for c in X), t), dtype=float)
    base = base * np.ones(X[0].shape + t.shape)
    rhs = th[None, :] ** power * base[..., None]
    gap = lhs - rhs
    viol = (gap < -plan.rtol * np.maximum(np.abs(rhs), 1e-300)) & ok
    if np.any(viol):
        rel = np.where(viol, gap / np.maximum(np.abs(rhs), 1e-300), 0.0)
        i = np.unravel_index(int(np.argmin(rel)), rel.shape)
        return HypothesisVerdict("fail", _witness(_point(X, i[:-2]), t[i[-2]], th[i[-1]],
                                                  lhs=lhs[i], rhs=rhs[i]),
                                 f"{name}: scaling inequality violated")
    return HypothesisVerdict("pass", None, f"{name}: scaling holds on lattice", {"power": power})


def _check_f3(spec, comparison, plan, X, t, Fv, Fc):
    beta = spec.beta if spec.beta is not None else comparison.growth_exponent
    crit = 4.0 * plan.s / plan.dim
    if not 0 < beta < crit:
        return HypothesisVerdict("fail", {"rule": "0 < beta < 4s/N", "beta": beta, "critical": crit},
                                 "beta out of range")
    a = np.abs(t)
    ratio = np.abs(Fv - Fc) / (a ** 2 + a ** (beta + 2.0))
    sup_r = np.max(ratio, axis=(1, 2))
    half = len(sup_r) // 2
    tail = sup_r[half:]
    scale = max(float(np.max(sup_r)), 1e-300)
    monotone = np.all(np.diff(tail) <= plan.rtol * scale + 1e-300)
    if not monotone or tail[-1] > plan.f3_tol:
        ir = len(sup_r) - 1 if monotone else half + int(np.argmax(np.diff(tail) > 0)) + 1
        flat = ratio[ir].reshape(-1)
        j = int(np.argmax(flat))
        idir, it = np.unravel_index(j, ratio[ir].shape)
        return HypothesisVerdict("fail", _witness(_point(X, (ir, idir)), t[it], ratio=ratio[ir, idir, it]),
                                 "F3: F - F_inf does not decay uniformly in t",
                                 {"sup_by_radius": sup_r.tolist()})
    return HypothesisVerdict("pass", None, "F3: uniform decay on lattice",
                             {"beta": beta, "sup_by_radius": sup_r.tolist()})


def _check_f6(plan, X, t, Fv, Fc):
    scale = np.maximum(np.abs(Fv), np.abs(Fc))
    gap = Fv - Fc
    viol = gap < -plan.rtol * np.maximum(scale, 1e-300)
    if np.any(viol):
        i = np.unravel_index(int(np.argmin(gap)), gap.shape)
        return HypothesisVerdict("fail", _witness(_point(X, i[:-1]), t[i[-1]], lhs=Fc[i], rhs=Fv[i]),
                                 "F6: F_inf exceeds F")
    strict = gap > plan.rtol * np.maximum(scale, 1e-300) + 1e-300
    strict_pts = np.argwhere(np.any(strict, axis=-1))
    if len(strict_pts) < 2:
        i = np.unravel_index(int(np.argmax(gap)), gap.shape)
        return HypothesisVerdict("fail", _witness(_point(X, i[:-1]), t[i[-1]], gap=gap[i]),
                                 "F6: no set of strict inequality found")
    pts = [[float(c[tuple(p)]) for c in X] for p in strict_pts]
    return HypothesisVerdict("pass", None, "F6: F_inf <= F with strict set",
                             {"strict_points": len(pts), "strict_set": pts[:16]})
