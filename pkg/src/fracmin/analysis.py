"""Numerical checks on the minimal-energy map ``c -> I_c``.

Masses are written as ``c`` (so the constraint is ``mass = c**2``).  Splits use
the squared convention ``b = sqrt(c^2 - a^2)`` unless ``split="linear"`` is
requested, in which case ``b = c - a``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .energy import EnergyKernel, energy_value
from .errors import InsufficientScan, PrerequisiteFailed, ProfileOverflow
from .flow import FlowConfig, MinimizerResult, minimize
from .grid import Grid, Profile, dilate, frac_kinetic
from .nonlinearity import NonlinearitySpec

NEGATIVE_WITNESS = "NEGATIVE_WITNESS"
NO_WITNESS = "NO_WITNESS"


# -- dilation ---------------------------------------------------------------


@dataclass
class DilationRow:
    lam: float
    kinetic: float
    potential: float
    energy: float
    kinetic_ratio: float
    kinetic_law_error: float


@dataclass
class DilationReport:
    verdict: str
    best_lambda: float | None
    best_energy: float
    rows: list
    skipped: list
    max_kinetic_law_error: float

    def to_dict(self):
        return {"verdict": self.verdict, "best_lambda": self.best_lambda,
                "best_energy": self.best_energy, "skipped": self.skipped,
                "max_kinetic_law_error": self.max_kinetic_law_error,
                "rows": [r.__dict__ for r in self.rows]}


def dilation_test(spec: NonlinearitySpec, profile: Profile, lambda_ladder, grid: Grid,
                  c2: float | None = None, skip_overflow: bool = False) -> DilationReport:
    """Evaluate ``J`` along ``phi_lambda = lambda^(N/2) phi(lambda x)``.

    The profile is scaled once so that its sample at ``lambda = 1`` has mass
    ``c2``; dilation preserves mass, so every rung sits on the same sphere up
    to sampling error.  Overflowing rungs raise unless ``skip_overflow``.
    """
    kernel = EnergyKernel(spec, grid)
    base = grid.sample(profile)
    scale = 1.0 if c2 is None else math.sqrt(c2 / base.mass)
    k1 = frac_kinetic(base) * scale ** 2
    rows, skipped = [], []
    for lam in lambda_ladder:
        lam = float(lam)
        try:
            phi = dilate(profile, lam, grid)
        except ProfileOverflow:
            if not skip_overflow:
                raise
            skipped.append(lam)
            continue
        u = np.asarray(phi.values) * scale
        kin = kernel.kinetic(u)
        pot = kernel.potential(u)
        ratio = kin / k1 if k1 > 0 else math.nan
        law = abs(ratio / lam ** (2 * grid.s) - 1.0) if k1 > 0 else math.nan
        rows.append(DilationRow(lam, kin, pot, 0.5 * kin - pot, ratio, law))
    neg = [r for r in rows if r.energy < 0]
    best = min(rows, key=lambda r: r.energy) if rows else None
    return DilationReport(
        verdict=NEGATIVE_WITNESS if neg else NO_WITNESS,
        best_lambda=best.lam if best else None,
        best_energy=best.energy if best else math.nan,
        rows=rows,
        skipped=skipped,
        max_kinetic_law_error=max((r.kinetic_law_error for r in rows), default=math.nan),
    )


# -- mass scans -------------------------------------------------------------


def split_mass(c: float, a: float, split: str = "squared") -> float:
    if split == "squared":
        return math.sqrt(c * c - a * a)
    if split == "linear":
        return c - a
    raise ValueError(f"unknown split convention {split!r}")


def required_masses(c_values, a_values, split="squared"):
    """Every mass a subadditivity check over ``(c, a)`` pairs will look up."""
    need = set()
    for c in c_values:
        need.add(float(c))
        for a in a_values:
            if 0 < a < c:
                need.add(float(a))
                need.add(split_mass(c, a, split))
    return sorted(need)


@dataclass
class ScanResult:
    c_values: np.ndarray
    I_values: np.ndarray
    results: list
    I_inf_values: np.ndarray | None = None
    inf_results: list | None = None

    @property
    def converged(self) -> np.ndarray:
        return np.array([r.converged for r in self.results])

    @property
    def inf_converged(self):
        return None if self.inf_results is None else np.array([r.converged for r in self.inf_results])

    def lookup(self, c: float, which: str = "I", interpolate: bool = True):
        """``(value, interpolated_flag, result_or_None)`` for mass ``c``."""
        vals = self.I_values if which == "I" else self.I_inf_values
        res = self.results if which == "I" else self.inf_results
        if vals is None:
            raise InsufficientScan(f"scan has no {which} values")
        cv = self.c_values
        hit = np.flatnonzero(np.abs(cv - c) <= 1e-12 * max(1.0, c))
        if hit.size:
            return float(vals[hit[0]]), False, res[hit[0]]
        if not interpolate:
            raise InsufficientScan(f"mass {c:.6g} not in scan and interpolation disabled")
        if c < cv[0] or c > cv[-1]:
            raise InsufficientScan(f"mass {c:.6g} outside scanned range [{cv[0]:.6g}, {cv[-1]:.6g}]")
        return float(np.interp(c, cv, vals)), True, None

    def continuity(self) -> dict:
        dc = np.diff(self.c_values)
        dI = np.abs(np.diff(self.I_values))
        return {"max_jump": float(dI.max()) if dI.size else 0.0,
                "max_slope": float((dI / dc).max()) if dI.size else 0.0,
                "max_dc": float(dc.max()) if dc.size else 0.0}

    def rows(self):
        for i, c in enumerate(self.c_values):
            row = {"c": float(c), "I_c": float(self.I_values[i]),
                   "converged": bool(self.results[i].converged)}
            if self.I_inf_values is not None:
                row["I_inf_c"] = float(self.I_inf_values[i])
                row["inf_converged"] = bool(self.inf_results[i].converged)
            yield row


def _scan_one(spec, grid, config, c):
    return minimize(spec, grid, replace(config, c2=float(c) ** 2, workers=1))


def mass_scan(spec: NonlinearitySpec, c_values, flow_config: FlowConfig, grid: Grid,
              comparison: NonlinearitySpec | None = None, workers: int | None = None) -> ScanResult:
    """Minimize at every ``c`` (and for ``comparison`` if given).

    Points are independent jobs; results are assembled in ``c`` order, so the
    output does not depend on ``workers``.
    """
    cv = np.asarray(sorted(float(c) for c in c_values))
    if cv.size == 0 or np.any(cv <= 0):
        raise ValueError("c_values must be positive")
    jobs = [(spec, c) for c in cv]
    if comparison is not None:
        jobs += [(comparison, c) for c in cv]
    nw = workers or flow_config.workers
    if nw > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            out = list(pool.map(lambda j: _scan_one(j[0], grid, flow_config, j[1]), jobs))
    else:
        out = [_scan_one(sp, grid, flow_config, c) for sp, c in jobs]
    n = cv.size
    res, inf = out[:n], (out[n:] if comparison is not None else None)
    return ScanResult(cv, np.array([r.energy for r in res]), res,
                      None if inf is None else np.array([r.energy for r in inf]), inf)


# -- subadditivity ----------------------------------------------------------


@dataclass
class InequalityRow:
    c: float
    a: float
    b: float
    lhs: float
    rhs: float
    margin: float
    holds: bool
    kind: str
    interpolated: bool = False


@dataclass
class InequalityReport:
    mode: str
    rows: list
    tolerance: float
    worst_margin: float
    passed: bool
    interpolated: bool
    notes: dict = field(default_factory=dict)

    def to_dict(self):
        return {"mode": self.mode, "tolerance": self.tolerance, "worst_margin": self.worst_margin,
                "passed": self.passed, "interpolated": self.interpolated, "notes": self.notes,
                "rows": [r.__dict__ for r in self.rows]}


def _spread(*results):
    return max((r.spread for r in results if r is not None), default=0.0)


def subadditivity_check(scan: ScanResult, mode: str = "plain", a_values=None, c_values=None,
                        tol: float = 1e-6, split: str = "squared", interpolate: bool = True,
                        margin: float | None = None) -> InequalityReport:
    """Check the splitting inequalities on a scan.

    ``plain``: ``I_c <= I_a + I_b + tol``.
    ``cross``: ``I_c < I_a + I_inf_b - m`` and ``I_c < I_inf_c - m``, where
    ``m`` defaults to twice the largest restart spread among the runs used.
    Reported margins are ``rhs - lhs`` (positive means the inequality holds).
    """
    if mode not in ("plain", "cross"):
        raise ValueError(f"unknown mode {mode!r}")
    cs = scan.c_values if c_values is None else np.asarray(c_values, dtype=float)
    avals = scan.c_values if a_values is None else np.asarray(a_values, dtype=float)
    rows = []
    any_interp = False
    used_m = []
    for c in cs:
        Ic, fc, rc = scan.lookup(float(c), "I", interpolate)
        if mode == "cross":
            Iic, fic, ric = scan.lookup(float(c), "inf", interpolate)
            m = 2.0 * _spread(rc, ric) if margin is None else margin
            used_m.append(m)
            rows.append(InequalityRow(float(c), 0.0, float(c), Ic, Iic, Iic - Ic - m,
                                      Ic < Iic - m, "I_c < I_inf_c", fc or fic))
            any_interp |= fc or fic
        for a in avals:
            if not 0 < a < c:
                continue
            b = split_mass(float(c), float(a), split)
            Ia, fa, ra = scan.lookup(float(a), "I", interpolate)
            if mode == "plain":
                Ib, fb, rb = scan.lookup(b, "I", interpolate)
                rhs = Ia + Ib
                flag = fc or fa or fb
                rows.append(InequalityRow(float(c), float(a), b, Ic, rhs, rhs + tol - Ic,
                                          Ic <= rhs + tol, "I_c <= I_a + I_b", flag))
            else:
                Ib, fb, rb = scan.lookup(b, "inf", interpolate)
                m = 2.0 * _spread(rc, ra, rb) if margin is None else margin
                used_m.append(m)
                rhs = Ia + Ib
                flag = fc or fa or fb
                rows.append(InequalityRow(float(c), float(a), b, Ic, rhs, rhs - m - Ic,
                                          Ic < rhs - m, "I_c < I_a + I_inf_b", flag))
            any_interp |= flag
    worst = min((r.margin for r in rows), default=math.inf)
    notes = {"split": split}
    if mode == "cross":
        notes["strictness_margin"] = max(used_m, default=0.0)
    return InequalityReport(mode, rows, tol if mode == "plain" else 0.0, worst,
                            all(r.holds for r in rows), any_interp, notes)


# -- theta scaling ----------------------------------------------------------


@dataclass
class ThetaReport:
    c: float
    base_energy: float
    rows: list
    passed: bool
    tolerance: float
    base_result: MinimizerResult | None = None

    def to_dict(self):
        return {"c": self.c, "base_energy": self.base_energy, "passed": self.passed,
                "tolerance": self.tolerance, "rows": self.rows}


def theta_scaling_check(spec: NonlinearitySpec, c: float, theta_ladder, flow_config: FlowConfig,
                        grid: Grid, tol: float = 1e-6, use_periodic_part: bool = True) -> ThetaReport:
    """``I_{theta c} <= theta^2 I_c + tol`` for every ``theta`` on the ladder.

    With ``use_periodic_part`` the check runs on the periodic comparison of
    ``spec`` (which is ``spec`` itself for pure and periodic powers).
    """
    target = spec.periodic_part() if use_periodic_part else spec
    if target is None:
        target = spec
    base = minimize(target, grid, replace(flow_config, c2=c * c))
    Ic = base.energy
    if not Ic < 0:
        raise PrerequisiteFailed(f"I_c = {Ic:.6g} is not negative; the scaling test is uninformative")
    rows = []
    for th in theta_ladder:
        th = float(th)
        Ith = Ic if th == 1.0 else minimize(target, grid, replace(flow_config, c2=(th * c) ** 2)).energy
        rhs = th * th * Ic
        rows.append({"theta": th, "I_theta_c": Ith, "theta2_I_c": rhs,
                     "margin": rhs + tol - Ith if th != 1.0 else 0.0,
                     "holds": bool(Ith <= rhs + tol)})
    return ThetaReport(float(c), Ic, rows, all(r["holds"] for r in rows), tol, base)


def theta_vector_check(u, spec: NonlinearitySpec, theta: float, sigma: float | None = None) -> dict:
    """``J(theta u) <= theta^(sigma+2) J(u)`` evaluated directly on ``u``."""
    if sigma is None:
        sigma = spec.sigma if spec.sigma is not None else spec.growth_exponent
    Ju = energy_value(u, spec)
    Jt = energy_value(u * theta, spec)
    rhs = theta ** (sigma + 2.0) * Ju
    return {"theta": float(theta), "sigma": float(sigma), "J_u": Ju, "J_theta_u": Jt,
            "rhs": rhs, "margin": rhs - Jt, "holds": bool(Jt <= rhs + 1e-12 * max(1.0, abs(rhs)))}
