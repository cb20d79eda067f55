"""Normalized gradient flow on the mass sphere.

Each iteration takes ``v = normalize(u - tau * grad J(u))`` and shrinks ``tau``
until ``J(v) < J(u)``; accepted steps grow ``tau`` again.  Restarts are
independent trajectories seeded from one global seed and merged by lowest
energy, ties broken by lowest residual and then by restart index.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .energy import EnergyKernel, EnergyReport, energy, gradient_bound_ratio
from .errors import ConfigError, DivergentEnergy, NonConvergence, ProfileOverflow
from .grid import Field, Grid, Profile, dilate
from .nonlinearity import NonlinearitySpec

log = logging.getLogger(__name__)

INIT_STRATEGIES = ("gaussian_dilation_scan", "random_bump", "warm_start")
DILATION_LADDER = tuple(2.0 ** np.arange(-4.0, 3.5, 0.5))
TIE_TOL = 1e-12


@dataclass(frozen=True)
class FlowConfig:
    c2: float
    step_init: float = 1.0
    backtrack_factor: float = 0.5
    step_growth: float = 1.5
    max_iters: int = 50_000
    el_tol: float = 1e-6
    restarts: int = 1
    seed: int = 0
    init_strategy: str = "gaussian_dilation_scan"
    warm_start: Field | None = field(default=None, compare=False)
    energy_floor: float = -1e8
    workers: int = 1
    raise_on_nonconvergence: bool = False
    snapshot_every: int = 0

    def __post_init__(self):
        checks = [
            (self.c2 > 0, "c2 > 0", "c2"),
            (self.step_init > 0, "step_init > 0", "step_init"),
            (0 < self.backtrack_factor < 1, "backtrack_factor in (0,1)", "backtrack_factor"),
            (self.step_growth >= 1, "step_growth >= 1", "step_growth"),
            (self.max_iters >= 0, "max_iters >= 0", "max_iters"),
            (self.el_tol > 0, "el_tol > 0", "el_tol"),
            (self.restarts >= 1, "restarts >= 1", "restarts"),
            (self.workers >= 1, "workers >= 1", "workers"),
            (self.snapshot_every >= 0, "snapshot_every >= 0", "snapshot_every"),
            (self.init_strategy in INIT_STRATEGIES, "init_strategy known", "init_strategy"),
        ]
        for ok, rule, path in checks:
            if not ok:
                raise ConfigError(f"invalid flow config: {path}={getattr(self, path)!r}",
                                  rule=rule, path=path)
        if self.init_strategy == "warm_start" and self.warm_start is None:
            raise ConfigError("warm_start strategy needs a field", rule="warm_start given",
                              path="warm_start")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "c2", "step_init", "backtrack_factor", "step_growth", "max_iters", "el_tol",
            "restarts", "seed", "init_strategy", "energy_floor", "workers")}


@dataclass
class Trajectory:
    u: np.ndarray
    energy_trace: np.ndarray
    hs_trace: np.ndarray
    residual_trace: np.ndarray
    iterations: int
    converged: bool
    stalled: bool
    lam: float
    residual: float
    restart: int
    snapshots: list = field(default_factory=list)


@dataclass
class MinimizerResult:
    u_star: Field
    report: EnergyReport
    iterations: int
    energy_trace: np.ndarray
    hs_trace: np.ndarray
    residual_trace: np.ndarray
    converged: bool
    restart_energies: list
    restart_residuals: list
    best_restart: int
    stalled: bool = False
    snapshots: list = field(default_factory=list)

    @property
    def energy(self) -> float:
        return self.report.total

    @property
    def spread(self) -> float:
        """Energy spread across restarts, a proxy for solver uncertainty."""
        e = np.asarray(self.restart_energies)
        return float(e.max() - e.min())

    def summary(self) -> dict:
        return {
            "energy": self.report.total,
            "iterations": self.iterations,
            "converged": self.converged,
            "stalled": self.stalled,
            "best_restart": self.best_restart,
            "restart_energies": list(map(float, self.restart_energies)),
            "restart_residuals": list(map(float, self.restart_residuals)),
            "spread": self.spread,
            "report": self.report.to_dict(),
        }


def _normalize(u, kernel, c2):
    return u * math.sqrt(c2 / kernel.mass(u))


def _dilation_seed(kernel: EnergyKernel, grid: Grid, c2: float):
    """Centered Gaussian dilations over the ladder, sorted by energy."""
    out = []
    for lam in DILATION_LADDER:
        try:
            phi = dilate(Profile("gaussian"), float(lam), grid)
        except ProfileOverflow:
            continue
        u = _normalize(np.asarray(phi.values), kernel, c2)
        out.append((kernel.energy(u), float(lam), u))
    out.sort(key=lambda item: (item[0], item[1]))
    return out


def _initial(kernel, grid, config, restart):
    rng = np.random.default_rng([config.seed, restart])
    c2 = config.c2
    if config.init_strategy == "warm_start":
        ws = config.warm_start
        if ws.grid != grid:
            raise ConfigError("warm start lives on a different grid", rule="same grid",
                              path="warm_start")
        u = np.array(ws.values, dtype=float)
        if restart:
            u = u * (1.0 + 0.05 * rng.standard_normal(grid.shape))
        return _normalize(u, kernel, c2)
    if config.init_strategy == "gaussian_dilation_scan":
        if restart == 0:
            return _dilation_seed(kernel, grid, c2)[0][2]
        cands = _dilation_seed(kernel, grid, c2)
        pick = cands[int(rng.integers(min(3, len(cands))))][2]
        cells = rng.integers(-grid.points_per_dim // 8, grid.points_per_dim // 8 + 1, grid.dim)
        pick = np.roll(pick, tuple(int(k) for k in cells), axis=tuple(range(grid.dim)))
        return _normalize(pick * (1.0 + 0.05 * rng.standard_normal(grid.shape)), kernel, c2)
    L = grid.box_length
    center = rng.uniform(-L / 4, L / 4, grid.dim)
    width = rng.uniform(1.0, max(1.0, L / 8))
    prof = Profile("gaussian", width=width, center=tuple(center))
    u = np.asarray(grid.sample(prof).values)
    u = u + 0.05 * np.max(u) * np.abs(rng.standard_normal(grid.shape))
    return _normalize(u, kernel, c2)


def _run(kernel: EnergyKernel, config: FlowConfig, u0: np.ndarray, restart: int) -> Trajectory:
    c2 = config.c2
    u = u0
    Ju = kernel.energy(u)
    tau = config.step_init
    tau_min = 1e-16 * config.step_init
    tau_max = 1e6 * config.step_init
    energies, hs, residuals = [Ju], [], []
    g = kernel.gradient(u)
    lam, res = kernel.diagnostics(u, g)
    hs.append(math.sqrt(c2 + kernel.kinetic(u)))
    residuals.append(res)
    converged = res <= config.el_tol
    stalled = False
    it = 0
    every = config.snapshot_every
    snaps = [u] if every else []
    while not converged and it < config.max_iters:
        while True:
            v = _normalize(u - tau * g, kernel, c2)
            Jv = kernel.energy(v)
            if Jv < Ju:
                break
            tau *= config.backtrack_factor
            if tau < tau_min:
                stalled = True
                break
        if stalled:
            break
        if Jv < config.energy_floor:
            raise DivergentEnergy(f"J = {Jv:.6g} fell below the floor {config.energy_floor:.6g}")
        u, Ju = v, Jv
        tau = min(tau * config.step_growth, tau_max)
        it += 1
        g = kernel.gradient(u)
        lam, res = kernel.diagnostics(u, g)
        energies.append(Ju)
        hs.append(math.sqrt(c2 + kernel.kinetic(u)))
        residuals.append(res)
        converged = res <= config.el_tol
        if every and it % every == 0:
            snaps.append(u)
    return Trajectory(u, np.asarray(energies), np.asarray(hs), np.asarray(residuals), it,
                      converged, stalled, lam, res, restart, snaps)


def _select(trajs):
    """Lowest energy; energies within TIE_TOL tie and the lower residual wins."""
    best = trajs[0]
    for t in trajs[1:]:
        e_b, e_t = best.energy_trace[-1], t.energy_trace[-1]
        tol = TIE_TOL * max(1.0, abs(e_b))
        if e_t < e_b - tol or (abs(e_t - e_b) <= tol and t.residual < best.residual):
            best = t
    return best


def minimize(spec: NonlinearitySpec, grid: Grid, config: FlowConfig) -> MinimizerResult:
    """Approximate ``inf J`` on the sphere ``{mass = c2}``.

    Raises :class:`NonConvergence` (carrying the result) only when
    ``config.raise_on_nonconvergence`` is set; otherwise the result is flagged.
    """
    kernel = EnergyKernel(spec, grid)
    inits = [_initial(kernel, grid, config, k) for k in range(config.restarts)]

    def job(k):
        return _run(kernel, config, inits[k], k)

    if config.workers > 1 and config.restarts > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            trajs = list(pool.map(job, range(config.restarts)))
    else:
        trajs = [job(k) for k in range(config.restarts)]

    best = _select(trajs)
    u_star = Field(grid, best.u)
    result = MinimizerResult(
        u_star=u_star,
        report=energy(u_star, spec),
        iterations=best.iterations,
        energy_trace=best.energy_trace,
        hs_trace=best.hs_trace,
        residual_trace=best.residual_trace,
        converged=best.converged,
        restart_energies=[float(t.energy_trace[-1]) for t in trajs],
        restart_residuals=[float(t.residual) for t in trajs],
        best_restart=best.restart,
        stalled=best.stalled,
        snapshots=[Field(grid, v) for v in best.snapshots],
    )
    if not result.converged:
        msg = (f"residual {best.residual:.3e} above tolerance {config.el_tol:.1e} "
               f"after {best.iterations} iterations")
        log.warning(msg)
        if config.raise_on_nonconvergence:
            raise NonConvergence(msg, result=result)
    return result


@dataclass(frozen=True)
class Certification:
    monotone_energy: bool
    converged: bool
    el_residual: float
    lambda_: float
    hs_sup: float
    hs_initial: float
    hs_growth: float
    mass_error: float
    gradient_bound_ratio: float

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["lambda"] = d.pop("lambda_")
        return d


def certify(result: MinimizerResult, spec: NonlinearitySpec, c2: float | None = None) -> Certification:
    """Bundle the convergence certificate of a flow run."""
    e = result.energy_trace
    mono = bool(np.all(np.diff(e) <= 0.0))
    target = result.report.mass if c2 is None else c2
    hs = result.hs_trace
    return Certification(
        monotone_energy=mono,
        converged=result.converged,
        el_residual=result.report.el_residual,
        lambda_=result.report.lambda_,
        hs_sup=float(np.max(hs)),
        hs_initial=float(hs[0]),
        hs_growth=float(np.max(hs) / hs[0]),
        mass_error=abs(result.report.mass - target) / target,
        gradient_bound_ratio=gradient_bound_ratio(result.u_star, spec),
    )
