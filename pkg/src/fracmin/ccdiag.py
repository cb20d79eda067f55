"""Concentration diagnostics for sequences of fields of equal mass.

The classifier works on a finite sequence, so every "limit" is a trend read
off the second half of the sequence.  Ball masses use the torus metric.

Decision order:

1. ``vanishing``: at every radius on the ladder the excess ball mass (above
   what a uniform field would put in the ball) is nonincreasing over the last
   half, and on the lower half of the ladder it ends below the smallest
   epsilon or at most half its mid-sequence value.  Large balls lose mass
   late, so only the small ones are required to show the decay.
2. ``compactness``: for every epsilon some radius captures ``c^2 - eps`` in
   every field of the sequence.
3. ``dichotomy``: ball mass at the saturation radius is stable over the last
   half at a value ``a^2`` strictly between ``eps`` and ``c^2 - eps``, and
   :func:`split_sequence` realizes that split within ``eps``.

Anything else raises :class:`Inconclusive` with the collected tables.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import Inconclusive, RadiusOrder, RadiusTooLarge
from .grid import Field, Grid, Profile, dilate, fractional_constant, frac_kinetic, translate

VANISHING, DICHOTOMY, COMPACTNESS = "vanishing", "dichotomy", "compactness"


# -- elementary operations --------------------------------------------------


def _ball_kernel(grid: Grid, R: float) -> np.ndarray:
    """Indicator of the periodic ball of radius R around node 0 (FFT layout)."""
    M, h = grid.points_per_dim, grid.spacing
    k = np.fft.fftfreq(M, d=1.0 / M) * h
    mesh = np.meshgrid(*([k] * grid.dim), indexing="ij")
    r2 = sum(m * m for m in mesh)
    return (r2 <= R * R * (1 + 1e-12)).astype(float)


def ball_masses(u: Field, R: float) -> np.ndarray:
    """Mass of ``u`` in the ball ``B(x_j, R)`` for every node ``x_j``."""
    g = u.grid
    if not R > 0:
        raise RadiusOrder(f"radius must be positive, got {R}")
    if R > 0.5 * g.box_length:
        raise RadiusTooLarge(f"R = {R:.6g} exceeds L/2 = {0.5 * g.box_length:.6g}")
    dens = g.cell_volume * np.asarray(u.values) ** 2
    ker = _ball_kernel(g, R)
    q = np.fft.ifftn(np.fft.fftn(dens) * np.conj(np.fft.fftn(ker))).real
    return np.clip(q, 0.0, None)


def concentration_function(u: Field, R: float):
    """``(Q(R), y_star)``: the largest mass in a ball of radius R and its center.

    Ties within roundoff go to the smallest lexicographic node index.
    """
    q = ball_masses(u, R)
    qmax = float(q.max())
    flat = q.reshape(-1)
    idx = int(np.flatnonzero(flat >= qmax - 1e-12 * max(qmax, 1e-300))[0])
    multi = np.unravel_index(idx, q.shape)
    y = u.grid.axis[np.asarray(multi)]
    return min(qmax, u.mass), y


def _smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def cutoffs(grid: Grid, y, R0: float, Rn: float):
    """Inner and outer C^1 radial cutoffs around ``y``."""
    if not (0 < 2 * R0 < Rn):
        raise RadiusOrder(f"need 0 < 2*R0 < Rn, got R0={R0}, Rn={Rn}")
    if 2 * Rn > 0.5 * grid.box_length:
        raise RadiusOrder(f"need 2*Rn <= L/2, got Rn={Rn}, L={grid.box_length}")
    d = grid.torus_distance(y)
    inner = 1.0 - _smoothstep((d - R0) / R0)
    outer = _smoothstep((d - Rn) / Rn)
    return inner, outer


def split_sequence(u: Field, y, R0: float, Rn: float):
    """``(v, w)``: ``v = u`` on ``B(y, R0)``, zero beyond ``2 R0``; ``w = 0`` on
    ``B(y, Rn)``, ``w = u`` beyond ``2 Rn``."""
    inner, outer = cutoffs(u.grid, y, R0, Rn)
    vals = np.asarray(u.values)
    return u.with_values(inner * vals), u.with_values(outer * vals)


def annulus_mass(u: Field, y, R0: float, Rn: float) -> float:
    """Mass of ``u`` on ``R0 < |x-y| < 2R0`` and ``Rn < |x-y| < 2Rn``."""
    d = u.grid.torus_distance(y)
    sel = ((d > R0) & (d < 2 * R0)) | ((d > Rn) & (d < 2 * Rn))
    return float(u.grid.cell_volume * np.sum(np.asarray(u.values)[sel] ** 2))


def _kin_inner(a: Field, b: Field) -> float:
    g = a.grid
    fa, fb = np.fft.fftn(a.values), np.fft.fftn(b.values)
    return float(g.cell_volume / g.size * np.sum(g.symbol * (fa * np.conj(fb)).real))


@dataclass
class SurplusReport:
    surplus: float
    epsilon: float
    interaction: float
    remainder_kinetic: float
    kernel_estimate: float
    separation: float
    holds: bool

    def to_dict(self):
        return dict(self.__dict__)


def kinetic_surplus(u: Field, v: Field, w: Field, separation: float | None = None) -> SurplusReport:
    """``K(u) - K(v) - K(w)`` with its lower bound ``-2 eps``.

    With ``r = u - v - w`` the surplus equals
    ``K(r) + 2<r, v+w>_K + 2<v, w>_K``, so Cauchy-Schwarz gives the bound for
    ``eps = |<v, w>_K| + sqrt(K(r) K(v+w))``.  ``kernel_estimate`` is the a
    priori bound ``C_{N,s} |v|_1 |w|_1 / dist^(N+2s)`` on the interaction for
    disjointly supported pieces, which shrinks as the pieces separate.
    """
    g = u.grid
    r = u - v - w
    K = frac_kinetic
    surplus = K(u) - K(v) - K(w)
    inter = _kin_inner(v, w)
    kr = K(r)
    eps = abs(inter) + math.sqrt(max(kr, 0.0) * max(K(v + w), 0.0))
    est = math.nan
    if separation is not None and separation > 0:
        l1 = lambda f: g.cell_volume * float(np.sum(np.abs(f.values)))
        est = fractional_constant(g.dim, g.s) * l1(v) * l1(w) / separation ** (g.dim + 2 * g.s)
    return SurplusReport(surplus, eps, inter, kr, est,
                         math.nan if separation is None else float(separation),
                         surplus >= -2.0 * eps * (1 + 1e-12) - 1e-14)


def recenter(u: Field, y) -> Field:
    """Shift by the integer vector ``z = floor(y)`` so the point ``y`` lands in
    ``[0, 1)^N``; integer shifts keep Z^N-periodic coefficients invariant."""
    z = np.floor(np.atleast_1d(np.asarray(y, dtype=float)))
    if not np.any(z):
        return u
    return translate(u, -z)


# -- sequences and classification -------------------------------------------


@dataclass
class FieldSequence:
    fields: list
    rtol: float = 1e-8

    def __post_init__(self):
        if not self.fields:
            raise ValueError("empty field sequence")
        g = self.fields[0].grid
        if any(f.grid != g for f in self.fields):
            raise ValueError("fields live on different grids")
        m0 = self.fields[0].mass
        for i, f in enumerate(self.fields):
            if abs(f.mass - m0) > self.rtol * m0:
                raise ValueError(f"field {i} has mass {f.mass:.12g}, expected {m0:.12g}")

    @property
    def grid(self) -> Grid:
        return self.fields[0].grid

    @property
    def c2(self) -> float:
        return self.fields[0].mass

    def __len__(self):
        return len(self.fields)

    def __iter__(self):
        return iter(self.fields)


@dataclass
class CCClassification:
    verdict: str
    epsilon: float
    centers: list
    radii: dict
    a2: float | None = None
    surplus: float | None = None
    split_masses: tuple | None = None
    witnesses: dict = field(default_factory=dict)

    def to_dict(self):
        return {"verdict": self.verdict, "epsilon": self.epsilon, "a2": self.a2,
                "centers": [list(map(float, c)) for c in self.centers], "radii": self.radii,
                "surplus": self.surplus, "split_masses": self.split_masses,
                "witnesses": self.witnesses}


def default_radii(grid: Grid, count: int = 12):
    lo = 4 * grid.spacing
    hi = 0.125 * grid.box_length
    return tuple(float(r) for r in np.geomspace(lo, hi, count))


def _uniform_fraction(grid: Grid, R: float) -> float:
    return float(_ball_kernel(grid, R).sum()) / grid.size


def concentration_table(seq: FieldSequence, radii):
    """``Q[n, k]`` and centers ``Y[n][k]`` for every field and radius."""
    Q = np.empty((len(seq), len(radii)))
    Y = []
    for n, u in enumerate(seq):
        row = []
        for k, R in enumerate(radii):
            Q[n, k], y = concentration_function(u, R)
            row.append(y)
        Y.append(row)
    return Q, Y


def _best_split(u: Field, y, R_floor: float, Lq: float):
    """Pick ``(R0, Rn)`` with ``R0 >= R_floor``: among splits whose annulus
    mass is within roundoff of the smallest found, take the widest gap
    ``Rn - 2 R0``."""
    cands = []
    for R0 in np.geomspace(max(R_floor, 1e-9), 0.4 * Lq, 16):
        for Rn in np.linspace(2.02 * R0, Lq, 24):
            if Rn > 2 * R0:
                cands.append((annulus_mass(u, y, R0, Rn), float(R0), float(Rn)))
    if not cands:
        return None, None
    floor = min(c[0] for c in cands) + 1e-10 * u.mass
    ok = [c for c in cands if c[0] <= floor]
    _, R0, Rn = max(ok, key=lambda c: (c[2] - 2 * c[1], -c[1]))
    return R0, Rn


def classify(seq: FieldSequence, eps_ladder=None, radii=None, monotone_tol: float = 1e-9):
    """Classify a finite sequence as vanishing, compactness or dichotomy.

    ``eps_ladder`` values are absolute masses; the default is
    ``c^2 * (0.1, 0.03, 0.01)``.
    """
    if not isinstance(seq, FieldSequence):
        seq = FieldSequence(list(seq))
    n = len(seq)
    if n < 4:
        raise Inconclusive(f"sequence of length {n} is too short (need >= 4)", {"length": n})
    g, c2 = seq.grid, seq.c2
    eps = tuple(sorted((c2 * e for e in (0.1, 0.03, 0.01)) if eps_ladder is None else eps_ladder,
                       reverse=True))
    if any(e <= 0 for e in eps):
        raise ValueError("eps_ladder must be positive")
    e_min = eps[-1]
    radii = tuple(sorted(default_radii(g) if radii is None else radii))
    Q, Y = concentration_table(seq, radii)
    floor = np.array([_uniform_fraction(g, R) for R in radii]) * c2
    half = n // 2
    tail = slice(half, n)
    witnesses = {"radii": list(radii), "Q": Q.tolist(), "uniform_floor": floor.tolist()}

    # vanishing
    excess = np.clip(Q - floor[None, :], 0.0, None)
    ex_tail = excess[tail]
    nonincreasing = np.all(np.diff(ex_tail, axis=0) <= monotone_tol * c2, axis=0)
    decays = (ex_tail[-1] <= e_min) | (ex_tail[-1] <= 0.5 * ex_tail[0])
    decays[(len(radii) + 1) // 2:] = True
    witnesses["vanishing"] = {"nonincreasing": nonincreasing.tolist(), "decays": decays.tolist(),
                              "final_excess": ex_tail[-1].tolist()}
    if np.all(nonincreasing & decays):
        k = len(radii) - 1
        return CCClassification(VANISHING, e_min, [Y[i][k] for i in range(n)],
                                {"ladder": list(radii)}, witnesses=witnesses)

    # compactness
    R_eps = {}
    for e in eps:
        ok = np.all(Q >= c2 - e, axis=0)
        R_eps[e] = float(radii[int(np.argmax(ok))]) if ok.any() else None
    witnesses["compactness"] = {f"{e:.6g}": r for e, r in R_eps.items()}
    if all(r is not None for r in R_eps.values()):
        k = radii.index(R_eps[e_min])
        return CCClassification(COMPACTNESS, e_min, [Y[i][k] for i in range(n)],
                                {"R_eps": {f"{e:.6g}": r for e, r in R_eps.items()}}, witnesses=witnesses)

    # dichotomy
    sat = Q[tail, -1]
    if sat.max() - sat.min() > e_min:
        raise Inconclusive("ball mass does not stabilize over the last half", witnesses)
    reached = np.all(Q[tail] >= sat[:, None] - 0.5 * e_min, axis=0)
    k_star = int(np.argmax(reached))
    a2 = float(np.median(Q[tail, k_star]))
    witnesses["dichotomy"] = {"saturation_radius": radii[k_star], "tail_masses": Q[tail, k_star].tolist()}
    if not e_min < a2 < c2 - e_min:
        raise Inconclusive(f"stabilized ball mass {a2:.6g} is not a proper split of {c2:.6g}",
                           witnesses)
    u_last = seq.fields[-1]
    y = Y[-1][k_star]
    R0, Rn = _best_split(u_last, y, radii[k_star] / 2.0, 0.25 * g.box_length)
    if R0 is None:
        raise Inconclusive("no admissible split radii", witnesses)
    v, w = split_sequence(u_last, y, R0, Rn)
    mv, mw = v.mass, w.mass
    witnesses["split"] = {"R0": R0, "Rn": Rn, "mass_v": mv, "mass_w": mw,
                          "annulus_mass": annulus_mass(u_last, y, R0, Rn)}
    if abs(mv - a2) > e_min or abs(mw - (c2 - a2)) > e_min:
        raise Inconclusive("split masses do not match the stabilized ball mass", witnesses)
    rep = kinetic_surplus(u_last, v, w, separation=Rn - 2 * R0)
    witnesses["surplus"] = rep.to_dict()
    return CCClassification(DICHOTOMY, e_min, [Y[i][k_star] for i in range(n)],
                            {"R0": R0, "Rn": Rn}, a2=a2, surplus=rep.surplus,
                            split_masses=(mv, mw), witnesses=witnesses)


# -- synthetic families -----------------------------------------------------


def spreading_sequence(grid: Grid, count: int = 8, ratio: float = 1.5, c2: float = 1.0,
                       kind: str = "gaussian"):
    """``dilate(phi, ratio^-n)`` for ``n = 0..count-1``, normalized to mass c2."""
    prof = Profile(kind)
    out = []
    for n in range(count):
        f = dilate(prof, ratio ** (-n), grid)
        out.append(f * math.sqrt(c2 / f.mass))
    return FieldSequence(out)


def translate_sequence(grid: Grid, count: int = 8, step: float = 2.5, c2: float = 1.0,
                       kind: str = "gaussian", direction=None):
    """``phi(x - n * step * e)`` wrapped on the torus."""
    e = np.zeros(grid.dim)
    e[0] = 1.0
    if direction is not None:
        e = np.asarray(direction, dtype=float) / np.linalg.norm(direction)
    base = grid.sample(Profile(kind))
    base = base * math.sqrt(c2 / base.mass)
    return FieldSequence([translate(base, n * step * e) for n in range(count)])


def separating_sequence(grid: Grid, count: int = 8, d0: float = 4.0, step: float = 2.0,
                        a2: float = 0.4, c2: float = 1.0, width: float = 1.0):
    """Two Gaussian bumps of masses ``a2`` and ``c2 - a2`` moving apart.

    Separation along the first axis is ``d0 + n * step``, placed symmetric
    about the origin; the heavier bump carries ``max(a2, c2 - a2)``.
    """
    out = []
    for n in range(count):
        d = d0 + n * step
        e = np.zeros(grid.dim)
        e[0] = 0.5 * d
        left = grid.sample(Profile("gaussian", width=width, center=tuple(-e)))
        right = grid.sample(Profile("gaussian", width=width, center=tuple(e)))
        vals = (math.sqrt(a2 / left.mass) * np.asarray(left.values)
                + math.sqrt((c2 - a2) / right.mass) * np.asarray(right.values))
        f = Field(grid, vals)
        out.append(f * math.sqrt(c2 / f.mass))
    return FieldSequence(out)
