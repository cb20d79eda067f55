"""Energy functional, L2 gradient, Lagrange multiplier and residual diagnostics.

``J(u) = 1/2 <(-Delta)^s u, u> - h^N sum_j F(x_j, u_j)``.  The multiplier is
``lambda = <grad J(u), u> / mass(u)`` so that a constrained critical point
satisfies ``(-Delta)^s u - dF(x, u) = lambda u``; for the Benjamin-Ono soliton
this gives ``lambda = -1``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ZeroField
from .grid import Field, Grid, dft_forward, frac_kinetic
from .nonlinearity import NonlinearitySpec


@dataclass(frozen=True)
class EnergyReport:
    kinetic: float
    potential: float
    total: float
    mass: float
    lambda_: float
    el_residual: float
    hminus_gradient_norm: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lambda_")
        return d


class EnergyKernel:
    """Array-level evaluator used by the flow; all inputs are raw node arrays."""

    def __init__(self, spec: NonlinearitySpec, grid: Grid):
        self.grid = grid
        self.spec = spec
        self.bound = spec.bind(grid)
        self.symbol = grid.symbol
        self.dv = grid.cell_volume
        self._axes = tuple(range(grid.dim))

    def lap(self, u):
        return np.fft.ifftn(self.symbol * np.fft.fftn(u, axes=self._axes), axes=self._axes).real

    def mass(self, u):
        return self.dv * float(np.sum(u * u))

    def kinetic(self, u):
        """Full ``<(-Delta)^s u, u>``."""
        uh = np.fft.fftn(u, axes=self._axes)
        return self.dv / u.size * float(np.sum(self.symbol * (uh.real ** 2 + uh.imag ** 2)))

    def potential(self, u):
        return self.dv * float(np.sum(self.bound.F(u)))

    def energy(self, u):
        return 0.5 * self.kinetic(u) - self.potential(u)

    def gradient(self, u):
        return self.lap(u) - self.bound.dF(u)

    def diagnostics(self, u, g=None):
        """Return ``(lambda, residual)`` with the residual scaled by ``|u|_{H^s}``."""
        if g is None:
            g = self.gradient(u)
        m = self.mass(u)
        if m == 0.0:
            raise ZeroField("Lagrange multiplier undefined for the zero field")
        lam = self.dv * float(np.sum(g * u)) / m
        r = g - lam * u
        res = math.sqrt(self.mass(r)) / math.sqrt(m + self.kinetic(u))
        return lam, res


def _kernel(u: Field, spec: NonlinearitySpec) -> EnergyKernel:
    return EnergyKernel(spec, u.grid)


def energy(u: Field, spec: NonlinearitySpec) -> EnergyReport:
    """Full energy report for ``u``; pass the comparison spec to get ``J_inf``."""
    k = _kernel(u, spec)
    v = np.asarray(u.values)
    kin = 0.5 * k.kinetic(v)
    pot = k.potential(v)
    g = k.gradient(v)
    m = k.mass(v)
    if m > 0:
        lam, res = k.diagnostics(v, g)
    else:
        lam, res = 0.0, 0.0
    return EnergyReport(kin, pot, kin - pot, m, lam, res, hminus_norm(u.with_values(g)))


def energy_value(u: Field, spec: NonlinearitySpec) -> float:
    return _kernel(u, spec).energy(np.asarray(u.values))


def gradient(u: Field, spec: NonlinearitySpec) -> Field:
    """L2 gradient ``(-Delta)^s u - dF(x, u)``."""
    return u.with_values(_kernel(u, spec).gradient(np.asarray(u.values)))


def lagrange_multiplier(u: Field, spec: NonlinearitySpec) -> float:
    return _kernel(u, spec).diagnostics(np.asarray(u.values))[0]


def el_residual(u: Field, spec: NonlinearitySpec) -> float:
    """``|grad J(u) - lambda u|_2 / |u|_{H^s}``."""
    return _kernel(u, spec).diagnostics(np.asarray(u.values))[1]


def hminus_norm(g: Field) -> float:
    """Dual norm with multiplier ``1 / (1 + |xi|^{2s})``."""
    gh = dft_forward(g)
    return math.sqrt(float(np.sum(np.abs(gh) ** 2 / (1.0 + g.grid.symbol))))


def gradient_bound_ratio(u: Field, spec: NonlinearitySpec) -> float:
    """``|J'(u)|_{H^-s} / (|u|_{H^s} + |u|_{H^s}^{1+4s/N})``."""
    hs = math.sqrt(u.mass + frac_kinetic(u))
    if hs == 0.0:
        raise ZeroField("ratio undefined for the zero field")
    denom = hs + hs ** (1.0 + u.grid.critical_exponent)
    return hminus_norm(gradient(u, spec)) / denom
