"""Independent reference values used by the tests.

Nothing here imports the package: each oracle is a closed form or a direct
quadrature written from scratch.
"""
import math

import numpy as np
from scipy import integrate
from scipy.special import gamma


def gaussian_kinetic(s, width=1.0, amplitude=1.0):
    """Fourier-side kinetic energy of ``A exp(-x^2/w^2)`` on the real line.

    With ``u_hat = A w sqrt(pi) exp(-w^2 xi^2 / 4)`` the energy
    ``(2 pi)^-1 int |xi|^(2s) |u_hat|^2`` reduces to a Gamma integral.
    """
    return amplitude ** 2 * width ** (1 - 2 * s) * 2 ** (s - 0.5) * gamma(s + 0.5)


def gaussian_kinetic_torus(s, L, width=1.0, amplitude=1.0, modes=4000):
    """Same energy for the L-periodization, as a sum over ``xi_k = 2 pi k / L``.

    By Poisson summation the periodized Gaussian has Fourier coefficients
    ``u_hat(xi_k) / sqrt(L)`` exactly, so the energy is a plain lattice sum.
    """
    xi = 2 * math.pi * np.arange(1, modes) / L
    uh2 = amplitude ** 2 * width ** 2 * math.pi * np.exp(-width ** 2 * xi ** 2 / 2)
    return float(2 * np.sum(xi ** (2 * s) * uh2) / L)


def sech2_kinetic_torus(s, L, modes=4000):
    xi = 2 * math.pi * np.arange(1, modes) / L
    uh = math.pi * xi / np.sinh(np.minimum(math.pi * xi / 2, 700.0))
    return float(2 * np.sum(xi ** (2 * s) * uh ** 2) / L)


def gaussian_mass(width=1.0, amplitude=1.0):
    return amplitude ** 2 * width * math.sqrt(math.pi / 2)


def sech2_kinetic(s):
    """Kinetic energy of ``sech(x)^2``, whose transform is ``pi xi / sinh(pi xi / 2)``."""
    def f(xi):
        if xi == 0.0:
            return 0.0
        return xi ** (2 * s) * (math.pi * xi / math.sinh(math.pi * xi / 2)) ** 2

    val, _ = integrate.quad(f, 0.0, 80.0, limit=400, epsabs=1e-14, epsrel=1e-13)
    return val / math.pi


def gaussian_cubic_potential(amplitude):
    """``int |A exp(-x^2)|^3 / 3 dx``."""
    return amplitude ** 3 * math.sqrt(math.pi / 3) / 3


def standard_constant(dim, s):
    """``C_{N,s}`` written out independently of the package."""
    return 4 ** s * gamma(dim / 2 + s) / (math.pi ** (dim / 2) * abs(gamma(-s)))


def periodic_kernel_direct(r, L, s, images=20000):
    """``sum_m |r + m L|^-(1+2s)`` by brute force plus the integral tail."""
    a = 1 + 2 * s
    m = np.arange(-images, images + 1)
    body = np.sum(np.abs(r + m * L) ** (-a))
    tail = 2 * (images * L) ** (1 - a) / ((a - 1) * L)
    return body + tail


def spike_gagliardo(amplitude, M, L, s):
    """Two-point sum of the Gagliardo energy for a single nonzero node.

    Only pairs with exactly one endpoint at the spike contribute, each with
    ``A^2``; both orderings count, and the quadrature weight is ``h^2``.
    """
    h = L / M
    pref = standard_constant(1, s) / 2
    total = sum(periodic_kernel_direct(d * h, L, s) for d in range(1, M))
    return pref * h * h * 2 * amplitude ** 2 * total


def bo_soliton(x, mu=1.0):
    """``mu * Q(mu x)`` with ``Q = 2 / (1 + x^2)``."""
    return 2 * mu / (1 + (mu * x) ** 2)


def bo_half_laplacian(x):
    """``(-Delta)^(1/2) Q`` in closed form: ``2 (1 - x^2) / (1 + x^2)^2``."""
    return 2 * (1 - x ** 2) / (1 + x ** 2) ** 2
