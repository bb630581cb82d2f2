"""Caputo L1 discretisation, fractional integrals and Mittag-Leffler evaluation."""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from . import kernels
from .errors import DomainError, UnsupportedDomainError

# raw Taylor series of E_{mu,nu} is used up to this |z| for oscillating arguments
SERIES_LIMIT = 50.0
# largest |z|^(1/mu) for which the alternating series is attempted on z < 0
CANCEL_LIMIT = 8.0


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"fractional order must lie in (0, 1), got {alpha}")


@dataclass(frozen=True)
class L1Weights:
    """``a_j = (j+1)^(1-alpha) - j^(1-alpha)`` for ``j = 0..n-1``."""

    alpha: float
    coeffs: np.ndarray

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, j):
        return self.coeffs[j]


def l1_weights(alpha: float, n: int) -> L1Weights:
    _check_alpha(alpha)
    if n < 1:
        raise DomainError("need at least one L1 weight")
    j = np.arange(n + 1, dtype=float)
    p = j ** (1.0 - alpha)
    a = np.diff(p)
    a[0] = 1.0
    return L1Weights(alpha, a)


@dataclass
class FracHistory:
    """Stored trajectory ``U_0..U_j`` on a uniform grid of spacing ``step``.

    The L1 operator is nonlocal, so every stored value enters each new step.
    Weights are grown on demand.
    """

    alpha: float
    step: float
    values: list = field(default_factory=list)
    _a: np.ndarray = field(default=None, init=False, repr=False)

    def __post_init__(self):
        _check_alpha(self.alpha)
        if not self.step > 0:
            raise DomainError("history step must be positive")
        self.values = [float(v) for v in self.values]
        if not self.values:
            raise DomainError("history needs the initial value")

    @classmethod
    def start(cls, alpha, step, u0):
        return cls(alpha, step, [u0])

    def __len__(self):
        return len(self.values)

    @property
    def weights(self) -> np.ndarray:
        n = max(len(self.values) + 1, 2)
        if self._a is None or len(self._a) < n:
            self._a = l1_weights(self.alpha, max(n, 2 * len(self._a) if self._a is not None else 64)).coeffs
        return self._a

    def memory(self, j: int) -> float:
        """``sum_{k=1}^{j-1} (a_{j-k-1} - a_{j-k}) U_k + a_{j-1} U_0``."""
        if not 1 <= j <= len(self.values):
            raise DomainError(f"memory index {j} outside 1..{len(self.values)}")
        return kernels.l1_memory(self.weights, np.asarray(self.values[:j]), j)

    @property
    def scale(self) -> float:
        """``Gamma(2 - alpha) step^alpha``, the inverse of the L1 prefactor."""
        return math.gamma(2.0 - self.alpha) * self.step**self.alpha

    def append(self, value: float) -> None:
        self.values.append(float(value))

    @property
    def times(self) -> np.ndarray:
        return self.step * np.arange(len(self.values))


def caputo_l1_eval(history: FracHistory, i: int) -> float:
    """L1 approximation of the Caputo derivative at grid node ``i >= 1``."""
    if not 1 <= i < len(history.values):
        raise DomainError(f"Caputo L1 needs 1 <= i < {len(history.values)}, got {i}")
    return (history.values[i] - history.memory(i)) / history.scale


def l1_macro_step(history: FracHistory, reaction_avg: float, epsilon: float) -> float:
    """Explicit L1 step: solve the discrete equation ``D^alpha U_j = epsilon R`` for ``U_j``."""
    j = len(history.values)
    value = history.scale * epsilon * reaction_avg + history.memory(j)
    history.append(value)
    return value


def rl_integral_eval(samples, alpha: float, t: float, step: float) -> float:
    """Riemann-Liouville integral of order ``alpha`` at ``t`` from samples ``f(k * step)``.

    Each cell carries its left sample; the kernel ``(t - s)^(alpha-1)`` is
    integrated exactly over the cell.
    """
    _check_alpha(alpha)
    f = np.asarray(samples, dtype=float)
    n = t / step
    k = int(round(n))
    if abs(n - k) > 1e-9 * max(1.0, n) or k < 0 or k >= len(f):
        raise DomainError(f"t={t} is not a node of the sample grid")
    if k == 0:
        return 0.0
    s = step * np.arange(k + 1)
    w = (t - s[:-1]) ** alpha - np.maximum(t - s[1:], 0.0) ** alpha
    return float(np.dot(w, f[:k]) / math.gamma(alpha + 1.0))


# ---------------------------------------------------------------------------
# Mittag-Leffler


@dataclass(frozen=True)
class MittagLefflerParams:
    mu: float
    nu: float
    z: float

    def __post_init__(self):
        if not (self.mu > 0 and self.nu > 0):
            raise DomainError("Mittag-Leffler parameters must be positive")


def mittag_leffler(mu, nu=None, z=None) -> float:
    """Two-parameter Mittag-Leffler function ``sum_k z^k / Gamma(mu k + nu)``.

    Accepts a :class:`MittagLefflerParams` or ``(mu, nu, z)``.  Positive
    arguments use the series.  Negative arguments use the series only while
    its cancellation is mild; otherwise the Hankel contour is collapsed onto
    the negative axis (:func:`_ml_cut`), with dedicated routes for
    ``mu = 1`` and ``mu = 2``.  Raises :class:`UnsupportedDomainError` where
    no algorithm here is accurate.
    """
    p = mu if isinstance(mu, MittagLefflerParams) else MittagLefflerParams(float(mu), float(nu), float(z))
    mu, nu, z = p.mu, p.nu, p.z
    if z == 0.0:
        return 1.0 / math.gamma(nu)
    if z > 0.0:
        return _ml_series(mu, nu, z)
    if mu == 1.0 and nu == 1.0:
        return math.exp(z)
    if mu == 2.0 and z < -SERIES_LIMIT:
        return _ml2_negative(nu, math.sqrt(-z))
    # the alternating series sums terms as large as about exp(|z|^(1/mu))
    if (-z) ** (1.0 / mu) <= CANCEL_LIMIT:
        try:
            return _ml_series(mu, nu, z, guard=1e3)
        except UnsupportedDomainError:
            pass
    if mu == 1.0:
        return float(special.hyp1f1(1.0, nu, z)) / math.gamma(nu)
    return _ml_cut(mu, nu, z)


def _ml_series(mu, nu, z, guard=1e4):
    """Raw Taylor series; refuses when the summed magnitudes exceed ``guard`` times the result."""
    logz = math.log(abs(z))
    neg = z < 0
    total = 0.0
    abs_total = 0.0
    peak = 0.0
    k = 0
    while True:
        arg = mu * k + nu
        lt = k * logz - math.lgamma(arg)
        if lt > 700:
            raise UnsupportedDomainError(f"series for E_{{{mu},{nu}}}({z}) overflows")
        t = math.exp(lt)
        if neg and k % 2:
            t = -t
        total += t
        abs_total += abs(t)
        peak = max(peak, abs(t))
        # past the peak the terms decay super-geometrically
        if k > 2 and abs(t) < 1e-17 * max(abs(total), 1e-300) and abs(t) < peak:
            break
        k += 1
        if k > 100000:
            raise UnsupportedDomainError(f"series for E_{{{mu},{nu}}}({z}) did not converge")
    if abs_total > guard * abs(total):
        raise UnsupportedDomainError(
            f"E_{{{mu},{nu}}}({z}): series cancellation too severe for double precision"
        )
    return total


def _ml_cut(mu, nu, z):
    """``E_{mu,nu}(z)`` for ``z < 0`` from the Hankel contour collapsed onto the negative axis.

    The result is the sum of residues ``s^(1-nu) e^s / mu`` at the poles
    ``s^mu = z`` with ``|arg s| < pi`` plus the cut integral

        1/pi int_0^inf e^-r r^(mu-nu) (r^mu sin(pi nu) + z sin(pi (mu-nu)))
                        / (r^(2mu) - 2 r^mu z cos(pi mu) + z^2) dr.

    The integrand is integrable at 0 only for ``nu < mu + 1``; larger ``nu``
    is reduced with ``E_{mu,nu} = (E_{mu,nu-mu} - 1/Gamma(nu-mu)) / z``.
    """
    if nu >= mu + 1.0:
        return (_ml_cut(mu, nu - mu, z) - 1.0 / math.gamma(nu - mu)) / z
    odd = round((mu - 1.0) / 2.0)
    if abs(mu - (2 * odd + 1)) < 1e-9:
        raise UnsupportedDomainError(f"E_{{{mu},{nu}}}({z}): a pole sits on the branch cut")
    rad = (-z) ** (1.0 / mu)
    residues = 0.0
    k = 0
    while 2 * k + 1 < mu:
        s = rad * cmath.exp(1j * math.pi * (2 * k + 1) / mu)
        # the conjugate pole contributes the conjugate residue
        residues += 2.0 * (s ** (1.0 - nu) * cmath.exp(s)).real / mu
        k += 1
    sp = math.sin(math.pi * nu)
    sm = math.sin(math.pi * (mu - nu))
    c = math.cos(math.pi * mu)

    def f(r):
        if r == 0.0:
            return 0.0
        a = r**mu
        return math.exp(-r) * r ** (mu - nu) * (a * sp + z * sm) / (a * a - 2.0 * a * z * c + z * z)

    # split at the pole modulus, where the denominator is smallest
    edges = [0.0] + sorted({q for q in (1.0, rad) if q < 700.0}) + [math.inf]
    cut = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(edges[:-1], edges[1:]):
            cut += integrate.quad(f, a, b, epsabs=0.0, epsrel=2e-14, limit=500)[0]
    return residues + cut / math.pi


def _upper_gamma_cf(a, z):
    """``Gamma(a, z)`` by Lentz continued fraction; valid for complex z away from the negative axis."""
    tiny = 1e-300
    b = z + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 5000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    else:
        raise UnsupportedDomainError("incomplete gamma continued fraction did not converge")
    return cmath.exp(-z + a * cmath.log(z)) * h


def _fourier_moment(beta, x):
    """``C + iS = int_0^x s^(beta-1) e^(is) ds`` for ``beta`` in (0, 1]."""
    if beta == 1.0:
        return complex(math.sin(x), 1.0 - math.cos(x))
    # tail from x to infinity equals i^beta Gamma(beta, -ix) = e^(ix) x^beta * cf
    tail = _upper_gamma_cf(beta, complex(0.0, -x)) * cmath.exp(0.5j * math.pi * beta)
    return math.gamma(beta) * cmath.exp(0.5j * math.pi * beta) - tail


def _frac_integral_trig(beta, x):
    """Fractional integrals of order ``beta`` of cos and sin, evaluated at ``x``."""
    F = _fourier_moment(beta, x)
    g = math.gamma(beta)
    c, s = math.cos(x), math.sin(x)
    return (c * F.real + s * F.imag) / g, (s * F.real - c * F.imag) / g


def _ml2_negative(nu, x):
    """``E_{2,nu}(-x^2)`` for large ``x`` via fractional integrals of cos/sin."""
    z = -x * x
    if nu <= 1.0:
        return 1.0 / math.gamma(nu) + z * _ml2_negative(nu + 2.0, x)
    if nu > 3.0:
        return (_ml2_negative(nu - 2.0, x) - 1.0 / math.gamma(nu - 2.0)) / z
    if nu <= 2.0:
        ic, _ = _frac_integral_trig(nu - 1.0, x)
        return x ** (1.0 - nu) * ic
    _, is_ = _frac_integral_trig(nu - 2.0, x)
    return x ** (1.0 - nu) * is_


def frac_integral_sin(alpha, t, omega=2.0 * math.pi):
    """``I^alpha[sin(omega s)](t)``, evaluated without the Taylor series."""
    _check_alpha(alpha)
    if t == 0:
        return 0.0
    x = omega * t
    if x * x <= SERIES_LIMIT:
        return omega * t ** (alpha + 1) * mittag_leffler(2.0, alpha + 2.0, -x * x)
    return omega ** (-alpha) * _frac_integral_trig(alpha, x)[1]


def ode_exact_solution(t: float, alpha: float, epsilon: float):
    """Exact ``(v, u)`` of the two-scale ODE test problem.

    ``v = sin(2 pi t) + 2`` and ``u = 1 + epsilon I^alpha[v](t)``; the
    oscillating part is ``2 pi t^(alpha+1) E_{2,alpha+2}(-4 pi^2 t^2)``.
    """
    if t < 0:
        raise DomainError("t must be nonnegative")
    _check_alpha(alpha)
    v = math.sin(2.0 * math.pi * t) + 2.0
    if t == 0:
        return v, 1.0
    u = 1.0 + epsilon * (2.0 * t**alpha / math.gamma(alpha + 1.0) + frac_integral_sin(alpha, t))
    return v, u
