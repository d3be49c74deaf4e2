"""Analytic trial pairs, nonexistence ladders, same-trap upper bounds, and
the scalar auxiliary minimization of f(s) = c s^2 + m |ln s / s|^p.

The trial family is a rescaled copy of the radial ground-state profile,
localized by a smooth compactly supported cutoff and displaced from the trap
bottom by +/- C0 (ln tau / tau) along a unit direction; it realizes the
kinetic-minus-quartic budget (1 - a/a*) tau^2 up to cutoff remainders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import OutOfRegime, UnderResolved
from .grid import Grid2D, ScalarField, integrate_values
from .minimize import FieldPair, ProblemSpec, TrapSpec, energy as pair_energy
from .townes import RadialProfile

_E3 = math.e**3


def smooth_cutoff(t):
    """C-infinity profile: 1 for t <= 1, 0 for t >= 2, bump-glued between."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    lo = t <= 1.0
    hi = t >= 2.0
    mid = ~(lo | hi)
    out[lo] = 1.0
    out[hi] = 0.0
    s = t[mid]
    g_up = np.exp(-1.0 / (2.0 - s))
    g_dn = np.exp(-1.0 / (s - 1.0))
    out[mid] = g_up / (g_up + g_dn)
    return out


@dataclass(frozen=True)
class TrialParams:
    tau: float
    cutoff_radius: float = 1.0
    c0: float = 3.0
    direction: tuple[float, float] = (1.0, 0.0)
    center1: tuple[float, float] = (0.0, 0.0)
    center2: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.tau <= 1.0:
            raise ValueError("tau must exceed 1")
        if self.cutoff_radius <= 0:
            raise ValueError("cutoff_radius must be positive")
        if self.c0 <= 1.0:
            raise ValueError("c0 must exceed 1")
        nx, ny = self.direction
        if abs(math.hypot(nx, ny) - 1.0) > 1e-12:
            raise ValueError("direction must be a unit vector")

    @property
    def offset(self) -> float:
        return self.c0 * math.log(self.tau) / self.tau

    def displaced_center(self, i: int) -> tuple[float, float]:
        """Component center: x_bar_i - (-1)^i * offset * n."""
        base = self.center1 if i == 1 else self.center2
        sgn = -((-1.0) ** i)
        return (
            base[0] + sgn * self.offset * self.direction[0],
            base[1] + sgn * self.offset * self.direction[1],
        )

    def normalization_defect(self, profile: RadialProfile) -> float:
        """|A^-2 - 1| with A the exact-mass prefactor, by radial quadrature."""
        r = profile.radii
        w = smooth_cutoff(r / (self.tau * self.cutoff_radius))
        mass = 2.0 * np.pi * simpson(r * (w * profile.q_values) ** 2, x=r)
        return abs(mass / profile.mass - 1.0)


def _sample_trial(params, profile, grid, center):
    """(tau/sqrt(a*)) * cutoff(|x-c|/R) * Q(tau |x-c|), unit mass on the grid."""
    rad = grid.radius_from(center)
    vals = smooth_cutoff(rad / params.cutoff_radius) * profile(params.tau * rad)
    vals *= params.tau / math.sqrt(profile.mass)
    mass = integrate_values(grid, vals**2)
    return ScalarField(grid, vals / math.sqrt(mass))


def build_trial_pair(params: TrialParams, profile: RadialProfile, grid: Grid2D) -> FieldPair:
    if 1.0 / params.tau < 4.0 * grid.h:
        raise UnderResolved(
            f"core width 1/tau = {1 / params.tau:.4g} needs h <= {1 / (4 * params.tau):.4g}, "
            f"grid has h = {grid.h:.4g}"
        )
    return FieldPair(
        _sample_trial(params, profile, grid, params.displaced_center(1)),
        _sample_trial(params, profile, grid, params.displaced_center(2)),
    )


def kinetic_minus_quartic(field: ScalarField, a: float) -> float:
    from .grid import gradient_sq_integral

    quart = integrate_values(field.grid, field.values**4)
    return gradient_sq_integral(field) - 0.5 * a * quart


def bump_field(grid: Grid2D, center, radius: float = 1.0) -> ScalarField:
    """Fixed compactly supported unit-mass bump: exp(-1/(1-(r/radius)^2))."""
    rad = grid.radius_from(center) / radius
    vals = np.zeros_like(rad)
    inside = rad < 1.0
    vals[inside] = np.exp(-1.0 / (1.0 - rad[inside] ** 2))
    mass = integrate_values(grid, vals**2)
    return ScalarField(grid, vals / math.sqrt(mass))


def demonstrate_unbounded(
    a1: float,
    grid: Grid2D,
    profile: RadialProfile,
    taus=(10.0, 20.0, 40.0),
    beta: float = 1.0,
    trap1: TrapSpec = TrapSpec(),
    trap2: TrapSpec = TrapSpec(),
    eta_center: tuple[float, float] = (2.5, 0.0),
) -> list[tuple[float, float]]:
    """Energy of (trial, fixed bump) along a tau ladder; unbounded below when
    a1 exceeds the critical coupling. The ladder is truncated (and reported
    short) where the grid stops resolving the tau^-1 core."""
    if a1 <= 0:
        raise ValueError("a1 must be positive")
    eta = bump_field(grid, eta_center)
    spec = ProblemSpec(a1, 0.0, beta, trap1, trap2)
    out = []
    for tau in taus:
        if 1.0 / tau < 4.0 * grid.h:
            break
        params = TrialParams(tau=tau)
        phi1 = _sample_trial(params, profile, grid, params.displaced_center(1))
        out.append((tau, pair_energy(FieldPair(phi1, eta), spec)))
    return out


def same_trap_upper_bound(
    a1: float,
    a2: float,
    p: float,
    grid: Grid2D,
    profile: RadialProfile,
    beta: float = 1.0,
    center: tuple[float, float] = (0.0, 0.0),
    c0: float = 3.0,
) -> tuple[float, float]:
    """tau* = (a*-a1)^{-1/(p+2)} (ln 1/(a*-a1))^{p/(p+2)} and the trial-pair
    energy at that scale; an upper bound for the ground-state energy."""
    astar = profile.mass
    if not (0 <= a1 < astar and 0 <= a2 < astar):
        raise ValueError("couplings must lie in [0, a*)")
    gap = astar - a1
    if gap >= 1.0:
        raise OutOfRegime("a1 too far below a* for the log-corrected scale")
    tau = gap ** (-1.0 / (p + 2.0)) * math.log(1.0 / gap) ** (p / (p + 2.0))
    params = TrialParams(tau=tau, c0=c0, center1=center, center2=center)
    pair = build_trial_pair(params, profile, grid)
    trap = TrapSpec(center=center, exponent=p)
    spec = ProblemSpec(a1, a2, beta, trap, trap)
    return tau, pair_energy(pair, spec)


@dataclass(frozen=True)
class LemmaAParams:
    kappa: float
    m: float
    p: float
    a: float
    astar: float

    def __post_init__(self):
        if min(self.kappa, self.m, self.p) <= 0:
            raise ValueError("kappa, m, p must be positive")
        if not (0 < self.a < self.astar):
            raise ValueError("a must lie in (0, a*)")


def _f_terms(s, params):
    c = (params.astar - params.a) / params.kappa
    ln = np.log(s)
    f = c * s**2 + params.m * np.abs(ln / s) ** params.p
    return f


def _fp_fpp(s, params):
    c = (params.astar - params.a) / params.kappa
    m, p = params.m, params.p
    ln = math.log(s)
    g = ln / s                      # > 0 on (e^3, inf)
    gp = (1.0 - ln) / s**2          # < 0 there
    gpp = (2.0 * ln - 3.0) / s**3
    fp = 2.0 * c * s + m * p * g ** (p - 1.0) * gp
    fpp = 2.0 * c + m * p * ((p - 1.0) * g ** (p - 2.0) * gp**2 + g ** (p - 1.0) * gpp)
    return fp, fpp


def lemma_a_minimize(params: LemmaAParams) -> tuple[float, float]:
    """Unique minimizer of f(s) = ((a*-a)/kappa) s^2 + m |ln s / s|^p on
    (e^3, inf) by safeguarded Newton; verifies the first-order bracket
    ((m p kappa)/(3(a*-a)))^{1/(p+2)} (ln s1)^{p/(p+2)} <= s1 <= the same
    expression with denominator 2(a*-a)."""
    gap = params.astar - params.a
    # initial guess from the bracket midpoint, iterated once on ln s
    s = (params.m * params.p * params.kappa / (2.5 * gap)) ** (1.0 / (params.p + 2.0))
    for _ in range(3):
        s = (params.m * params.p * params.kappa / (2.5 * gap)) ** (1.0 / (params.p + 2.0)) * max(
            math.log(s), 1.0
        ) ** (params.p / (params.p + 2.0))

    lo, hi = _E3, max(10.0 * s, 1e3 * _E3)
    fp_lo, _ = _fp_fpp(lo * (1 + 1e-12), params)
    if fp_lo >= 0:
        raise OutOfRegime("minimizer does not exceed e^3; a is too far from a*")
    while _fp_fpp(hi, params)[0] <= 0:
        hi *= 10.0
        if hi > 1e300:
            raise OutOfRegime("no sign change for f' found")
    s = min(max(s, lo * 1.01), hi * 0.99)
    for _ in range(200):
        fp, fpp = _fp_fpp(s, params)
        if fpp <= 0:
            raise ArithmeticError("f must be strictly convex at every Newton iterate")
        if fp > 0:
            hi = s
        else:
            lo = s
        step = fp / fpp
        s_new = s - step
        if not (lo < s_new < hi):
            s_new = 0.5 * (lo + hi)
        if abs(s_new - s) <= 1e-14 * s:
            s = s_new
            break
        s = s_new

    ln = math.log(s)
    lower = (params.m * params.p * params.kappa / (3.0 * gap)) ** (1.0 / (params.p + 2.0)) * ln ** (
        params.p / (params.p + 2.0)
    )
    upper = (params.m * params.p * params.kappa / (2.0 * gap)) ** (1.0 / (params.p + 2.0)) * ln ** (
        params.p / (params.p + 2.0)
    )
    if not (lower * (1 - 1e-9) <= s <= upper * (1 + 1e-9)):
        raise ArithmeticError(f"stationary point {s} violates bracket [{lower}, {upper}]")
    return s, float(_f_terms(s, params))


def lemma_a_brute_force(params: LemmaAParams, n: int = 10**6) -> float:
    """Dense log-grid argmin of f, then one parabolic refinement; oracle."""
    s = np.logspace(math.log10(_E3 * (1 + 1e-9)), math.log10(1e6 * _E3), n)
    f = _f_terms(s, params)
    i = int(np.argmin(f))
    if i in (0, len(s) - 1):
        return float(s[i])
    # golden-section refinement between the flanking samples
    a, b = s[i - 1], s[i + 1]
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = _f_terms(c, params), _f_terms(d, params)
    for _ in range(200):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = _f_terms(c, params)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = _f_terms(d, params)
        if b - a <= 1e-12 * a:
            break
    return float(0.5 * (a + b))
