"""The positive radial ground-state profile of -Q'' - Q'/r + Q - Q^3 = 0.

Solved by bisection shooting on Q(0): trajectories below the critical value
cross zero, trajectories above it turn around and diverge. The returned
profile carries the derived constants (squared mass, Dirichlet energy,
quartic integral) and an exponential tail extension fitted on the last
resolved decade.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import PchipInterpolator

from . import kernels
from .errors import NoBracket, NotConverged, OutOfRange
from .grid import Grid2D, ScalarField, integrate_values

SCHEMA = "gpelab-townes/1"

# keep trajectory samples down to this amplitude; below it the unstable
# shooting mode pollutes the solution and the analytic tail takes over
_Q_KEEP = 3e-4
_R_EXTEND = 30.0


@dataclass
class RadialProfile:
    radii: np.ndarray
    q_values: np.ndarray
    q_prime: np.ndarray
    mass: float        # a* = int Q^2
    kinetic: float     # int |grad Q|^2
    quartic: float     # int Q^4
    q0: float
    step: float
    r_cut: float       # end of integrated data; beyond it the tail formula
    tail_coeff: float  # c in c * r^{-1/2} e^{-r}
    tail_slope: float  # fitted slope of log(Q sqrt(r)) vs r, should be ~ -1

    @cached_property
    def _interp(self) -> PchipInterpolator:
        return PchipInterpolator(self.radii, self.q_values, extrapolate=False)

    def __call__(self, r):
        """Evaluate Q(r) for r >= 0, using the tail formula beyond coverage."""
        r = np.asarray(r, dtype=float)
        out = self._interp(r)
        far = ~np.isfinite(out)
        if np.any(far):
            rc = self.radii[-1]
            qc = self.q_values[-1]
            with np.errstate(under="ignore"):
                out = np.where(
                    far, qc * np.sqrt(rc / np.maximum(r, rc)) * np.exp(-(np.maximum(r, rc) - rc)), out
                )
        return out

    def moment(self, p: float) -> float:
        """m_p = int |x|^p Q^2 dx = 2*pi int r^{p+1} Q(r)^2 dr."""
        if p < 0:
            raise ValueError("p must be >= 0")
        y = 2.0 * np.pi * self.radii ** (p + 1.0) * self.q_values**2
        return float(simpson(y, x=self.radii))

    def lambda_of(self, p: float) -> float:
        """Limiting rescaled-profile width ((p/2) m_p)^{1/(p+2)}."""
        if p <= 0:
            raise ValueError("p must be > 0")
        return float((0.5 * p * self.moment(p)) ** (1.0 / (p + 2.0)))

    def to_json_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "radii": self.radii.tolist(),
            "q_values": self.q_values.tolist(),
            "q_prime": self.q_prime.tolist(),
            "mass": self.mass,
            "kinetic": self.kinetic,
            "quartic": self.quartic,
            "q0": self.q0,
            "step": self.step,
            "r_cut": self.r_cut,
            "tail_coeff": self.tail_coeff,
            "tail_slope": self.tail_slope,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "RadialProfile":
        if doc.get("schema") != SCHEMA:
            raise ValueError(f"unexpected schema {doc.get('schema')!r}")
        return cls(
            radii=np.asarray(doc["radii"]),
            q_values=np.asarray(doc["q_values"]),
            q_prime=np.asarray(doc["q_prime"]),
            mass=doc["mass"],
            kinetic=doc["kinetic"],
            quartic=doc["quartic"],
            q0=doc["q0"],
            step=doc["step"],
            r_cut=doc["r_cut"],
            tail_coeff=doc["tail_coeff"],
            tail_slope=doc["tail_slope"],
        )

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh)

    @classmethod
    def load(cls, path) -> "RadialProfile":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


def moment_table(profile: RadialProfile, ps) -> dict[float, float]:
    return {float(p): profile.moment(p) for p in ps}


def _classify(q0: float, step: float, r_max: float) -> int:
    return kernels.shoot_classify(q0, step, r_max)


def solve_townes(tolerance: float = 1e-10, r_max: float = 20.0, step: float = 2e-3) -> RadialProfile:
    """Bisection shooting for the radial profile; see module docstring."""
    if not (0.0 < tolerance <= 1e-6):
        raise ValueError("tolerance must be in (0, 1e-6]")
    if r_max < 15.0:
        raise ValueError("r_max must be >= 15")

    lo, hi = 2.0, 2.5
    s_lo = _classify(lo, step, r_max)
    s_hi = _classify(hi, step, r_max)
    widen = 0
    while s_lo == s_hi and widen < 12:
        if widen % 2 == 0 and lo > 1.05:
            lo -= 0.25
            s_lo = _classify(lo, step, r_max)
        else:
            hi += 0.25
            s_hi = _classify(hi, step, r_max)
        widen += 1
    if s_lo == s_hi or 0 in (s_lo, s_hi):
        if s_lo == kernels.RAN_OUT:
            hi = lo
        elif s_hi == kernels.RAN_OUT:
            lo = hi
        else:
            raise NoBracket(f"no sign change on [{lo}, {hi}]")

    it = 0
    while hi - lo > tolerance:
        it += 1
        if it > 200:
            raise NotConverged("shooting bisection exhausted 200 iterations")
        mid = 0.5 * (lo + hi)
        s = _classify(mid, step, r_max)
        if s == kernels.RAN_OUT:
            lo = hi = mid
            break
        if s == s_lo:
            lo = mid
        else:
            hi = mid
    q0 = 0.5 * (lo + hi)

    q, qp, _status = kernels.shoot_trajectory(q0, step, r_max, _Q_KEEP)
    r = step * np.arange(1, len(q) + 1)

    # cut at the last index of the monotone decreasing stretch above _Q_KEEP
    dec = np.nonzero(np.diff(q) >= 0)[0]
    n_keep = int(dec[0]) + 1 if len(dec) else len(q)
    keep = min(n_keep, int(np.searchsorted(-q, -_Q_KEEP)) + 1, len(q))
    r, q, qp = r[:keep], q[:keep], qp[:keep]

    # decay-law fit on the last resolved decade: log(Q sqrt(r)) vs r
    win = (q >= _Q_KEEP) & (q <= 100 * _Q_KEEP)
    if np.count_nonzero(win) < 10:
        win = q <= 100 * _Q_KEEP
    slope, intercept = np.polyfit(r[win], np.log(q[win] * np.sqrt(r[win])), 1)

    # tail extension, continuous at the cut
    rc, qc = r[-1], q[-1]
    r_tail = np.arange(rc + step, _R_EXTEND, step)
    with np.errstate(under="ignore"):
        q_tail = qc * np.sqrt(rc / r_tail) * np.exp(-(r_tail - rc))
    qp_tail = q_tail * (-1.0 - 0.5 / r_tail)

    radii = np.concatenate([[0.0], r, r_tail])
    q_all = np.concatenate([[q0], q, q_tail])
    qp_all = np.concatenate([[0.0], qp, qp_tail])

    mass = float(simpson(2.0 * np.pi * radii * q_all**2, x=radii))
    kinetic = float(simpson(2.0 * np.pi * radii * qp_all**2, x=radii))
    quartic = float(simpson(2.0 * np.pi * radii * q_all**4, x=radii))

    return RadialProfile(
        radii=radii,
        q_values=q_all,
        q_prime=qp_all,
        mass=mass,
        kinetic=kinetic,
        quartic=quartic,
        q0=q0,
        step=step,
        r_cut=float(rc),
        tail_coeff=float(qc * np.sqrt(rc) * np.exp(rc)),
        tail_slope=float(slope),
    )


def sample_to_grid(
    profile: RadialProfile,
    grid: Grid2D,
    lam: float,
    center: tuple[float, float] = (0.0, 0.0),
) -> ScalarField:
    """Sample x -> (lam/sqrt(a*)) Q(lam |x - center|), exactly renormalized."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    if max(abs(center[0]), abs(center[1])) >= grid.half_width:
        raise ValueError("center outside the grid")
    if profile.tail_coeff <= 0:
        raise OutOfRange("profile has no usable tail extension")
    rad = lam * grid.radius_from(center)
    vals = (lam / np.sqrt(profile.mass)) * profile(rad)
    f = ScalarField(grid, vals)
    mass = integrate_values(grid, f.values**2)
    if abs(mass - 1.0) > 1e-6:
        raise OutOfRange(f"sampled mass {mass!r} deviates from 1 beyond tolerance")
    f.values /= np.sqrt(mass)
    return f
