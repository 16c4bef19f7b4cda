"""Right-hand sides of every dynamical system in the artifact, plus the
fast-motion conserved quantity.

The compiled kernels live in ``_kernels``; this module provides the typed
public API (validated wrappers returning fresh arrays) and the pairing of
each system with its packed parameter vector for the integrator's fast path.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import DuffingParams, Params
from .integrate import IntegratorConfig, Trajectory, integrate

__all__ = [
    "SystemKind",
    "ModelSystem",
    "rhs_complex_pr",
    "rhs_polar_pr",
    "rhs_rescaled_pr",
    "rhs_duffing",
    "rhs_fast_motion",
    "fast_motion_energy",
    "integrate_system",
]


class SystemKind(enum.Enum):
    COMPLEX_PR = "complex_pr"      # i Psi' + (tau - |Psi|^2) Psi + i d Psi = f
    POLAR_PR = "polar_pr"          # amplitude/phase form of the same
    RESCALED_PR = "rescaled_pr"    # i d^4 psi' + (th - |psi|^2) psi + i d^3 psi = d^3 f
    DUFFING = "duffing"            # u'' + u + b u' - c u^3 = eps A cos(...)
    FAST_MOTION = "fast_motion"    # p' = -f (1 - cos s), s' = -2 f p


_KERNELS = {
    SystemKind.COMPLEX_PR: _kernels.rhs_complex_pr,
    SystemKind.POLAR_PR: _kernels.rhs_polar_pr,
    SystemKind.RESCALED_PR: _kernels.rhs_rescaled_pr,
    SystemKind.DUFFING: _kernels.rhs_duffing,
    SystemKind.FAST_MOTION: _kernels.rhs_fast_motion,
}


@dataclass(frozen=True)
class ModelSystem:
    """A system kind bound to its parameters; state dimension is 2 for all."""

    kind: SystemKind
    params: object   # Params or DuffingParams

    def __post_init__(self):
        want = DuffingParams if self.kind is SystemKind.DUFFING else Params
        if not isinstance(self.params, want):
            raise TypeError(f"{self.kind} needs {want.__name__}")

    @property
    def dimension(self) -> int:
        return 2

    def packed(self) -> np.ndarray:
        p = self.params
        if self.kind is SystemKind.DUFFING:
            return np.array([p.eps, p.b, p.A, p.c, p.alpha], dtype=float)
        if self.kind is SystemKind.FAST_MOTION:
            return np.array([p.f], dtype=float)
        return np.array([p.f, p.delta], dtype=float)

    @property
    def kernel(self):
        return _KERNELS[self.kind]


def _check_state(y, name="state"):
    y = np.asarray(y, dtype=float)
    if y.shape != (2,) or not np.all(np.isfinite(y)):
        raise ValueError(f"{name} must be a finite 2-vector, got {y!r}")
    return y


def rhs_complex_pr(tau: float, psi_vec, p: Params) -> np.ndarray:
    """Psi' = i (tau - |Psi|^2) Psi - delta Psi - i f, as (re, im)."""
    y = _check_state(psi_vec)
    out = np.empty(2)
    _kernels.rhs_complex_pr(tau, y, np.array([p.f, p.delta]), out)
    return out


def rhs_polar_pr(tau: float, rphi, p: Params) -> np.ndarray:
    """(R', phi') per the amplitude-phase system; singular at R = 0."""
    y = _check_state(rphi)
    if y[0] <= 0.0:
        raise ValueError(f"polar system is singular at R <= 0 (R={y[0]})")
    out = np.empty(2)
    _kernels.rhs_polar_pr(tau, y, np.array([p.f, p.delta]), out)
    return out


def rhs_rescaled_pr(theta: float, psi_vec, p: Params) -> np.ndarray:
    """psi' = i d^-4 (theta - |psi|^2) psi - psi/d - i f/d."""
    y = _check_state(psi_vec)
    out = np.empty(2)
    _kernels.rhs_rescaled_pr(theta, y, np.array([p.f, p.delta]), out)
    return out


def rhs_duffing(t: float, uv, dp: DuffingParams) -> np.ndarray:
    """(u', u'') with the chirped drive eps A cos(t - alpha t^2 / 2)."""
    y = _check_state(uv)
    out = np.empty(2)
    _kernels.rhs_duffing(t, y, np.array([dp.eps, dp.b, dp.A, dp.c, dp.alpha]),
                         out)
    return out


def rhs_fast_motion(xi: float, ps, par: Params) -> np.ndarray:
    """(p', s') = (-f (1 - cos s), -2 f p)."""
    y = _check_state(ps)
    out = np.empty(2)
    _kernels.rhs_fast_motion(xi, y, np.array([par.f]), out)
    return out


def fast_motion_energy(ps, par: Params | None = None):
    """Conserved quantity E0 = p^2 + sin s - s of the fast-motion system.

    Accepts a (p, s) pair or arrays of p, s stacked in the last axis.
    """
    arr = np.asarray(ps, dtype=float)
    p = arr[..., 0]
    s = arr[..., 1]
    return p * p + np.sin(s) - s


def integrate_system(system: ModelSystem, y0, t_span,
                     cfg: IntegratorConfig | None = None,
                     events=()) -> Trajectory:
    """Integrate a model system through the compiled fast path."""
    if system.kind is SystemKind.POLAR_PR and np.asarray(y0)[0] <= 0:
        raise ValueError("polar system cannot start at R <= 0")
    return integrate(system.kernel, y0, t_span, cfg=cfg, events=events,
                     pars=system.packed())
