"""Domain types and scale conversions for the dissipative primary resonance
problem.

Two natural variable scales are used throughout: the "slow" scale
(tau, Psi) of the envelope equation

    i Psi' + (tau - |Psi|^2) Psi + i delta Psi = f,

and the rescaled scale (theta, psi) with theta = tau delta^2,
psi = delta Psi.  Three further stretched time scales (eta, inner tau, xi)
zoom into the break of autoresonant growth.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

__all__ = [
    "Params",
    "DuffingParams",
    "EnvelopeState",
    "PolarState",
    "Scale",
    "map_duffing_params",
    "polar_to_complex",
    "complex_to_polar",
    "convert_scale",
    "convert_time",
]

SQRT2 = math.sqrt(2.0)

#: Cubic coefficient of the Duffing equation u'' + u + b u' - c u^3 = drive
#: for which the two-scale reduction with f = A/(4 sqrt 2), delta = b/(4 eps^(2/3))
#: is exact.  Softening (c > 0) is required for capture under a down-chirp;
#: the magnitude follows from the frequency-lock balance (3c/4) a^2 = detuning.
DUFFING_CUBIC_DEFAULT = 8.0 / 3.0


@dataclass(frozen=True)
class Params:
    """Envelope-equation parameters: drive amplitude f and dissipation delta."""

    f: float
    delta: float

    def __post_init__(self):
        if not (math.isfinite(self.f) and self.f > 0):
            raise ValueError(f"f must be finite and > 0, got {self.f}")
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise ValueError(f"delta must be finite and > 0, got {self.delta}")
        if self.delta >= self.f:
            raise ValueError(
                f"small-dissipation regime requires delta < f, got delta={self.delta}, f={self.f}"
            )


@dataclass(frozen=True)
class DuffingParams:
    """Parameters of the chirped, damped Duffing equation

        u'' + u + b u' - c u^3 = eps * A * cos(t - alpha t^2 / 2).

    ``alpha`` defaults to 4 eps^(4/3), the unique chirp rate for which the
    drive phase equals t - tau^2/2 in the slow time tau = 2 eps^(2/3) t and the
    averaged envelope satisfies the primary resonance equation exactly at
    leading order.
    """

    eps: float
    b: float
    A: float
    c: float = DUFFING_CUBIC_DEFAULT
    alpha: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.eps) and self.eps > 0):
            raise ValueError(f"eps must be finite and > 0, got {self.eps}")
        if not (math.isfinite(self.b) and self.b >= 0):
            raise ValueError(f"b must be finite and >= 0, got {self.b}")
        if not math.isfinite(self.A):
            raise ValueError(f"A must be finite, got {self.A}")
        if self.alpha is None:
            object.__setattr__(self, "alpha", 4.0 * self.eps ** (4.0 / 3.0))
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be finite and > 0, got {self.alpha}")

    @property
    def slow_time_factor(self) -> float:
        """tau = slow_time_factor * t."""
        return 2.0 * self.eps ** (2.0 / 3.0)

    def drive_phase(self, t):
        """Integrated drive phase int_0^t omega dt' = t - alpha t^2 / 2."""
        return t - 0.5 * self.alpha * t * t


def map_duffing_params(dp: DuffingParams) -> Params:
    """Map Duffing-scale parameters onto envelope-scale (f, delta)."""
    f = dp.A / (4.0 * SQRT2)
    delta = dp.b / (4.0 * dp.eps ** (2.0 / 3.0))
    if f <= 0:
        raise ValueError(f"mapped f = A/(4 sqrt 2) = {f} must be > 0")
    if delta <= 0:
        raise ValueError(f"mapped delta = b/(4 eps^(2/3)) = {delta} must be > 0")
    return Params(f=f, delta=delta)


@dataclass(frozen=True)
class EnvelopeState:
    """Complex envelope at one time point (scale declared by the caller)."""

    time: float
    psi_re: float
    psi_im: float

    def __post_init__(self):
        for name in ("time", "psi_re", "psi_im"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")

    @property
    def psi(self) -> complex:
        return complex(self.psi_re, self.psi_im)

    @property
    def amplitude(self) -> float:
        return math.hypot(self.psi_re, self.psi_im)


@dataclass(frozen=True)
class PolarState:
    """Amplitude R >= 0 and unwrapped phase phi at one time point.

    The phase is intentionally not reduced mod 2 pi: lock detection needs a
    continuous phi so that phi' is meaningful.
    """

    time: float
    R: float
    phi: float

    def __post_init__(self):
        for name in ("time", "R", "phi"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
        if self.R < 0:
            raise ValueError(f"R must be >= 0, got {self.R}")


class Scale(enum.Enum):
    """Variable scales chained as TAU -> THETA -> ETA -> INNER_TAU -> XI."""

    TAU = "tau"            # (tau, Psi)
    THETA = "theta"        # theta = tau delta^2, psi = delta Psi
    ETA = "eta"            # eta = (theta - f^2)/delta
    INNER_TAU = "inner_tau"  # tau_in = (eta + 1)/delta
    XI = "xi"              # xi = (tau_in - tau0)/sqrt(delta)


class PhaseUndefinedError(ValueError):
    """Raised when the phase of a zero-amplitude state is requested."""


def polar_to_complex(s: PolarState) -> EnvelopeState:
    return EnvelopeState(
        time=s.time,
        psi_re=s.R * math.cos(s.phi),
        psi_im=s.R * math.sin(s.phi),
    )


def complex_to_polar(s: EnvelopeState, prev_phi: float | None = None,
                     carry_on_zero: bool = False) -> PolarState:
    """Convert to polar form, unwrapping the phase to the branch nearest
    ``prev_phi`` when given.

    A zero-amplitude state has no phase; this raises unless ``carry_on_zero``
    is set (then phi = prev_phi is carried over).
    """
    R = s.amplitude
    if R == 0.0:
        if carry_on_zero and prev_phi is not None:
            return PolarState(time=s.time, R=0.0, phi=prev_phi)
        raise PhaseUndefinedError("phase of zero-amplitude state is undefined")
    phi = math.atan2(s.psi_im, s.psi_re)
    if prev_phi is not None:
        phi += 2.0 * math.pi * round((prev_phi - phi) / (2.0 * math.pi))
    return PolarState(time=s.time, R=R, phi=phi)


def convert_time(t: float, src: Scale, dst: Scale, p: Params,
                 tau0: float = 0.0) -> float:
    """Convert the independent variable between scales.

    ``tau0`` anchors the XI scale (the fast-motion frame is centred on the
    Painleve pole of the inner region; pass the predicted pole position when
    working there).
    """
    d = p.delta
    # to canonical theta
    if src is Scale.TAU:
        theta = t * d * d
    elif src is Scale.THETA:
        theta = t
    elif src is Scale.ETA:
        theta = p.f ** 2 + d * t
    elif src is Scale.INNER_TAU:
        theta = p.f ** 2 - d + d * d * t
    elif src is Scale.XI:
        theta = p.f ** 2 - d + d * d * tau0 + d ** 2.5 * t
    else:
        raise ValueError(f"unknown scale {src}")
    # from theta to target
    if dst is Scale.TAU:
        return theta / (d * d)
    if dst is Scale.THETA:
        return theta
    if dst is Scale.ETA:
        return (theta - p.f ** 2) / d
    if dst is Scale.INNER_TAU:
        return (theta - p.f ** 2 + d) / (d * d)
    if dst is Scale.XI:
        return (theta - p.f ** 2 + d - d * d * tau0) / d ** 2.5
    raise ValueError(f"unknown scale {dst}")


def _amplitude_factor(src: Scale, dst: Scale, p: Params) -> float:
    # Dependent variable is Psi on the TAU scale, psi = delta Psi on all the
    # stretched scales (region-specific offset variables r, a, u, v, p, s are
    # expansion bookkeeping, handled where the expansions live).
    f_src = p.delta if src is not Scale.TAU else 1.0
    f_dst = p.delta if dst is not Scale.TAU else 1.0
    return f_dst / f_src


def convert_scale(state, src: Scale, dst: Scale, p: Params, tau0: float = 0.0):
    """Convert a state (EnvelopeState or PolarState) between scales."""
    t = convert_time(state.time, src, dst, p, tau0)
    fac = _amplitude_factor(src, dst, p)
    if isinstance(state, EnvelopeState):
        return EnvelopeState(time=t, psi_re=state.psi_re * fac,
                             psi_im=state.psi_im * fac)
    if isinstance(state, PolarState):
        return PolarState(time=t, R=state.R * fac, phi=state.phi)
    raise TypeError(f"cannot convert state of type {type(state)!r}")
