"""Adaptive embedded Runge-Kutta integration with dense output and events.

One fixed Dormand-Prince 5(4) pair drives every system in the package.  State
vectors are flat real arrays; complex systems are integrated as 2n real
components.  Blow-up (needed to truncate at Painleve poles and after the
autoresonance break) is handled by a norm threshold and by step-size collapse,
never by exceptions mid-run.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._numba import USE_NUMBA
from ._kernels import (ST_BUFFER_FULL, ST_DONE, ST_MAXSTEPS, ST_NONFINITE,
                       ST_NORM_BLOWUP, ST_UNDERFLOW, dense_eval_steps)

__all__ = [
    "IntegratorConfig",
    "Event",
    "EventKind",
    "EventDirection",
    "EventOccurrence",
    "Trajectory",
    "IntegrationStats",
    "integrate",
    "dense_eval",
    "MaxStepsExceeded",
    "NonFiniteRHS",
    "OutOfSpanError",
]

_CHUNK = 4096


class MaxStepsExceeded(RuntimeError):
    pass


class NonFiniteRHS(RuntimeError):
    pass


class OutOfSpanError(ValueError):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_step: float = math.inf
    initial_step: float | None = None
    max_steps: int = 10_000_000
    blowup_norm: float = 1e8
    store_every: int = 1     # keep every k-th accepted sample (k>1 drops dense output)

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be > 0")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be > 0")
        if self.store_every < 1:
            raise ValueError("store_every must be >= 1")


class EventKind(enum.Enum):
    THRESHOLD_CROSSING = "threshold_crossing"
    BLOW_UP = "blow_up"
    CUSTOM = "custom"


class EventDirection(enum.Enum):
    RISING = "rising"
    FALLING = "falling"
    ANY = "any"


@dataclass(frozen=True)
class Event:
    """Event located on the dense output.

    ``func(t, y) -> float`` is the monitored scalar; for THRESHOLD_CROSSING
    the event fires where ``func`` crosses ``threshold`` in the given
    direction (default scalar: max-norm of the state), for CUSTOM where it
    crosses zero.  BLOW_UP entries are produced by the integrator itself.
    """

    kind: EventKind = EventKind.CUSTOM
    direction: EventDirection = EventDirection.ANY
    threshold: float = 0.0
    func: object = None
    terminal: bool = False
    name: str = ""

    def value(self, t, y):
        if self.kind is EventKind.THRESHOLD_CROSSING:
            g = self.func(t, y) if self.func is not None else float(np.max(np.abs(y)))
            return g - self.threshold
        if self.kind is EventKind.CUSTOM:
            return self.func(t, y)
        raise ValueError("BLOW_UP events are integrator-generated")


@dataclass(frozen=True)
class EventOccurrence:
    time: float
    event: Event
    state: np.ndarray


@dataclass
class IntegrationStats:
    naccept: int = 0
    nreject: int = 0
    nfev: int = 0


@dataclass
class Trajectory:
    """Time-ordered samples plus the interpolant of the generating steps."""

    ts: np.ndarray                  # (N+1,) sample times, strictly monotone
    ys: np.ndarray                  # (N+1, n) states
    t0: float
    dense: np.ndarray | None        # (N, 5, n) contd5 coefficients, or None
    dense_lefts: np.ndarray | None = None   # (N,) step left endpoints
    dense_hs: np.ndarray | None = None      # (N,) true step widths
    events: list = field(default_factory=list)
    stats: IntegrationStats = field(default_factory=IntegrationStats)
    status: str = "done"

    @property
    def t_end(self) -> float:
        return float(self.ts[-1])

    @property
    def span(self):
        return (self.t0, self.t_end)

    def dense_eval(self, t):
        return dense_eval(self, t)


def dense_eval(traj: Trajectory, t):
    """Interpolate trajectory state at time(s) t within the span."""
    if traj.dense is None or traj.dense.shape[0] == 0:
        raise OutOfSpanError("trajectory stored without dense output")
    tq = np.atleast_1d(np.asarray(t, dtype=float))
    lo, hi = sorted(traj.span)
    eps = 1e-12 * max(1.0, abs(lo), abs(hi))
    if np.any(tq < lo - eps) or np.any(tq > hi + eps):
        raise OutOfSpanError(f"query time outside trajectory span [{lo}, {hi}]")
    out = dense_eval_steps(traj.ts[1:], traj.dense_lefts, traj.dense_hs,
                           traj.dense, np.clip(tq, lo, hi))
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return out[0]
    return out


def _wrap_python_rhs(f):
    def rhs(t, y, pars, out):
        out[:] = f(t, y)
    return rhs


def _initial_step(rhs_call, t0, y0, f0, direction, rtol, atol, hmax, span):
    sc = atol + rtol * np.abs(y0)
    d0 = math.sqrt(float(np.mean((y0 / sc) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / sc) ** 2)))
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y0 + direction * h0 * f0
    f1 = rhs_call(t0 + direction * h0, y1)
    d2 = math.sqrt(float(np.mean(((f1 - f0) / sc) ** 2))) / h0
    dm = max(d1, d2)
    if dm <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / dm) ** 0.2
    return direction * min(100 * h0, h1, hmax, span)


def _bisect_event(gfun, tl, tr, gl, gr):
    """Illinois regula falsi; g changes sign on [tl, tr]."""
    tol = 1e-10 * max(1.0, abs(tl), abs(tr))
    a, b, ga, gb = tl, tr, gl, gr
    for _ in range(200):
        if abs(b - a) <= tol:
            break
        denom = gb - ga
        if denom == 0.0:
            m = 0.5 * (a + b)
        else:
            m = b - gb * (b - a) / denom
            lo, hi = (a, b) if a < b else (b, a)
            if not (lo < m < hi):
                m = 0.5 * (a + b)
        gm = gfun(m)
        if gm == 0.0:
            return m
        if (gm > 0) == (gb > 0):
            b, gb = m, gm
            ga *= 0.5
        else:
            a, ga = b, gb
            b, gb = m, gm
    return b


def _crossed(direction, gl, gr):
    if gl == gr:
        return False
    if direction is EventDirection.RISING:
        return gl < 0.0 <= gr
    if direction is EventDirection.FALLING:
        return gl > 0.0 >= gr
    return (gl < 0.0 <= gr) or (gl > 0.0 >= gr)


def integrate(rhs, y0, t_span, cfg: IntegratorConfig | None = None,
              events=(), pars=None) -> Trajectory:
    """Integrate ``rhs`` over ``t_span`` from ``y0``.

    ``rhs`` is either a plain callable ``f(t, y) -> array`` (with pars=None)
    or a kernel-style function ``f(t, y, pars, out)`` together with a float64
    ``pars`` array; the latter runs inside the compiled stepping loop when
    numba is enabled.

    Blow-up mid-run (norm threshold, step-size collapse, or a non-finite RHS
    after the first step) truncates the trajectory and records a BLOW_UP
    event.  MaxStepsExceeded and NonFiniteRHS are raised only when nothing
    can be returned.
    """
    cfg = cfg or IntegratorConfig()
    t0, t_end = float(t_span[0]), float(t_span[1])
    if t_end == t0 or not (math.isfinite(t0) and math.isfinite(t_end)):
        raise ValueError("degenerate t_span")
    y = np.asarray(y0, dtype=float).copy()
    if y.ndim != 1:
        raise ValueError("y0 must be a flat real vector")

    kernel_style = pars is not None
    if kernel_style:
        pars = np.asarray(pars, dtype=float)
        kernel = rhs
        use_jit = False
        if USE_NUMBA:
            import numba
            use_jit = isinstance(rhs, numba.core.dispatcher.Dispatcher)
    else:
        pars = np.empty(0)
        kernel = _wrap_python_rhs(rhs)
        use_jit = False
    chunk_fn = _kernels._dopri5_chunk_jit if use_jit else _kernels._dopri5_chunk_py

    def rhs_call(t, yv):
        out = np.empty_like(yv)
        kernel(t, yv, pars, out)
        return out

    stats = IntegrationStats()
    f0 = rhs_call(t0, y)
    stats.nfev += 1
    if not np.all(np.isfinite(f0)):
        raise NonFiniteRHS(f"rhs not finite at t0={t0}")

    direction = 1.0 if t_end > t0 else -1.0
    span = abs(t_end - t0)
    hmax = min(cfg.max_step, span)
    hmin = 1e-13 * span
    if cfg.initial_step is not None:
        h = direction * min(abs(cfg.initial_step), hmax)
    else:
        h = _initial_step(rhs_call, t0, y, f0, direction, cfg.rel_tol,
                          cfg.abs_tol, hmax, span)
        stats.nfev += 1

    thin = cfg.store_every
    ts_parts = [np.array([t0])]
    ys_parts = [y.copy()[None, :]]
    dense_parts, lefts_parts, hs_parts = [], [], []
    occurred: list[EventOccurrence] = []
    status = "done"
    facold = 1e-4
    steps_left = cfg.max_steps
    global_idx = 0          # accepted-step counter, for stride-stable thinning
    last_sample_t = t0
    last_sample_y = y.copy()

    n = y.shape[0]
    live_events = [e for e in events if e.kind is not EventKind.BLOW_UP]
    g_prev = [e.value(t0, y.copy()) for e in live_events]

    t = t0
    finished = False
    while not finished:
        ts_buf = np.empty(_CHUNK)
        ys_buf = np.empty((_CHUNK, n))
        rc_buf = np.empty((_CHUNK, 5, n))
        t_chunk_left = t
        st, nstored, t, h, facold, na, nr, nf = chunk_fn(
            kernel, pars, t, y, h, t_end, cfg.rel_tol, cfg.abs_tol, hmax,
            hmin, steps_left, cfg.blowup_norm, facold, ts_buf, ys_buf, rc_buf)
        stats.naccept += na
        stats.nreject += nr
        stats.nfev += nf
        steps_left -= na + nr

        ts_new = ts_buf[:nstored]
        ys_new = ys_buf[:nstored]
        rc_new = rc_buf[:nstored]
        lefts_new = np.empty(nstored)
        if nstored:
            lefts_new[0] = t_chunk_left
            lefts_new[1:] = ts_new[:-1]
        hs_new = ts_new - lefts_new

        # event scan over the newly stored steps
        cut = None
        if live_events and nstored:
            for j in range(nstored):
                tl, tr, yr = lefts_new[j], ts_new[j], ys_new[j]
                for m, ev in enumerate(live_events):
                    gl = g_prev[m]
                    gr = ev.value(tr, yr)
                    if _crossed(ev.direction, gl, gr):
                        rc = rc_new[j]
                        hstep = hs_new[j]

                        def geval(tm, _rc=rc, _tl=tl, _h=hstep, _ev=ev):
                            th = (tm - _tl) / _h
                            th1 = 1.0 - th
                            yv = _rc[0] + th * (_rc[1] + th1 * (
                                _rc[2] + th * (_rc[3] + th1 * _rc[4])))
                            return _ev.value(tm, yv)

                        te = _bisect_event(geval, tl, tr, gl, gr)
                        th = (te - tl) / hstep
                        th1 = 1.0 - th
                        ye = rc[0] + th * (rc[1] + th1 * (
                            rc[2] + th * (rc[3] + th1 * rc[4])))
                        occurred.append(EventOccurrence(float(te), ev, ye))
                        if ev.terminal and cut is None:
                            cut = (j, float(te), ye)
                    g_prev[m] = gr
                if cut is not None:
                    break

        if cut is not None:
            j, te, ye = cut
            ts_new = np.append(ts_new[:j], te)
            ys_new = np.vstack([ys_new[:j], ye[None, :]])
            rc_new = rc_new[:j + 1]
            lefts_new = lefts_new[:j + 1]
            hs_new = hs_new[:j + 1]       # keep true width of the clipped step
            status = "event"
            finished = True
        elif st == ST_DONE:
            finished = True
        elif st == ST_BUFFER_FULL:
            pass
        elif st == ST_MAXSTEPS:
            status = "max_steps"
            finished = True
        elif st in (ST_NORM_BLOWUP, ST_UNDERFLOW, ST_NONFINITE):
            if stats.naccept == 0 and st == ST_NONFINITE:
                raise NonFiniteRHS("rhs became non-finite at the first step")
            status = "blowup"
            finished = True
        else:  # pragma: no cover
            raise RuntimeError(f"unknown stepper status {st}")

        if ts_new.shape[0]:
            last_sample_t = float(ts_new[-1])
            last_sample_y = ys_new[-1].copy()
            if thin > 1:
                local = np.arange(ts_new.shape[0])
                keep = local[(global_idx + local) % thin == thin - 1]
                if finished and (keep.size == 0 or keep[-1] != local[-1]):
                    keep = np.append(keep, local[-1])
                ts_parts.append(ts_new[keep])
                ys_parts.append(ys_new[keep])
            else:
                ts_parts.append(ts_new.copy())
                ys_parts.append(ys_new.copy())
                dense_parts.append(rc_new.copy())
                lefts_parts.append(lefts_new.copy())
                hs_parts.append(hs_new.copy())
            global_idx += ts_new.shape[0]

    ts = np.concatenate(ts_parts)
    ys = np.vstack(ys_parts)
    if thin > 1:
        dense = lefts = hs = None
    else:
        dense = np.concatenate(dense_parts) if dense_parts else np.empty((0, 5, n))
        lefts = np.concatenate(lefts_parts) if lefts_parts else np.empty(0)
        hs = np.concatenate(hs_parts) if hs_parts else np.empty(0)

    if status == "blowup":
        blow = Event(kind=EventKind.BLOW_UP, name="blowup")
        occurred.append(EventOccurrence(last_sample_t, blow, last_sample_y))

    traj = Trajectory(ts=ts, ys=ys, t0=t0, dense=dense, dense_lefts=lefts,
                      dense_hs=hs, events=occurred, stats=stats, status=status)
    if status == "max_steps":
        raise MaxStepsExceeded(
            f"exceeded max_steps={cfg.max_steps} at t={ts[-1]}")
    return traj
