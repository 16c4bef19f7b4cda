"""Hot numerical kernels: model right-hand sides and the Dormand-Prince 5(4)
stepping loop.

Every kernel is written in the numba-compatible subset of NumPy and compiled
with ``@njit`` when available; the identical source runs as plain Python under
the fallback (see ``_numba``).  RHS kernels use an out-parameter signature
``rhs(t, y, pars, out)`` so the stepper allocates nothing per call.
"""

import numpy as np

from ._numba import USE_NUMBA, maybe_njit

# --- model right-hand sides -------------------------------------------------


@maybe_njit(cache=True)
def rhs_complex_pr(t, y, pars, out):
    # i Psi' + (t - |Psi|^2) Psi + i delta Psi = f
    f = pars[0]
    delta = pars[1]
    re = y[0]
    im = y[1]
    det = t - (re * re + im * im)
    out[0] = -det * im - delta * re
    out[1] = det * re - delta * im - f


@maybe_njit(cache=True)
def rhs_polar_pr(t, y, pars, out):
    # R' = -delta R - f sin phi;  phi' = (t - R^2) - (f/R) cos phi
    f = pars[0]
    delta = pars[1]
    R = y[0]
    phi = y[1]
    out[0] = -delta * R - f * np.sin(phi)
    out[1] = (t - R * R) - (f / R) * np.cos(phi)


@maybe_njit(cache=True)
def rhs_rescaled_pr(t, y, pars, out):
    # i d^4 psi' + (t - |psi|^2) psi + i d^3 psi = d^3 f   (t is theta here)
    f = pars[0]
    d = pars[1]
    re = y[0]
    im = y[1]
    det = (t - (re * re + im * im)) / d ** 4
    out[0] = -det * im - re / d
    out[1] = det * re - im / d - f / d


@maybe_njit(cache=True)
def rhs_duffing(t, y, pars, out):
    # u'' + u + b u' - c u^3 = eps A cos(t - alpha t^2/2)
    eps = pars[0]
    b = pars[1]
    A = pars[2]
    c = pars[3]
    alpha = pars[4]
    u = y[0]
    v = y[1]
    out[0] = v
    out[1] = -u - b * v + c * u ** 3 + eps * A * np.cos(t - 0.5 * alpha * t * t)


@maybe_njit(cache=True)
def rhs_fast_motion(t, y, pars, out):
    #  p' + f (1 - cos s) = 0;  s' + 2 f p = 0
    f = pars[0]
    p = y[0]
    s = y[1]
    out[0] = -f * (1.0 - np.cos(s))
    out[1] = -2.0 * f * p


@maybe_njit(cache=True)
def rhs_painleve1(t, y, pars, out):
    # y'' = 6 y^2 + z   (t is z here)
    out[0] = y[1]
    out[1] = 6.0 * y[0] * y[0] + t


# --- Dormand-Prince 5(4) ----------------------------------------------------

C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                           49.0 / 176.0, -5103.0 / 18656.0)
A71, A73, A74, A75, A76 = (35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0,
                           -2187.0 / 6784.0, 11.0 / 84.0)
# embedded error coefficients (5th minus 4th order weights)
E1, E3, E4, E5, E6, E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                          -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)
# dense-output coefficients (Hairer's contd5)
D1 = -12715105075.0 / 11282082432.0
D3 = 87487479700.0 / 32700410799.0
D4 = -10690763975.0 / 1880347072.0
D5 = 701980252875.0 / 199316789632.0
D6 = -1453857185.0 / 822651844.0
D7 = 69997945.0 / 29380423.0

SAFETY = 0.9
BETA = 0.04
EXPO1 = 0.2 - BETA * 0.75
FAC_SHRINK = 5.0    # max step shrink factor per rejection cycle
FAC_GROW = 10.0     # max step growth factor

# chunk loop status codes
ST_DONE = 0
ST_BUFFER_FULL = 1
ST_NORM_BLOWUP = 2
ST_UNDERFLOW = 3
ST_MAXSTEPS = 4
ST_NONFINITE = 5


def _dopri5_chunk_impl(rhs, pars, t, y, h, t_end, rtol, atol, hmax, hmin,
                       max_steps, blowup_norm, facold,
                       ts, ys, rcont):
    """Advance from (t, y) toward t_end, storing accepted steps into the
    chunk buffers.  Returns
    (status, n_stored, t, h, facold, naccept, nreject, nfev).

    Buffers: ts (cap,), ys (cap, n), rcont (cap, 5, n).  y is updated in
    place to the last accepted state.
    """
    n = y.shape[0]
    cap = ts.shape[0]
    direction = 1.0 if t_end >= t else -1.0

    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    k5 = np.empty(n)
    k6 = np.empty(n)
    k7 = np.empty(n)
    yt = np.empty(n)
    ynew = np.empty(n)

    naccept = 0
    nreject = 0
    nfev = 0
    nstored = 0

    rhs(t, y, pars, k1)
    nfev += 1
    for i in range(n):
        if not np.isfinite(k1[i]):
            return ST_NONFINITE, nstored, t, h, facold, naccept, nreject, nfev

    steps = 0
    while True:
        if nstored >= cap:
            return ST_BUFFER_FULL, nstored, t, h, facold, naccept, nreject, nfev
        if steps >= max_steps:
            return ST_MAXSTEPS, nstored, t, h, facold, naccept, nreject, nfev
        steps += 1

        if abs(h) > hmax:
            h = direction * hmax
        last = False
        if direction * (t + h - t_end) >= 0.0:
            h = t_end - t
            last = True
        if abs(h) < hmin:
            return ST_UNDERFLOW, nstored, t, h, facold, naccept, nreject, nfev

        # stages
        for i in range(n):
            yt[i] = y[i] + h * A21 * k1[i]
        rhs(t + C2 * h, yt, pars, k2)
        for i in range(n):
            yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
        rhs(t + C3 * h, yt, pars, k3)
        for i in range(n):
            yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        rhs(t + C4 * h, yt, pars, k4)
        for i in range(n):
            yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i]
                                + A54 * k4[i])
        rhs(t + C5 * h, yt, pars, k5)
        for i in range(n):
            yt[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i]
                                + A64 * k4[i] + A65 * k5[i])
        rhs(t + h, yt, pars, k6)
        for i in range(n):
            ynew[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i]
                                  + A75 * k5[i] + A76 * k6[i])
        rhs(t + h, ynew, pars, k7)
        nfev += 6

        # scaled RMS error of the embedded pair
        err = 0.0
        ok = True
        for i in range(n):
            if not np.isfinite(ynew[i]):
                ok = False
                break
            e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                     + E6 * k6[i] + E7 * k7[i])
            ay = abs(y[i])
            an = abs(ynew[i])
            sc = atol + rtol * (ay if ay > an else an)
            err += (e / sc) ** 2
        if ok:
            err = np.sqrt(err / n)
            ok = np.isfinite(err)

        if not ok:
            nreject += 1
            h *= 0.5
            if abs(h) < hmin:
                return (ST_NONFINITE, nstored, t, h, facold, naccept,
                        nreject, nfev)
            continue

        if err <= 1.0:
            # accept: dense coefficients, then store
            tnew = t_end if last else t + h
            for i in range(n):
                ydiff = ynew[i] - y[i]
                bspl = h * k1[i] - ydiff
                rcont[nstored, 0, i] = y[i]
                rcont[nstored, 1, i] = ydiff
                rcont[nstored, 2, i] = bspl
                rcont[nstored, 3, i] = ydiff - h * k7[i] - bspl
                rcont[nstored, 4, i] = h * (D1 * k1[i] + D3 * k3[i]
                                            + D4 * k4[i] + D5 * k5[i]
                                            + D6 * k6[i] + D7 * k7[i])
            ts[nstored] = tnew
            for i in range(n):
                ys[nstored, i] = ynew[i]
            nstored += 1
            naccept += 1

            ymax = 0.0
            for i in range(n):
                a = abs(ynew[i])
                if a > ymax:
                    ymax = a
            t = tnew
            for i in range(n):
                y[i] = ynew[i]
                k1[i] = k7[i]      # FSAL

            if ymax >= blowup_norm:
                return (ST_NORM_BLOWUP, nstored, t, h, facold, naccept,
                        nreject, nfev)

            # PI controller (Hairer)
            if err < 1e-30:
                fac = 1.0 / FAC_GROW
            else:
                fac11 = err ** EXPO1
                fac = fac11 / facold ** BETA
                fac = fac / SAFETY
                if fac < 1.0 / FAC_GROW:
                    fac = 1.0 / FAC_GROW
                if fac > FAC_SHRINK:
                    fac = FAC_SHRINK
            h = h / fac
            facold = err if err > 1e-4 else 1e-4

            if last:
                return (ST_DONE, nstored, t, h, facold, naccept, nreject,
                        nfev)
        else:
            nreject += 1
            fac11 = err ** EXPO1
            fac = fac11 / SAFETY
            if fac > FAC_SHRINK:
                fac = FAC_SHRINK
            if fac < 1.0:
                fac = 1.0
            h = h / fac


_dopri5_chunk_py = _dopri5_chunk_impl
if USE_NUMBA:
    import numba

    _dopri5_chunk_jit = numba.njit(cache=False, nogil=True)(_dopri5_chunk_impl)
else:  # pragma: no cover - exercised via AUTORES_NO_NUMBA runs
    _dopri5_chunk_jit = _dopri5_chunk_impl


def dense_eval_steps(rights, lefts, hs, rcont, tq):
    """Evaluate the continuous extension at query times tq (array).

    Step j spans [lefts[j], lefts[j] + hs[j]] with stored sample time
    rights[j] (equal to the span end except for a step clipped by a terminal
    event).  Returns an array (len(tq), n).
    """
    rights = np.asarray(rights)
    tq = np.atleast_1d(np.asarray(tq, dtype=float))
    nstep = rights.shape[0]
    increasing = rights[-1] >= lefts[0]
    if increasing:
        j = np.searchsorted(rights, tq, side="left")
    else:
        j = nstep - np.searchsorted(rights[::-1], tq, side="right")
    j = np.minimum(j, nstep - 1)
    hstep = hs[j]
    th = np.where(hstep == 0.0, 0.0, (tq - lefts[j]) / np.where(hstep == 0.0, 1.0, hstep))
    th = th[:, None]
    th1 = 1.0 - th
    rc = rcont[j]      # (m, 5, n)
    return rc[:, 0] + th * (rc[:, 1] + th1 * (rc[:, 2] + th * (rc[:, 3] + th1 * rc[:, 4])))
