"""Adaptive embedded Runge-Kutta integration of the continuum equations.

Two schemes of distinct order are provided so that chaotic divergence
between methods can be demonstrated without leaving the package:

* ``high_order``   — the 8th-order Dormand-Prince scheme (12 stages, with
  the combined 5th/3rd-order embedded error estimate),
* ``medium_order`` — the classic Dormand-Prince 5(4) pair (7 stages, FSAL).

Steps are clipped so that accepted steps land exactly on the uniform
``dt`` sampling grid; no interpolation touches the recorded samples.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DivergenceError, InvalidInputError
from .systems import SystemSpec, rhs
from .trajectory import Trajectory

METHODS = ("high_order", "medium_order")

# --- Dormand-Prince 5(4), "DOPRI5" ---------------------------------------

_DP5_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP5_A = (
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
)
_DP5_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# difference between the 5th order solution and the embedded 4th order one
_DP5_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

# --- Dormand-Prince 8(5,3), the 12 propagating stages of "DOP853" --------

_DP8_C = np.array(
    [
        0.0,
        0.526001519587677318785587544488e-01,
        0.789002279381515978178381316732e-01,
        0.118350341907227396726757197510e00,
        0.281649658092772603273242802490e00,
        0.333333333333333333333333333333e00,
        0.25e00,
        0.307692307692307692307692307692e00,
        0.651282051282051282051282051282e00,
        0.6e00,
        0.857142857142857142857142857142e00,
        1.0,
    ]
)

_DP8_A = (
    np.array([]),
    np.array([5.26001519587677318785587544488e-2]),
    np.array([1.97250569845378994544595329183e-2, 5.91751709536136983633785987549e-2]),
    np.array([2.95875854768068491816892993775e-2, 0.0, 8.87627564304205475450678981324e-2]),
    np.array(
        [
            2.41365134159266685502369798665e-1,
            0.0,
            -8.84549479328286085344864962717e-1,
            9.24834003261792003115737966543e-1,
        ]
    ),
    np.array(
        [
            3.7037037037037037037037037037e-2,
            0.0,
            0.0,
            1.70828608729473871279604482173e-1,
            1.25467687566822425016691814123e-1,
        ]
    ),
    np.array(
        [
            3.7109375e-2,
            0.0,
            0.0,
            1.70252211019544039314978060272e-1,
            6.02165389804559606850219397283e-2,
            -1.7578125e-2,
        ]
    ),
    np.array(
        [
            3.70920001185047927108779319836e-2,
            0.0,
            0.0,
            1.70383925712239993810214054705e-1,
            1.07262030446373284651809199168e-1,
            -1.53194377486244017527936158236e-2,
            8.27378916381402288758473766002e-3,
        ]
    ),
    np.array(
        [
            6.24110958716075717114429577812e-1,
            0.0,
            0.0,
            -3.36089262944694129406857109825e0,
            -8.68219346841726006818189891453e-1,
            2.75920996994467083049415600797e1,
            2.01540675504778934086186788979e1,
            -4.34898841810699588477366255144e1,
        ]
    ),
    np.array(
        [
            4.77662536438264365890433908527e-1,
            0.0,
            0.0,
            -2.48811461997166764192642586468e0,
            -5.90290826836842996371446475743e-1,
            2.12300514481811942347288949897e1,
            1.52792336328824235832596922938e1,
            -3.32882109689848629194453265587e1,
            -2.03312017085086261358222928593e-2,
        ]
    ),
    np.array(
        [
            -9.3714243008598732571704021658e-1,
            0.0,
            0.0,
            5.18637242884406370830023853209e0,
            1.09143734899672957818500254654e0,
            -8.14978701074692612513997267357e0,
            -1.85200656599969598641566180701e1,
            2.27394870993505042818970056734e1,
            2.49360555267965238987089396762e0,
            -3.0467644718982195003823669022e0,
        ]
    ),
    np.array(
        [
            2.27331014751653820792359768449e0,
            0.0,
            0.0,
            -1.05344954667372501984066689879e1,
            -2.00087205822486249909675718444e0,
            -1.79589318631187989172765950534e1,
            2.79488845294199600508499808837e1,
            -2.85899827713502369474065508674e0,
            -8.87285693353062954433549289258e0,
            1.23605671757943030647266201528e1,
            6.43392746015763530355970484046e-1,
        ]
    ),
)

_DP8_B = np.array(
    [
        5.42937341165687622380535766363e-2,
        0.0,
        0.0,
        0.0,
        0.0,
        4.45031289275240888144113950566e0,
        1.89151789931450038304281599044e0,
        -5.8012039600105847814672114227e0,
        3.1116436695781989440891606237e-1,
        -1.52160949662516078556178806805e-1,
        2.01365400804030348374776537501e-1,
        4.47106157277725905176885569043e-2,
    ]
)
_DP8_BHH = np.array([0.244094488188976377952755905512e00, 0.733846688281611857341361741547e00, 0.220588235294117647058823529412e-01])
_DP8_E5 = np.array(
    [
        0.1312004499419488073250102996e-01,
        0.0,
        0.0,
        0.0,
        0.0,
        -0.1225156446376204440720569753e01,
        -0.4957589496572501915214079952e00,
        0.1664377182454986536961530415e01,
        -0.3503288487499736816886487290e00,
        0.3341791187130174790297318841e00,
        0.8192320648511571246570742613e-01,
        -0.2235530786388629525884427845e-01,
    ]
)


def _stages(f, t, y, h, c, a, n_stages):
    k = [f(t, y)]
    for i in range(1, n_stages):
        yi = y + h * sum(aij * kj for aij, kj in zip(a[i], k))
        k.append(f(t + c[i] * h, yi))
    return k


class _Dopri5:
    order = 5
    error_expo = 1.0 / 5.0
    min_factor, max_factor = 0.2, 10.0

    @staticmethod
    def step(f, t, y, h, rtol, atol):
        k = _stages(f, t, y, h, _DP5_C, _DP5_A, 7)
        y_new = y + h * sum(bi * ki for bi, ki in zip(_DP5_B, k) if bi != 0.0)
        err_vec = h * sum(ei * ki for ei, ki in zip(_DP5_E, k) if ei != 0.0)
        sk = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = math.sqrt(float(np.mean((err_vec / sk) ** 2)))
        return y_new, err


class _Dop853:
    order = 8
    error_expo = 1.0 / 8.0
    min_factor, max_factor = 1.0 / 3.0, 6.0

    @staticmethod
    def step(f, t, y, h, rtol, atol):
        k = _stages(f, t, y, h, _DP8_C, _DP8_A, 12)
        acc = sum(bi * ki for bi, ki in zip(_DP8_B, k) if bi != 0.0)
        y_new = y + h * acc
        err5 = sum(ei * ki for ei, ki in zip(_DP8_E5, k) if ei != 0.0)
        err3 = acc - _DP8_BHH[0] * k[0] - _DP8_BHH[1] * k[8] - _DP8_BHH[2] * k[11]
        sk = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        e5 = float(np.sum((err5 / sk) ** 2))
        e3 = float(np.sum((err3 / sk) ** 2))
        deno = e5 + 0.01 * e3
        if deno <= 0.0:
            deno = 1.0
        err = abs(h) * e5 * math.sqrt(1.0 / (len(y) * deno))
        return y_new, err


_METHOD_TABLE = {"high_order": _Dop853, "medium_order": _Dopri5}

_SAFETY = 0.9
_MAX_STEPS_PER_SAMPLE = 100_000


def _initial_step(f, t0, y0, rtol, atol, order):
    f0 = f(t0, y0)
    sk = atol + rtol * np.abs(y0)
    d0 = math.sqrt(float(np.mean((y0 / sk) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / sk) ** 2)))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = f(t0 + h0, y1)
    d2 = math.sqrt(float(np.mean(((f1 - f0) / sk) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / (order + 1))
    return min(100 * h0, h1)


def solve_sampled(spec: SystemSpec, x0, v0, t_end: float, dt: float, method: str = "high_order",
                  rtol: float = 1e-10, atol: float = 1e-12):
    """Integrate and sample the full phase state on the uniform grid.

    Returns ``(times, X, V)`` with rows at t = 0, dt, 2*dt, ... <= t_end.
    Raises :class:`DivergenceError` with the failing time if the state
    stops being finite or the step size underflows.
    """
    if method not in _METHOD_TABLE:
        raise InvalidInputError(f"unknown method {method!r}, expected one of {METHODS}")
    if not dt > 0:
        raise InvalidInputError("dt must be positive")
    if t_end < 3 * dt:
        raise InvalidInputError("t_end must cover at least 3 sampling steps")

    x0 = np.asarray(x0, dtype=float).reshape(-1)
    v0 = np.asarray(v0, dtype=float).reshape(-1)
    dim = spec.dim
    if x0.shape != (dim,) or v0.shape != (dim,):
        raise InvalidInputError(f"initial state dimension mismatch (expected {dim})")

    def f(t, y):
        return np.concatenate((y[dim:], rhs(spec, y[:dim], y[dim:])))

    stepper = _METHOD_TABLE[method]
    n_samples = int(math.floor(t_end / dt + 1e-9)) + 1
    times = dt * np.arange(n_samples)
    out = np.empty((n_samples, 2 * dim))
    y = np.concatenate((x0, v0))
    out[0] = y

    t = 0.0
    h = min(_initial_step(f, t, y, rtol, atol, stepper.order), dt)
    expo = stepper.error_expo
    for i in range(1, n_samples):
        target = times[i]
        n_attempts = 0
        rejected = False
        while t < target - 1e-12 * max(1.0, target):
            n_attempts += 1
            if n_attempts > _MAX_STEPS_PER_SAMPLE:
                raise DivergenceError(f"step limit exceeded near t={t:.6g}", time=t)
            clipped = h >= target - t
            h_try = target - t if clipped else h
            if h_try < 1e-14 * max(1.0, abs(t)):
                raise DivergenceError(f"step size underflow at t={t:.6g}", time=t)
            y_new, err = stepper.step(f, t, y, h_try, rtol, atol)
            if not np.all(np.isfinite(y_new)) or not math.isfinite(err):
                raise DivergenceError(f"non-finite state at t={t + h_try:.6g}", time=t + h_try)
            if err <= 1.0:
                t = target if clipped else t + h_try
                y = y_new
                factor = stepper.max_factor if err == 0.0 else _SAFETY * err ** (-expo)
                factor = min(stepper.max_factor, max(stepper.min_factor, factor))
                if rejected:
                    factor = min(1.0, factor)
                h = h_try * factor
                rejected = False
            else:
                rejected = True
                factor = max(stepper.min_factor, _SAFETY * err ** (-expo))
                h = h_try * factor
        out[i] = y
    return times, out[:, :dim].copy(), out[:, dim:].copy()


def integrate(spec: SystemSpec, x0, v0, t_end: float, dt: float, method: str = "high_order",
              rtol: float = 1e-10, atol: float = 1e-12, label: str = "") -> Trajectory:
    """Simulate and return the configuration samples as a :class:`Trajectory`."""
    _, X, _ = solve_sampled(spec, x0, v0, t_end, dt, method=method, rtol=rtol, atol=atol)
    v0 = np.asarray(v0, dtype=float).reshape(-1)
    return Trajectory(dt=dt, states=X, initial_velocity=v0, label=label)
