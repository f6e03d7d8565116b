"""Compiled Dormand-Prince 5(4) kernel for the mean-field flow.

State layout is ``z = (Q1, P1, Q2, P2, Q3, P3)``. Step control follows the
PI scheme of Hairer, Norsett and Wanner (beta = 0.04); samples on a uniform
time grid come from the order-4 continuous extension of the method.
"""
import math

import numpy as np
from numba import njit

# Butcher rows (stage k uses A[k-1][:k]); ERR = b5 - b4 over all seven stages
A = np.array(
    [
        [1 / 5, 0, 0, 0, 0, 0],
        [3 / 40, 9 / 40, 0, 0, 0, 0],
        [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
        [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
    ]
)
ERR = np.array([71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

# continuous extension, rows = stages 1..7, cols = theta^1..theta^4
DENSE = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_MAX_STEPS = 2


@njit(cache=True)
def flow(z, U, J, eps, out):
    """Hamilton's equations; ``out`` receives dz/dt."""
    s1 = z[0] * z[0] + z[1] * z[1]
    s2 = z[2] * z[2] + z[3] * z[3]
    s3 = z[4] * z[4] + z[5] * z[5]
    S = s1 - s2 + s3
    t = J / math.sqrt(2.0)
    # dH/dx for x in (Q1, P1, Q2, P2, Q3, P3)
    g0 = U * S * z[0] - eps * z[0] + t * z[2]
    g1 = U * S * z[1] - eps * z[1] + t * z[3]
    g2 = -U * S * z[2] + t * (z[0] + z[4])
    g3 = -U * S * z[3] + t * (z[1] + z[5])
    g4 = U * S * z[4] + eps * z[4] + t * z[2]
    g5 = U * S * z[5] + eps * z[5] + t * z[3]
    out[0] = g1
    out[1] = -g0
    out[2] = g3
    out[3] = -g2
    out[4] = g5
    out[5] = -g4


@njit(cache=True)
def energy(z, U, J, eps):
    s1 = z[0] * z[0] + z[1] * z[1]
    s2 = z[2] * z[2] + z[3] * z[3]
    s3 = z[4] * z[4] + z[5] * z[5]
    S = s1 - s2 + s3
    hop = z[0] * z[2] + z[1] * z[3] + z[2] * z[4] + z[3] * z[5]
    return 0.25 * U * S * S + 0.5 * eps * (s3 - s1) + J / math.sqrt(2.0) * hop


@njit(cache=True)
def _stage(y, K, row, coef, h, ytmp):
    n = y.size
    for i in range(n):
        acc = 0.0
        for j in range(row):
            acc += coef[j] * K[j, i]
        ytmp[i] = y[i] + h * acc


@njit(cache=True)
def integrate(z0, U, J, eps, t_max, dt_sample, rtol, atol, h_init, max_steps, dense):
    """Integrate from t=0 to t_max, sampling every ``dt_sample``.

    With ``dense`` False only the final state is stored after the initial
    one. Returns ``(samples, n_filled, status, t_reached, n_accepted,
    n_rejected, max_step_energy_dev)``; the last entry is the largest energy
    deviation seen at accepted step ends.
    """
    n = z0.size
    if dense:
        n_samp = int(math.floor(t_max / dt_sample + 1e-9)) + 1
    else:
        n_samp = 2
    samples = np.empty((n_samp, n))
    samples[0, :] = z0
    filled = 1

    y = z0.copy()
    ynew = np.empty(n)
    ytmp = np.empty(n)
    K = np.empty((7, n))
    e0 = energy(z0, U, J, eps)
    max_dev = 0.0

    flow(y, U, J, eps, K[0])
    t = 0.0
    h = h_init if h_init > 0.0 else min(0.01, t_max)
    beta = 0.04
    expo1 = 0.2 - beta * 0.75
    facold = 1e-4
    safe = 0.9
    facmin, facmax = 0.2, 10.0
    n_acc = 0
    n_rej = 0
    status = STATUS_OK
    last_rejected = False

    while t < t_max:
        if n_acc + n_rej >= max_steps:
            status = STATUS_MAX_STEPS
            break
        if h < 1e-14 * max(abs(t), 1.0):
            status = STATUS_STEP_UNDERFLOW
            break
        final = t + h >= t_max * (1.0 - 1e-15)
        if final:
            h = t_max - t

        _stage(y, K, 1, A[0], h, ytmp)
        flow(ytmp, U, J, eps, K[1])
        _stage(y, K, 2, A[1], h, ytmp)
        flow(ytmp, U, J, eps, K[2])
        _stage(y, K, 3, A[2], h, ytmp)
        flow(ytmp, U, J, eps, K[3])
        _stage(y, K, 4, A[3], h, ytmp)
        flow(ytmp, U, J, eps, K[4])
        _stage(y, K, 5, A[4], h, ytmp)
        flow(ytmp, U, J, eps, K[5])
        _stage(y, K, 6, A[5], h, ynew)
        flow(ynew, U, J, eps, K[6])

        acc_err = 0.0
        for i in range(n):
            e = 0.0
            for j in range(7):
                e += ERR[j] * K[j, i]
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            r = h * e / sc
            acc_err += r * r
        en = math.sqrt(acc_err / n)

        fac11 = en**expo1
        if en <= 1.0:
            t_new = t_max if final else t + h
            while dense and filled < n_samp and (final or filled * dt_sample <= t_new):
                th = min((filled * dt_sample - t) / h, 1.0)
                th2 = th * th
                for i in range(n):
                    acc = 0.0
                    for j in range(7):
                        acc += K[j, i] * th * (
                            DENSE[j, 0] + th * DENSE[j, 1] + th2 * DENSE[j, 2] + th2 * th * DENSE[j, 3]
                        )
                    samples[filled, i] = y[i] + h * acc
                filled += 1
            t = t_new
            for i in range(n):
                y[i] = ynew[i]
                K[0, i] = K[6, i]
            dev = abs(energy(y, U, J, eps) - e0)
            if dev > max_dev:
                max_dev = dev
            n_acc += 1
            facold = max(en, 1e-4)
            fac = fac11 / facold**beta
            fac = max(1.0 / facmax, min(1.0 / facmin, fac / safe))
            h_next = h / fac
            if last_rejected:
                h_next = min(h_next, h)
            last_rejected = False
            h = h_next
        else:
            n_rej += 1
            last_rejected = True
            h = h / min(1.0 / facmin, fac11 / safe)

    if not dense:
        samples[1, :] = y
        filled = 2
    return samples, filled, status, t, n_acc, n_rej, max_dev
