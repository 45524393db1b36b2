"""Hot numeric kernels: Madgwick fusion loop and the beta-GLM MCMC chain.

Every kernel is written in nopython-compatible style and compiled with
numba unless ``GAITPIPE_NO_NUMBA=1`` is set, in which case the same
functions run as plain python/numpy (see ``benchmarks/bench_kernels.py``
for the speed comparison).
"""
from __future__ import annotations

import math

import numpy as np

from .accel import maybe_njit


# ---------------------------------------------------------------------------
# Madgwick orientation filter (accelerometer + gyroscope, no magnetometer)

def _madgwick_batch_impl(accel, gyro, dt, beta, q0):
    n = accel.shape[0]
    out = np.empty((n, 4))
    q0w, q0x, q0y, q0z = q0[0], q0[1], q0[2], q0[3]
    w, x, y, z = q0w, q0x, q0y, q0z
    for i in range(n):
        gx, gy, gz = gyro[i, 0], gyro[i, 1], gyro[i, 2]
        # quaternion rate from gyroscope
        qdw = 0.5 * (-x * gx - y * gy - z * gz)
        qdx = 0.5 * (w * gx + y * gz - z * gy)
        qdy = 0.5 * (w * gy - x * gz + z * gx)
        qdz = 0.5 * (w * gz + x * gy - y * gx)

        ax, ay, az = accel[i, 0], accel[i, 1], accel[i, 2]
        anorm = math.sqrt(ax * ax + ay * ay + az * az)
        if anorm > 1e-12:
            ax /= anorm
            ay /= anorm
            az /= anorm
            # gradient of the gravity-alignment objective
            f1 = 2.0 * (x * z - w * y) - ax
            f2 = 2.0 * (w * x + y * z) - ay
            f3 = 2.0 * (0.5 - x * x - y * y) - az
            sw = -2.0 * y * f1 + 2.0 * x * f2
            sx = 2.0 * z * f1 + 2.0 * w * f2 - 4.0 * x * f3
            sy = -2.0 * w * f1 + 2.0 * z * f2 - 4.0 * y * f3
            sz = 2.0 * x * f1 + 2.0 * y * f2
            snorm = math.sqrt(sw * sw + sx * sx + sy * sy + sz * sz)
            if snorm > 1e-12:
                qdw -= beta * sw / snorm
                qdx -= beta * sx / snorm
                qdy -= beta * sy / snorm
                qdz -= beta * sz / snorm

        w += qdw * dt
        x += qdx * dt
        y += qdy * dt
        z += qdz * dt
        qn = math.sqrt(w * w + x * x + y * y + z * z)
        w /= qn
        x /= qn
        y /= qn
        z /= qn
        out[i, 0] = w
        out[i, 1] = x
        out[i, 2] = y
        out[i, 3] = z
    return out


madgwick_batch = maybe_njit(_madgwick_batch_impl)


# ---------------------------------------------------------------------------
# Beta regression GLM with ordinal disease effect and subject intercepts
#
# Unconstrained parameter vector layout (dim = 14 + n_sub):
#   0  log kappa
#   1  a (intercept)            2  b (age)
#   3  s_female                 4  s_male
#   5  d (total disease effect)
#   6  z1, 7 z2 (stick-breaking coords of the 3-simplex increments)
#   8  mu_sub                   9  log sigma_sub
#   10 e_indoor                 11 e_outdoor
#   12 h_with_aid               13 h_without_aid
#   14.. standardized subject intercepts u_raw[j]
#
# Subject intercepts are non-centered: u[j] = mu_sub + sigma_sub * u_raw[j]
# with u_raw ~ Normal(0, 1), which is the same model as
# u ~ Normal(mu_sub, sigma_sub) but mixes without the funnel between
# sigma_sub and the intercepts.

N_GLOBAL = 14

LOG_2PI = math.log(2.0 * math.pi)


def _delta_cumsums(z1, z2):
    v1 = 1.0 / (1.0 + math.exp(-z1))
    v2 = 1.0 / (1.0 + math.exp(-z2))
    d1 = v1
    d2 = (1.0 - v1) * v2
    # cumulative ordinal weights for disease levels 0..3
    return 0.0, d1, d1 + d2, 1.0


_delta_cumsums_jit = maybe_njit(_delta_cumsums)


def _loglik_range_impl(theta, f1, age, sex, dis, sub, env, aid, lo, hi):
    kappa = math.exp(theta[0])
    a = theta[1]
    b = theta[2]
    mu_sub = theta[8]
    sigma_sub = math.exp(theta[9])
    c0, c1, c2, c3 = _delta_cumsums_jit(theta[6], theta[7])
    total = 0.0
    for i in range(lo, hi):
        eta = a + b * age[i] + theta[3 + sex[i]] + theta[10 + env[i]] \
            + theta[12 + aid[i]] \
            + mu_sub + sigma_sub * theta[N_GLOBAL + sub[i]]
        di = dis[i]
        if di == 1:
            eta += theta[5] * c1
        elif di == 2:
            eta += theta[5] * c2
        elif di == 3:
            eta += theta[5] * c3
        mu = 1.0 / (1.0 + math.exp(-eta))
        al = mu * kappa
        be = (1.0 - mu) * kappa
        total += (al - 1.0) * math.log(f1[i]) + (be - 1.0) * math.log(1.0 - f1[i]) \
            + math.lgamma(kappa) - math.lgamma(al) - math.lgamma(be)
    return total


loglik_range = maybe_njit(_loglik_range_impl)


def _logprior_impl(theta, n_sub, prior_scale):
    lk = theta[0]
    kappa = math.exp(lk)
    lp = math.log(2.0 / (math.pi * 20.0)) - math.log1p((kappa / 20.0) ** 2) + lk

    # a ~ Normal(1, 1)
    lp += -0.5 * (theta[1] - 1.0) ** 2 - 0.5 * LOG_2PI

    s2 = prior_scale * prior_scale
    lognorm = -0.5 * LOG_2PI - math.log(prior_scale)
    # b, s_sex, d, mu_sub, e, h ~ Normal(0, prior_scale)
    for j in (2, 3, 4, 5, 8, 10, 11, 12, 13):
        lp += lognorm - 0.5 * theta[j] * theta[j] / s2

    ls = theta[9]
    sigma_sub = math.exp(ls)
    lp += math.log(2.0 / (math.pi * prior_scale)) \
        - math.log1p((sigma_sub / prior_scale) ** 2) + ls

    # Dirichlet(1,1,1) on the increments is flat; add the stick-breaking
    # Jacobian of (z1, z2) -> (delta1, delta2)
    v1 = 1.0 / (1.0 + math.exp(-theta[6]))
    v2 = 1.0 / (1.0 + math.exp(-theta[7]))
    lp += math.log(math.gamma(3.0))
    lp += math.log(v1 * (1.0 - v1)) + math.log((1.0 - v1) * v2 * (1.0 - v2))

    for j in range(n_sub):
        u = theta[N_GLOBAL + j]
        lp += -0.5 * LOG_2PI - 0.5 * u * u
    return lp


logprior = maybe_njit(_logprior_impl)


def _logpost_impl(theta, f1, age, sex, dis, sub, env, aid, n_sub, prior_scale):
    n = f1.shape[0]
    return loglik_range(theta, f1, age, sex, dis, sub, env, aid, 0, n) \
        + logprior(theta, n_sub, prior_scale)


logpost = maybe_njit(_logpost_impl)


def _chain_impl(theta0, step0, n_warmup, n_draws, seed,
                f1, age, sex, dis, sub, env, aid, sub_starts, prior_scale):
    np.random.seed(seed)
    dim = theta0.shape[0]
    n_sub = dim - N_GLOBAL
    n_obs = f1.shape[0]
    theta = theta0.copy()
    steps = step0.copy()

    cur_ll = loglik_range(theta, f1, age, sex, dis, sub, env, aid, 0, n_obs)
    cur_lp = logprior(theta, n_sub, prior_scale)

    draws = np.empty((n_draws, dim))
    win_acc = np.zeros(dim)
    win_try = np.zeros(dim)
    kept_acc = 0.0
    kept_try = 0.0

    for it in range(n_warmup + n_draws):
        in_warmup = it < n_warmup
        # global parameters: full-likelihood Metropolis per coordinate
        for j in range(N_GLOBAL):
            old = theta[j]
            theta[j] = old + steps[j] * np.random.normal()
            new_ll = loglik_range(theta, f1, age, sex, dis, sub, env, aid, 0, n_obs)
            new_lp = logprior(theta, n_sub, prior_scale)
            win_try[j] += 1.0
            if math.log(np.random.random()) < (new_ll + new_lp) - (cur_ll + cur_lp):
                cur_ll = new_ll
                cur_lp = new_lp
                win_acc[j] += 1.0
            else:
                theta[j] = old
        # subject intercepts: only that subject's observations change
        for j in range(n_sub):
            idx = N_GLOBAL + j
            lo = sub_starts[j]
            hi = sub_starts[j + 1]
            old = theta[idx]
            old_ll_j = loglik_range(theta, f1, age, sex, dis, sub, env, aid, lo, hi)
            theta[idx] = old + steps[idx] * np.random.normal()
            new_ll_j = loglik_range(theta, f1, age, sex, dis, sub, env, aid, lo, hi)
            new_lp = logprior(theta, n_sub, prior_scale)
            win_try[idx] += 1.0
            if math.log(np.random.random()) < (new_ll_j - old_ll_j) + (new_lp - cur_lp):
                cur_ll += new_ll_j - old_ll_j
                cur_lp = new_lp
                win_acc[idx] += 1.0
            else:
                theta[idx] = old
        if in_warmup:
            if (it + 1) % 25 == 0:
                for j in range(dim):
                    if win_try[j] > 0:
                        rate = win_acc[j] / win_try[j]
                        steps[j] *= math.exp(rate - 0.44)
                        if steps[j] < 1e-6:
                            steps[j] = 1e-6
                        elif steps[j] > 10.0:
                            steps[j] = 10.0
                    win_acc[j] = 0.0
                    win_try[j] = 0.0
        else:
            kept_acc += win_acc.sum()
            kept_try += win_try.sum()
            win_acc[:] = 0.0
            win_try[:] = 0.0
            draws[it - n_warmup] = theta

    accept_rate = kept_acc / kept_try if kept_try > 0 else 0.0
    return draws, accept_rate


chain = maybe_njit(_chain_impl)
