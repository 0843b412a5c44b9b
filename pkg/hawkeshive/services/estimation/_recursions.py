"""
Compiled inner loops for likelihood-based estimators.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def exponential_sums(times, comps, sources, betas):
    """Exponential history sums at every event, ties excluded.

    For every event m and exponential component r with source type sources[r]:
        A[m, r] = Σ_{n: t_n < t_m, k_n = sources[r]} exp(-β_r (t_m - t_n))
        B[m, r] = Σ_{n: t_n < t_m, k_n = sources[r]} (t_m - t_n) exp(-β_r (t_m - t_n))
        C[m, r] = #{n: t_n < t_m, k_n = sources[r]}
    """
    n_events = times.shape[0]
    n_comp = betas.shape[0]
    A = np.zeros((n_events, n_comp))
    B = np.zeros((n_events, n_comp))
    C = np.zeros((n_events, n_comp))
    a = np.zeros(n_comp)
    b = np.zeros(n_comp)
    c = np.zeros(n_comp)
    pending = np.zeros(n_comp)
    for m in range(n_events):
        if m > 0 and times[m] > times[m - 1]:
            dt = times[m] - times[m - 1]
            for r in range(n_comp):
                decay = np.exp(-betas[r] * dt)
                folded = a[r] + pending[r]
                b[r] = decay * (b[r] + dt * folded)
                a[r] = decay * folded
                c[r] += pending[r]
                pending[r] = 0.0
        for r in range(n_comp):
            A[m, r] = a[r]
            B[m, r] = b[r]
            C[m, r] = c[r]
            if comps[m] == sources[r]:
                pending[r] += 1.0
    return A, B, C


@njit(cache=True, nogil=True)
def power_law_intensity(times, comps, mu, alpha, beta, gamma, max_lag):
    """Linear intensity λ_{k_m}(t_m) of a power-law model, history truncated at ``max_lag``."""
    n_events = times.shape[0]
    lam = np.empty(n_events)
    lo = 0
    for m in range(n_events):
        t = times[m]
        i = comps[m]
        while times[lo] < t - max_lag:
            lo += 1
        acc = mu[i]
        for n in range(lo, m):
            lag = t - times[n]
            if lag <= 0.0:
                continue
            j = comps[n]
            acc += alpha[i, j] * beta[i, j] * (1.0 + beta[i, j] * lag) ** (-1.0 - gamma[i, j])
        lam[m] = acc
    return lam
