# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Same contracts as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, log1p, exp, INFINITY, isfinite, M_PI
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef double LOG_2PI = log(2.0 * M_PI)

KIND_GAUSSIAN = 0
KIND_BERNOULLI = 1
KIND_BIEXP = 2


def log_normalize_rows(logp):
    cdef const double[:, ::1] lp = np.ascontiguousarray(logp, dtype=np.float64)
    cdef Py_ssize_t m = lp.shape[0], r = lp.shape[1], i, x
    phi_arr = np.empty((m, r), dtype=np.float64)
    lse_arr = np.empty(m, dtype=np.float64)
    cdef double[:, ::1] phi = phi_arr
    cdef double[::1] lse = lse_arr
    cdef double top, s, e
    for i in range(m):
        top = -INFINITY
        for x in range(r):
            if lp[i, x] > top:
                top = lp[i, x]
        if not isfinite(top):
            lse[i] = -INFINITY if top < 0 else INFINITY
            for x in range(r):
                phi[i, x] = np.nan
            continue
        s = 0.0
        for x in range(r):
            e = exp(lp[i, x] - top)
            phi[i, x] = e
            s += e
        for x in range(r):
            phi[i, x] /= s
        lse[i] = top + log(s)
    return phi_arr, lse_arr


cdef struct ScanResult:
    Py_ssize_t k
    double value
    double p
    double a_left
    double a_right
    double lam_left
    double lam_right


cdef ScanResult _scan(const double *v, const double *w, Py_ssize_t m,
                      double alpha, double lambda_cap, bint exclude_flat, double *d_right) nogil:
    # d_right and w_right each take m + 1 slots of the scratch buffer
    cdef double mass = 0.0, tail = 0.0
    cdef Py_ssize_t i, k
    for i in range(m):
        mass += w[i]
    # d_right[k] = sum_{i>=k} w_i (v_i - v_k)
    cdef double *w_right = d_right + m + 1
    d_right[m] = 0.0
    d_right[m - 1] = 0.0
    w_right[m] = 0.0
    w_right[m - 1] = w[m - 1]
    tail = w[m - 1]
    i = m - 2
    while i >= 0:
        d_right[i] = d_right[i + 1] + tail * (v[i + 1] - v[i])
        tail += w[i]
        w_right[i] = tail
        i -= 1

    cdef ScanResult best
    best.value = INFINITY
    best.k = 0
    # wl: mass of the first k points; wl_prev: of the first k - 1
    cdef double wl = 0.0, wl_prev = 0.0, wr, dl = 0.0, dr, p, lam_l, lam_r, ll, obj
    cdef double best_lam_l = 1.0, best_lam_r = 1.0, best_p = 0.5
    cdef bint flat, found_spread = False
    for k in range(m + 1):
        if k >= 2:
            dl += wl_prev * (v[k - 1] - v[k - 2])
        wr = w_right[k]
        if k == m:
            wl = mass
        dr = d_right[k]
        p = wr / mass
        if p < alpha:
            p = alpha
        elif p > 1.0 - alpha:
            p = 1.0 - alpha
        lam_l = wl / dl if dl > 0 else lambda_cap
        if lam_l > lambda_cap:
            lam_l = lambda_cap
        lam_r = wr / dr if dr > 0 else lambda_cap
        if lam_r > lambda_cap:
            lam_r = lambda_cap
        ll = 0.0
        if wl > 0:
            ll += wl * (log1p(-p) + log(lam_l)) - lam_l * dl
        if wr > 0:
            ll += wr * (log(p) + log(lam_r)) - lam_r * dr
        obj = -ll / mass
        # a non-empty side needs positive spread; flat splits only when nothing else exists
        flat = exclude_flat and ((wl > 0 and dl <= 0) or (wr > 0 and dr <= 0))
        if not flat and not found_spread:
            found_spread = True
            best.value = INFINITY
        if (not flat or not found_spread) and obj < best.value:
            best.value = obj
            best.k = k
            best_p = p
            best_lam_l = lam_l
            best_lam_r = lam_r
        if k < m:
            wl_prev = wl
            wl += w[k]

    best.p = best_p
    if best.k == 0:
        best.a_right = v[0]
        best.a_left = v[0] - 1.0
        best.lam_left = 1.0
        best.lam_right = best_lam_r
    elif best.k == m:
        best.a_left = v[m - 1]
        best.a_right = v[m - 1] + 1.0
        best.lam_left = best_lam_l
        best.lam_right = 1.0
    else:
        best.a_left = v[best.k - 1]
        best.a_right = v[best.k]
        best.lam_left = best_lam_l
        best.lam_right = best_lam_r
    return best


def biexp_scan(values, weights, double alpha, double lambda_cap, bint exclude_flat=True):
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef const double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t m = v.shape[0]
    cdef double[::1] scratch = np.empty(2 * (m + 1), dtype=np.float64)
    cdef ScanResult res
    with nogil:
        res = _scan(&v[0], &w[0], m, alpha, lambda_cap, exclude_flat, &scratch[0])
    return (int(res.k), res.value, res.p, res.a_left, res.a_right,
            res.lam_left, res.lam_right)


cdef double _criterion(const double *values, const long long *counts, const long long *lab,
                       Py_ssize_t m, Py_ssize_t r, int kind, double floor,
                       double alpha, double lambda_cap, bint exclude, bint exclude_flat,
                       double *nx, double *sx, double *qx,
                       double *sv, double *sw, double *scratch) nogil:
    cdef Py_ssize_t i, x, c
    cdef double n = 0.0, total = 0.0, nu, mean, var, s2, q, h
    cdef ScanResult res
    for x in range(r):
        nx[x] = 0.0
        sx[x] = 0.0
        qx[x] = 0.0
    for i in range(m):
        n += counts[i]
        nx[lab[i]] += counts[i]
        sx[lab[i]] += counts[i] * values[i]
    if kind == 0:
        for i in range(m):
            x = lab[i]
            mean = sx[x] / nx[x]
            qx[x] += counts[i] * (values[i] - mean) * (values[i] - mean)
        for x in range(r):
            if nx[x] > 0:
                nu = nx[x] / n
                var = qx[x] / nx[x]
                if exclude and var < floor:
                    return INFINITY
                s2 = var if var > floor else floor
                total += nu * (0.5 * (LOG_2PI + log(s2) + var / s2) - log(nu))
    elif kind == 1:
        for x in range(r):
            if nx[x] > 0:
                nu = nx[x] / n
                # sx holds the count of ones since values are 0/1
                q = sx[x] / nx[x]
                h = 0.0
                if q > 0:
                    h -= q * log(q)
                if q < 1:
                    h -= (1.0 - q) * log1p(-q)
                total += nu * (h - log(nu))
    else:
        for x in range(r):
            if nx[x] <= 0:
                continue
            c = 0
            for i in range(m):
                if lab[i] == x:
                    sv[c] = values[i]
                    sw[c] = counts[i]
                    c += 1
            res = _scan(sv, sw, c, alpha, lambda_cap, exclude_flat, scratch)
            if exclude and (res.lam_left >= lambda_cap or res.lam_right >= lambda_cap):
                return INFINITY
            nu = nx[x] / n
            total += nu * (res.value - log(nu))
    return total


def enumerate_min(values, counts, int r, int kind, double floor, double alpha,
                  double lambda_cap, double slack, bint exclude_degenerate=False,
                  bint exclude_flat=True):
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef const long long[::1] cnt = np.ascontiguousarray(counts, dtype=np.int64)
    cdef Py_ssize_t m = v.shape[0], i, j
    cdef long long[::1] lab = np.zeros(m, dtype=np.int64)
    cdef long long[::1] pmax = np.zeros(m, dtype=np.int64)  # pmax[i] = max(lab[0..i-1])
    cdef double[::1] work = np.empty(3 * r + 4 * (m + 1), dtype=np.float64)
    cdef double best = INFINITY, crit
    cdef bint done = False
    cand = []
    cand_vals = []
    while not done:
        crit = _criterion(&v[0], &cnt[0], &lab[0], m, r, kind, floor, alpha, lambda_cap,
                          exclude_degenerate, exclude_flat,
                          &work[0], &work[r], &work[2 * r],
                          &work[3 * r], &work[3 * r + m + 1], &work[3 * r + 2 * (m + 1)])
        if crit < best:
            best = crit
        if isfinite(crit) and crit <= best + slack:
            cand.append(np.asarray(lab).copy())
            cand_vals.append(crit)
        # advance to the next restricted-growth string
        done = True
        i = m - 1
        while i >= 1:
            if lab[i] <= pmax[i] and lab[i] < r - 1:
                lab[i] += 1
                for j in range(i + 1, m):
                    lab[j] = 0
                    pmax[j] = pmax[j - 1] if pmax[j - 1] > lab[j - 1] else lab[j - 1]
                done = False
                break
            i -= 1
    cv = np.asarray(cand_vals)
    labs = np.asarray(cand, dtype=np.int64).reshape(-1, m)
    return best, labs[cv <= best + slack]
