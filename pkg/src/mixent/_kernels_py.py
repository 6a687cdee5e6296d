"""Pure-Python/numpy implementations of the hot kernels.

Mirrors the signatures in ``_kernels.pyx`` exactly; :mod:`mixent.kernels`
picks whichever is available.
"""

from __future__ import annotations

import math

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)

KIND_GAUSSIAN = 0
KIND_BERNOULLI = 1
KIND_BIEXP = 2


def log_normalize_rows(logp):
    """Row-wise softmax of a (m, r) log-weight matrix.

    Returns ``(phi, lse)`` where ``lse[i] = log sum_x exp(logp[i, x])``.
    Rows that are entirely ``-inf`` get ``lse = -inf`` and a row of NaN.
    """
    logp = np.asarray(logp, dtype=float)
    top = logp.max(axis=1)
    finite = np.isfinite(top)
    shift = np.where(finite, top, 0.0)
    with np.errstate(invalid="ignore"):
        e = np.exp(logp - shift[:, None])
    s = e.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = e / s[:, None]
        lse = np.where(finite, shift + np.log(s), -np.inf)
    return phi, lse


def biexp_scan(values, weights, alpha, lambda_cap, exclude_flat=True):
    """Best left/right split of a sorted weighted support for the bi-exponential family.

    ``values`` must be strictly increasing and ``weights`` positive. Split ``k``
    puts the first ``k`` points on the left branch. Returns
    ``(k, value, p, a_left, a_right, lambda_left, lambda_right)`` where
    ``value`` is the normalized cross entropy attained. With ``exclude_flat``
    a split leaving a non-empty side without spread is used only when every
    split does so.
    """
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    m = v.size
    mass = w.sum()
    gaps = np.diff(v)

    # w_left[k]: mass of the first k points, k = 0..m
    w_left = np.concatenate(([0.0], np.cumsum(w)))
    w_left[-1] = mass
    # suffix sums: subtracting from the total can cancel to zero or below
    w_right = np.concatenate((np.cumsum(w[::-1])[::-1], [0.0]))

    # d_left[k] = sum_{i<k} w_i (v[k-1] - v_i), accumulated without cancellation
    d_left = np.zeros(m + 1)
    if m > 1:
        d_left[2:] = np.cumsum(w_left[1:m] * gaps)
    # d_right[k] = sum_{i>=k} w_i (v_i - v[k])
    d_right = np.zeros(m + 1)
    if m > 1:
        tail_w = np.cumsum(w[::-1])[::-1]  # tail_w[j] = sum_{i>=j} w_i
        d_right[: m - 1] = np.cumsum((tail_w[1:] * gaps)[::-1])[::-1]

    p = np.clip(w_right / mass, alpha, 1.0 - alpha)
    with np.errstate(divide="ignore", invalid="ignore"):
        lam_l = np.where(d_left > 0, w_left / d_left, lambda_cap)
        lam_r = np.where(d_right > 0, w_right / d_right, lambda_cap)
    lam_l = np.minimum(lam_l, lambda_cap)
    lam_r = np.minimum(lam_r, lambda_cap)

    ll = np.zeros(m + 1)
    has_l = w_left > 0
    has_r = w_right > 0
    ll[has_l] += w_left[has_l] * (np.log1p(-p[has_l]) + np.log(lam_l[has_l])) - lam_l[has_l] * d_left[has_l]
    ll[has_r] += w_right[has_r] * (np.log(p[has_r]) + np.log(lam_r[has_r])) - lam_r[has_r] * d_right[has_r]
    obj = -ll / mass
    # a non-empty side needs positive spread; otherwise its rate is only the cap
    flat = (has_l & (d_left <= 0)) | (has_r & (d_right <= 0))
    if exclude_flat and not flat.all():
        obj[flat] = np.inf
    k = int(np.argmin(obj))

    if k == 0:
        a_r = v[0]
        a_l = a_r - 1.0
        lam_left = 1.0
        lam_right = float(lam_r[0])
    elif k == m:
        a_l = v[-1]
        a_r = a_l + 1.0
        lam_left = float(lam_l[m])
        lam_right = 1.0
    else:
        a_l = v[k - 1]
        a_r = v[k]
        lam_left = float(lam_l[k])
        lam_right = float(lam_r[k])
    return k, float(obj[k]), float(p[k]), float(a_l), float(a_r), lam_left, lam_right


def _rgs_block(m, r, start, stop):
    """Labelings with indices [start, stop) in base-r order, filtered to
    restricted-growth strings (label of each value <= 1 + max of previous)."""
    idx = np.arange(start, stop, dtype=np.int64)
    lab = np.empty((idx.size, m), dtype=np.int64)
    rem = idx.copy()
    for j in range(m - 1, -1, -1):
        lab[:, j] = rem % r
        rem //= r
    prev_max = np.maximum.accumulate(lab, axis=1)
    ok = lab[:, 0] == 0
    if m > 1:
        ok &= np.all(lab[:, 1:] <= prev_max[:, :-1] + 1, axis=1)
    return lab[ok]


def _criteria_gaussian(lab, values, counts, r, floor, exclude):
    n = counts.sum()
    onehot = lab[:, :, None] == np.arange(r)[None, None, :]  # (N, m, r)
    cw = onehot * counts[None, :, None]
    nx = cw.sum(axis=1)  # (N, r)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = (cw * values[None, :, None]).sum(axis=1) / nx
        dev = values[None, :, None] - mean[:, None, :]
        var = (cw * dev * dev).sum(axis=1) / nx
        s2 = np.maximum(var, floor)
        ce = 0.5 * (LOG_2PI + np.log(s2) + var / s2)
        nu = nx / n
        term = np.where(nx > 0, nu * (ce - np.log(nu)), 0.0)
    out = term.sum(axis=1)
    if exclude:
        out[np.any((nx > 0) & (var < floor), axis=1)] = math.inf
    return out


def _criteria_bernoulli(lab, values, counts, r):
    n = counts.sum()
    onehot = lab[:, :, None] == np.arange(r)[None, None, :]
    cw = onehot * counts[None, :, None]
    nx = cw.sum(axis=1)
    ones = (cw * (values[None, :, None] == 1.0)).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        q = ones / nx
        h = -(np.where(q > 0, q * np.log(q), 0.0) + np.where(q < 1, (1 - q) * np.log1p(-q), 0.0))
        nu = nx / n
        term = np.where(nx > 0, nu * (h - np.log(nu)), 0.0)
    return term.sum(axis=1)


def _criterion_biexp_one(labels, values, counts, r, alpha, lambda_cap, exclude, exclude_flat):
    n = counts.sum()
    total = 0.0
    for x in range(r):
        sel = labels == x
        if not sel.any():
            continue
        c = counts[sel]
        nu = c.sum() / n
        res = biexp_scan(values[sel], c.astype(float), alpha, lambda_cap, exclude_flat)
        if exclude and max(res[5], res[6]) >= lambda_cap:
            return math.inf
        val = res[1]
        total += nu * (val - math.log(nu))
    return total


def enumerate_min(values, counts, r, kind, floor, alpha, lambda_cap, slack, exclude_degenerate=False, exclude_flat=True):
    """Scan every restricted-growth labeling of ``values`` into at most ``r`` classes.

    Returns ``(best, candidates)`` where ``candidates`` is an (K, m) int array
    of labelings whose criterion is within ``slack`` of ``best``. With
    ``exclude_degenerate`` a labeling with a class on the variance floor or
    rate cap scores ``inf``; if all do, ``best`` is ``inf`` and no candidate
    is returned.
    """
    values = np.asarray(values, dtype=float)
    counts = np.asarray(counts, dtype=np.int64)
    m = values.size
    total = r**m
    chunk = 1 << 16
    best = math.inf
    keep: list[np.ndarray] = []
    keep_vals: list[np.ndarray] = []
    for start in range(0, total, chunk):
        lab = _rgs_block(m, r, start, min(total, start + chunk))
        if lab.size == 0:
            continue
        if kind == KIND_GAUSSIAN:
            crit = _criteria_gaussian(lab, values, counts, r, floor, exclude_degenerate)
        elif kind == KIND_BERNOULLI:
            crit = _criteria_bernoulli(lab, values, counts, r)
        else:
            crit = np.array(
                [_criterion_biexp_one(l, values, counts, r, alpha, lambda_cap, exclude_degenerate, exclude_flat) for l in lab]
            )
        lo = crit.min()
        if lo < best:
            best = float(lo)
        sel = np.isfinite(crit) & (crit <= best + slack)
        if sel.any():
            keep.append(lab[sel])
            keep_vals.append(crit[sel])
    if not keep:
        return best, np.empty((0, m), dtype=np.int64)
    labs = np.concatenate(keep)
    vals = np.concatenate(keep_vals)
    return best, labs[vals <= best + slack]
