"""Hot numeric kernels, each in a numba and a pure-numpy flavor.

The ``*_nb`` functions are compiled with numba, the ``*_np`` functions are
plain vectorized numpy. The unsuffixed names dispatch to one of them
according to :data:`qpcasimir._accel.USE_NUMBA` (environment flag
``QPCASIMIR_DISABLE_NUMBA``). Both flavors are kept importable so the
benchmark and the equivalence tests can call them side by side.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit

ZETA2 = math.pi**2 / 6.0
ZETA3 = 1.2020569031595942853997381615114
ZETA4 = math.pi**4 / 90.0
_H3 = 11.0 / 6.0

# zeta(4 - k) / k! for k = 4..19 (zeta at nonpositive integers via Bernoulli numbers)
_ZETA_NEG = {0: -0.5, 1: -1.0 / 12.0, 3: 1.0 / 120.0, 5: -1.0 / 252.0, 7: 1.0 / 240.0,
             9: -1.0 / 132.0, 11: 691.0 / 32760.0, 13: -1.0 / 12.0, 15: 3617.0 / 8160.0}
_LOG_SERIES = np.array([_ZETA_NEG.get(k - 4, 0.0) / math.factorial(k) for k in range(4, 20)])

# |x| at or below this uses the power series directly
_SERIES_CUT = 0.5
_TAIL_TOL = 1e-13


# ---------------------------------------------------------------- Li_4


@njit
def _li4_power_nb(x):
    total = 0.0
    xk = 1.0
    k = 0
    while True:
        k += 1
        xk *= x
        total += xk / (k * k * k * k)
        if abs(xk) / (3.0 * k * k * k) < _TAIL_TOL:
            return total


@njit
def _li4_log_nb(x, coeffs):
    # 0.5 < x <= 1, expansion in mu = ln x about x = 1
    if x == 1.0:
        return ZETA4
    mu = math.log(x)
    head = ZETA4 + ZETA3 * mu + 0.5 * ZETA2 * mu * mu
    head += mu * mu * mu / 6.0 * (_H3 - math.log(-mu))
    tail = 0.0
    mk = mu * mu * mu * mu
    for c in coeffs:
        tail += c * mk
        mk *= mu
    return head + tail


@njit
def _li4_nonneg_nb(x, coeffs):
    if x <= _SERIES_CUT:
        return _li4_power_nb(x)
    return _li4_log_nb(x, coeffs)


@njit
def li4_scalar_nb(x, coeffs):
    if x >= 0.0:
        return _li4_nonneg_nb(x, coeffs)
    if x >= -_SERIES_CUT:
        return _li4_power_nb(x)
    # Li4(-y) = Li4(y^2)/8 - Li4(y)
    y = -x
    return _li4_nonneg_nb(y * y, coeffs) / 8.0 - _li4_nonneg_nb(y, coeffs)


@njit
def li4_nb(x):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = li4_scalar_nb(x[i], _LOG_SERIES)
    return out


def _li4_power_np(x):
    total = np.zeros_like(x)
    xk = np.ones_like(x)
    amax = float(np.max(np.abs(x))) if x.size else 0.0
    k = 0
    while True:
        k += 1
        xk = xk * x
        total += xk / k**4
        if amax**k / (3.0 * k**3) < _TAIL_TOL:
            return total


def _li4_log_np(x):
    mu = np.log(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        logterm = np.where(mu < 0.0, mu**3 / 6.0 * (_H3 - np.log(-np.where(mu < 0.0, mu, -1.0))), 0.0)
    out = ZETA4 + ZETA3 * mu + 0.5 * ZETA2 * mu * mu + logterm
    mk = mu**4
    for c in _LOG_SERIES:
        out = out + c * mk
        mk = mk * mu
    return out


def _li4_nonneg_np(x):
    out = np.empty_like(x)
    small = x <= _SERIES_CUT
    out[small] = _li4_power_np(x[small])
    out[~small] = _li4_log_np(x[~small])
    return out


def li4_np(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    mid = np.abs(x) <= _SERIES_CUT
    out[mid] = _li4_power_np(x[mid])
    pos = x > _SERIES_CUT
    out[pos] = _li4_log_np(x[pos])
    neg = x < -_SERIES_CUT
    y = -x[neg]
    out[neg] = _li4_nonneg_np(y * y) / 8.0 - _li4_log_np(y)
    return out


# ------------------------------------------------- multiple-scattering determinant


@njit
def delta_total_nb(r, t2, q):
    """Composition sum of the scattering determinant at each column.

    ``r`` and ``t2`` have shape (N, M): reflection amplitude and squared
    transmission amplitude per plate; ``q`` has shape (N-1, M): round-trip
    gap factor ``exp(-2 kappa l)`` per gap.
    """
    n, m = r.shape
    out = np.empty(m)
    partial = np.empty(n)
    for p in range(m):
        partial[0] = 1.0
        for k in range(1, n):
            acc = (1.0 - r[k - 1, p] * r[k, p] * q[k - 1, p]) * partial[k - 1]
            path = q[k - 1, p]
            for j in range(k - 2, -1, -1):
                path *= t2[j + 1, p] * q[j, p]
                acc -= partial[j] * r[j, p] * r[k, p] * path
            partial[k] = acc
        out[p] = partial[n - 1]
    return out


def delta_total_np(r, t2, q):
    r = np.asarray(r, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    q = np.asarray(q, dtype=float)
    n = r.shape[0]
    partial = [np.ones(r.shape[1:])]
    for k in range(1, n):
        acc = (1.0 - r[k - 1] * r[k] * q[k - 1]) * partial[k - 1]
        path = q[k - 1]
        for j in range(k - 2, -1, -1):
            path = path * t2[j + 1] * q[j]
            acc = acc - partial[j] * r[j] * r[k] * path
        partial.append(acc)
    return partial[-1]


@njit
def delta_oracle_nb(r, t, q):
    """Transfer-matrix evaluation of the same determinant (division-free form).

    Each plate contributes ``[[t^2 - r^2, r], [-r, 1]]`` and each gap
    ``diag(q, 1)``; the determinant is the (2, 2) element of the ordered product.
    """
    n, m = r.shape
    out = np.empty(m)
    for p in range(m):
        a11 = t[0, p] * t[0, p] - r[0, p] * r[0, p]
        a12 = r[0, p]
        a21 = -r[0, p]
        a22 = 1.0
        for k in range(1, n):
            g = q[k - 1, p]
            a11 *= g
            a12 *= g
            m11 = t[k, p] * t[k, p] - r[k, p] * r[k, p]
            m12 = r[k, p]
            m21 = -r[k, p]
            b11 = m11 * a11 + m12 * a21
            b12 = m11 * a12 + m12 * a22
            b21 = m21 * a11 + a21
            b22 = m21 * a12 + a22
            a11, a12, a21, a22 = b11, b12, b21, b22
        out[p] = a22
    return out


def delta_oracle_np(r, t, q):
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    q = np.asarray(q, dtype=float)
    a11 = t[0] ** 2 - r[0] ** 2
    a12 = r[0]
    a21 = -r[0]
    a22 = np.ones_like(a12)
    for k in range(1, r.shape[0]):
        a11 = a11 * q[k - 1]
        a12 = a12 * q[k - 1]
        m11 = t[k] ** 2 - r[k] ** 2
        a11, a12, a21, a22 = (
            m11 * a11 + r[k] * a21,
            m11 * a12 + r[k] * a22,
            -r[k] * a11 + a21,
            -r[k] * a12 + a22,
        )
    return a22


if USE_NUMBA:
    delta_total = delta_total_nb
    delta_oracle = delta_oracle_nb

    def li4(x):
        x = np.asarray(x, dtype=float)
        return li4_nb(x.ravel()).reshape(x.shape)

else:
    delta_total = delta_total_np
    delta_oracle = delta_oracle_np
    li4 = li4_np
