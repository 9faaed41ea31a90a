"""Casimir energies of plate stacks, scaled by the ideal two-conductor energy.

Every value is ``E / |E(D'D')|`` with ``|E(D'D')| / A = pi^2 / (720 a^3)``
(natural units), where ``a`` is the reference spacing. Four routes exist:

* ideal words: exact sum of ``-1`` per like and ``+7/8`` per unlike pair;
* two finite plates: one t-integral of ``Li4`` of reflection products;
* three finite plates: the same with the two roots of the quadratic in
  ``exp(-s)`` inside the logarithm;
* anything else: nested (t, s) quadrature of ``ln Delta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import ConfigError, NumericalError
from .lattice import NeighborhoodStats, Word, iterate, pair_counts, stats
from .optics import Mode, Plate, PlateKind, mode_arrays, plate_for_symbol
from .quadrature import integrate
from .scattering import MAX_EXPANSION_PLATES, Stack, delta_total_arrays, stack_arrays

IDEAL = "ideal-closed-form"
POLYLOG_N2 = "polylog-N2"
POLYLOG_N3 = "polylog-N3"
QUADRATURE = "quadrature"
METHODS = (IDEAL, POLYLOG_N2, POLYLOG_N3, QUADRATURE)

# |E(D'D')| a^3 / A
DD_ENERGY_SCALE = math.pi**2 / 720.0
LIKE_PAIR = Fraction(-1)
UNLIKE_PAIR = Fraction(7, 8)

_LI4_FACTOR = 45.0 / math.pi**4
_LOG_FACTOR = 45.0 / (2.0 * math.pi**4)

# s = 2 kappa a; past S_CUT * a / l_min the integrand is below exp(-S_CUT)
S_CUT = 60.0
_S_BREAKS = (0.25, 1.0, 4.0, 16.0)
_T_BREAKS = (0.05, 0.25)

DEFAULT_EPSABS = 1e-9
DEFAULT_SIGMA_GRID = (1e-2, 1e4, 60)


@dataclass(frozen=True)
class EnergyResult:
    """Scaled energy of one configuration.

    Attributes
    ----------
    value : float
        Energy over ``|E(D'D')|`` at the reference spacing.
    abs_error : float
        Error estimate (zero for closed forms).
    method : str
        One of :data:`METHODS`.
    exact : Fraction or None
        Rational value for ideal words.
    """

    value: float
    abs_error: float
    method: str
    n_plates: int
    sigma: float | None = None
    spacing: float = 1.0
    exact: Fraction | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown energy method {self.method!r}")
        if not self.abs_error >= 0.0:
            raise ConfigError("abs_error must be nonnegative")

    @property
    def raw(self):
        """Energy per unit area in natural units (negative means attraction)."""
        return self.value * DD_ENERGY_SCALE / self.spacing**3

    @property
    def raw_error(self):
        return self.abs_error * DD_ENERGY_SCALE / self.spacing**3


@dataclass(frozen=True)
class GrowthFit:
    """Least-squares fit ``E(I) ~ prefactor * exp(rate * I)``."""

    prefactor: float
    rate: float
    window: tuple
    residual: float
    ratios: tuple
    n_points: int


class FitRefused(ConfigError):
    """Raised for fits over energies of mixed sign; ``ratios`` is still filled in."""

    def __init__(self, message, ratios):
        super().__init__(message)
        self.ratios = ratios


# ---------------------------------------------------------------- polylog


def li4(x):
    """Polylogarithm of order four on ``[-1, 1]``.

    Scalars give floats, arrays give arrays. Accurate to about 1e-15.

    >>> round(li4(1.0) * 90 / 3.141592653589793**4, 12)
    1.0
    """
    arr = np.asarray(x, dtype=float)
    if np.any(np.abs(arr) > 1.0) or np.any(np.isnan(arr)):
        raise ConfigError("li4 is implemented on [-1, 1] only")
    out = kernels.li4(arr)
    return float(out) if arr.ndim == 0 else out


def li4_series(x, tail_tol=1e-13):
    """Reference ``sum x^k / k^4``, stopped once ``|x|^K / (3 K^3) < tail_tol``.

    Slow near ``|x| = 1`` (tens of thousands of terms); used to cross-check
    :func:`li4`.
    """
    x = float(x)
    if abs(x) > 1.0:
        raise ConfigError("li4 is implemented on [-1, 1] only")
    total = math.fsum(x**k / k**4 for k in range(1, _series_terms(abs(x), tail_tol) + 1))
    return total


def _series_terms(ax, tol):
    k = 1
    while ax**k / (3.0 * k**3) >= tol:
        k += 1
    return k


# ---------------------------------------------------------------- ideal plates


def _ideal_symbol(plate):
    if plate.kind is PlateKind.IDEAL_CONDUCTOR:
        return "D"
    if plate.kind is PlateKind.IDEAL_PERMEABLE:
        return "N"
    raise ConfigError(f"{plate.label} is not an ideal plate")


def energy_ideal(word, spacing=1.0):
    """Exact energy of an equally spaced ideal word.

    Parameters
    ----------
    word : Word, str, sequence of symbols or NeighborhoodStats
        Symbols ``D`` (perfect conductor) and ``N`` (infinitely permeable).
    spacing : float
        Reference spacing; it only matters for :attr:`EnergyResult.raw`.
    """
    _check_spacing(spacing)
    if isinstance(word, NeighborhoodStats):
        counts = word
    else:
        symbols = word.symbols if isinstance(word, Word) else tuple(word)
        bad = sorted({s for s in symbols if s not in ("D", "N")})
        if bad:
            raise ConfigError(f"ideal energies need D/N symbols, got {bad}")
        counts = stats(symbols)
    exact = LIKE_PAIR * counts.n_like + UNLIKE_PAIR * counts.n_unlike
    return EnergyResult(float(exact), 0.0, IDEAL, counts.n_plates, None, spacing, exact)


def energy_ideal_iterate(system, iterations, spacing=1.0):
    """:func:`energy_ideal` of an iterate, via counts only (no word is built)."""
    return energy_ideal(pair_counts(system, iterations), spacing)


# ---------------------------------------------------------------- fast paths


def _check_spacing(spacing):
    if not (isinstance(spacing, (int, float)) and math.isfinite(spacing) and spacing > 0):
        raise ConfigError("spacing must be a positive finite number")


def _as_plate(p, sigma):
    if isinstance(p, Plate):
        return p
    return plate_for_symbol(p, "ideal" if sigma is None else "finite", sigma)


def _require_scale_free(plates):
    for p in plates:
        if not p.scale_free:
            raise ConfigError(
                f"{p.label} couplings depend on kappa; use energy_general for such plates"
            )


def _t_integral(integrand, epsabs):
    res = integrate(integrand, 0.0, 1.0, epsabs=epsabs / _LI4_FACTOR, breakpoints=_T_BREAKS)
    return -_LI4_FACTOR * res.value, _LI4_FACTOR * res.error


def energy_pair(plate_i, plate_j, sigma=None, spacing=1.0, epsabs=DEFAULT_EPSABS):
    """Two plates at distance ``spacing``.

    Plates are :class:`Plate` objects or the symbols ``D``/``N`` (ideal when
    ``sigma`` is None, finite with that conductivity otherwise).

    >>> energy_pair("D", "N").value  # doctest: +ELLIPSIS
    0.87499999...
    """
    _check_spacing(spacing)
    pi, pj = _as_plate(plate_i, sigma), _as_plate(plate_j, sigma)
    _require_scale_free((pi, pj))

    def integrand(t):
        total = np.zeros_like(t)
        for mode in (Mode.TM, Mode.TE):
            ri, _ = mode_arrays(pi, mode, t)
            rj, _ = mode_arrays(pj, mode, t)
            total = total + kernels.li4(np.broadcast_to(ri * rj, t.shape))
        return total

    value, err = _t_integral(integrand, epsabs)
    return EnergyResult(value, err, POLYLOG_N2, 2, sigma, spacing)


class _NoRealRoots(Exception):
    pass


def triple_roots(r_i, r_j, r_k, t_j):
    """Roots ``z`` with ``1 + a x + b x^2 = (1 - z1 x)(1 - z2 x)`` for three plates.

    ``a = -r_j (r_i + r_k)`` and ``b = r_i r_k (r_j^2 - t_j^2)``. Returned as
    ``(z1, z2, real)`` with ``real`` false where the discriminant is negative.
    """
    a = -r_j * (r_i + r_k)
    b = r_i * r_k * (r_j * r_j - t_j * t_j)
    disc = a * a - 4.0 * b
    real = disc >= 0.0
    root = np.sqrt(np.where(real, disc, 0.0))
    # cancellation-free: q carries the larger root, b / q the smaller
    q = -0.5 * (a + np.where(a >= 0.0, root, -root))
    safe = np.where(q == 0.0, 1.0, q)
    z2 = np.where(q == 0.0, 0.0, b / safe)
    return q, z2, real


def energy_triple(plate_i, plate_j, plate_k, sigma=None, spacing=1.0, epsabs=DEFAULT_EPSABS):
    """Three equally spaced plates, by the two-root polylog form.

    Falls back to :func:`energy_general` (``method="quadrature"``) where the
    quadratic has complex roots or a root leaves ``[-1, 1]``.
    """
    _check_spacing(spacing)
    plates = tuple(_as_plate(p, sigma) for p in (plate_i, plate_j, plate_k))
    _require_scale_free(plates)

    def integrand(t):
        total = np.zeros_like(t)
        for mode in (Mode.TM, Mode.TE):
            ri, _ = mode_arrays(plates[0], mode, t)
            rj, tj = mode_arrays(plates[1], mode, t)
            rk, _ = mode_arrays(plates[2], mode, t)
            z1, z2, real = triple_roots(*np.broadcast_arrays(ri, rj, rk, tj, t)[:4])
            if not np.all(real) or np.any(np.abs(z1) > 1.0) or np.any(np.abs(z2) > 1.0):
                raise _NoRealRoots
            total = total + kernels.li4(z1) + kernels.li4(z2)
        return total

    try:
        value, err = _t_integral(integrand, epsabs)
    except _NoRealRoots:
        stack = Stack.equally_spaced(plates, spacing)
        res = energy_general(stack, spacing, epsabs=epsabs, route_ideal=False)
        return EnergyResult(res.value, res.abs_error, QUADRATURE, 3, sigma, spacing)
    return EnergyResult(value, err, POLYLOG_N3, 3, sigma, spacing)


# ---------------------------------------------------------------- general stacks


def log_delta_integrand(stack, spacing, t, s):
    """``s^2 (ln Delta_TM + ln Delta_TE)`` on the grid ``t[:, None] x s[None, :]``."""
    t = np.asarray(t, dtype=float)[:, None]
    s = np.asarray(s, dtype=float)[None, :]
    kappa = s / (2.0 * spacing)
    total = np.zeros((t.shape[0], s.shape[1]))
    for mode in (Mode.TM, Mode.TE):
        r, tr, q = stack_arrays(stack, mode, t, kappa)
        delta = delta_total_arrays(r, tr * tr, q)
        bad = ~(delta > 0.0)
        if np.any(bad):
            m, k = np.argwhere(bad)[0]
            raise NumericalError(
                f"scattering determinant {delta[m, k]:.6g} <= 0 in {mode.name} "
                f"at t={t[m, 0]:.17g}, s={s[0, k]:.17g}"
            )
        total += np.log(delta)
    return total * s * s


def energy_general(stack, spacing=None, epsabs=DEFAULT_EPSABS, route_ideal=True,
                   max_plates=MAX_EXPANSION_PLATES):
    """Energy of any stack by nested adaptive quadrature.

    The outer integral runs over ``t`` in ``[0, 1]``; for each batch of outer
    nodes the inner ``s`` integral (``s = 2 kappa spacing``) is done on
    ``[0, S_CUT * spacing / l_min]`` with panels shared across the batch.

    Parameters
    ----------
    stack : Stack
    spacing : float, optional
        Reference spacing for the scaling; defaults to the smallest gap.
    epsabs : float
        Target absolute error of the scaled energy.
    route_ideal : bool
        Send equally spaced all-ideal stacks to :func:`energy_ideal`.
    max_plates : int or None
        Refuse larger stacks (None lifts the limit).
    """
    n = len(stack)
    if n < 2:
        raise ConfigError("an interaction energy needs at least two plates")
    if max_plates is not None and n > max_plates:
        raise ConfigError(f"{n} plates exceed the {max_plates}-plate limit")
    gaps = stack.gaps
    if spacing is None:
        spacing = min(gaps)
    _check_spacing(spacing)
    equal = max(gaps) - min(gaps) <= 1e-12 * max(gaps)
    if route_ideal and stack.all_ideal and equal and abs(gaps[0] - spacing) <= 1e-12 * spacing:
        return energy_ideal([_ideal_symbol(p) for p in stack.plates], spacing)

    s_max = S_CUT * spacing / min(gaps)
    breaks = tuple(b for b in _S_BREAKS if b < s_max)
    inner_tol = 0.25 * epsabs / _LOG_FACTOR
    inner_err = [0.0]

    def outer(t):
        res = integrate(lambda s: log_delta_integrand(stack, spacing, t, s), 0.0, s_max,
                        epsabs=inner_tol, breakpoints=breaks)
        inner_err[0] = max(inner_err[0], float(np.max(res.error)))
        return res.value

    res = integrate(outer, 0.0, 1.0, epsabs=0.5 * epsabs / _LOG_FACTOR, breakpoints=_T_BREAKS)
    value = _LOG_FACTOR * res.value
    err = _LOG_FACTOR * (res.error + inner_err[0])
    sigmas = {p.sigma for p in stack.plates if p.kind in (PlateKind.FINITE_DIELECTRIC,
                                                          PlateKind.FINITE_PERMEABLE)}
    sigma = sigmas.pop() if len(sigmas) == 1 else None
    return EnergyResult(value, err, QUADRATURE, n, sigma, spacing)


# ---------------------------------------------------------------- words and sweeps


def energy_word(word, material="ideal", sigma=None, spacing=1.0, epsabs=DEFAULT_EPSABS):
    """Energy of an equally spaced word, dispatched to the cheapest exact route."""
    symbols = word.symbols if isinstance(word, Word) else tuple(word)
    if material == "ideal":
        return energy_ideal(symbols, spacing)
    plates = [plate_for_symbol(s, material, sigma) for s in symbols]
    n = len(plates)
    if n == 1:
        # a lone plate: Delta = 1 and the integrand vanishes identically
        return EnergyResult(0.0, 0.0, QUADRATURE, 1, sigma, spacing)
    if n == 2:
        return energy_pair(*plates, sigma=sigma, spacing=spacing, epsabs=epsabs)
    if n == 3:
        return energy_triple(*plates, sigma=sigma, spacing=spacing, epsabs=epsabs)
    res = energy_general(Stack.equally_spaced(plates, spacing), spacing, epsabs=epsabs)
    return EnergyResult(res.value, res.abs_error, res.method, n, sigma, spacing)


def sigma_grid(lo=DEFAULT_SIGMA_GRID[0], hi=DEFAULT_SIGMA_GRID[1], n=DEFAULT_SIGMA_GRID[2]):
    """``n`` log-spaced conductivities from ``lo`` to ``hi``."""
    if not (0.0 < lo <= hi) or n < 1:
        raise ConfigError("sigma grid needs 0 < lo <= hi and at least one point")
    if n == 1:
        return np.array([float(lo)])
    return np.logspace(math.log10(lo), math.log10(hi), int(n))


def sweep(system, iterations, sigmas=None, spacing=1.0, epsabs=DEFAULT_EPSABS):
    """Finite-plate energies of each iterate over a conductivity grid.

    Returns ``(I, sigma, EnergyResult)`` tuples sorted by ``I`` then ``sigma``.
    """
    sigmas = sigma_grid() if sigmas is None else np.asarray(sigmas, dtype=float)
    rows = []
    for it in sorted(set(iterations)):
        word = iterate(system, it)
        for sg in sorted(float(x) for x in sigmas):
            rows.append((it, sg, energy_word(word, "finite", sg, spacing, epsabs)))
    return rows


def growth_fit(points):
    """Fit ``ln|E|`` linearly in ``I``.

    Parameters
    ----------
    points : iterable of (I, E)
        At least three points of one sign.

    Raises
    ------
    FitRefused
        When the energies change sign or vanish; the exception carries the
        consecutive ratios.
    """
    pts = sorted((int(i), float(e)) for i, e in points)
    if len(pts) < 3:
        raise ConfigError("a growth fit needs at least three points")
    if len({i for i, _ in pts}) != len(pts):
        raise ConfigError("duplicate iteration in fit points")
    by_i = dict(pts)
    ratios = tuple(
        (i, by_i[i + 1] / e) for i, e in pts if i + 1 in by_i and e != 0.0
    )
    signs = {math.copysign(1.0, e) if e != 0.0 else 0.0 for _, e in pts}
    if len(signs) != 1 or 0.0 in signs:
        raise FitRefused("energies change sign or vanish; fit refused", ratios)
    sign = signs.pop()
    x = np.array([i for i, _ in pts], dtype=float)
    y = np.log(np.abs([e for _, e in pts]))
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return GrowthFit(
        prefactor=sign * math.exp(coef[0]),
        rate=float(coef[1]),
        window=(pts[0][0], pts[-1][0]),
        residual=float(np.sqrt(np.mean(resid**2))),
        ratios=ratios,
        n_points=len(pts),
    )


def ideal_growth_fit(system, lo, hi):
    """:func:`growth_fit` of the exact ideal energies for ``I`` in ``[lo, hi]``."""
    return growth_fit((i, float(energy_ideal_iterate(system, i).exact)) for i in range(lo, hi + 1))
