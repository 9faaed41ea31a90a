"""Multiple-scattering determinant of an N-plate stack.

The determinant is the sum over ordered compositions of ``N - 1``: each
composition is a chain of plate-index jumps, a jump of one gap contributes the
nearest-neighbour factor ``1 - r_i r_{i+1} exp(-2 kappa l)`` and a longer jump
contributes the round trip ``-r_i r_k prod(t^2) prod(exp(-2 kappa l))``
through the intermediate plates.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import ConfigError, NumericalError, OracleNotApplicable
from .optics import Mode, Plate, coefficients, mode_arrays

MAX_EXPANSION_PLATES = 24


@dataclass(frozen=True)
class Stack:
    """Plates at strictly increasing positions ``z``."""

    plates: tuple
    positions: tuple

    def __post_init__(self):
        plates = tuple(self.plates)
        positions = tuple(float(z) for z in self.positions)
        if len(plates) != len(positions):
            raise ConfigError("plates and positions differ in length")
        if not plates:
            raise ConfigError("a stack needs at least one plate")
        if any(not isinstance(p, Plate) for p in plates):
            raise ConfigError("stack entries must be Plate instances")
        if any(not math.isfinite(z) for z in positions):
            raise ConfigError("positions must be finite")
        if any(b <= a for a, b in zip(positions, positions[1:])):
            raise ConfigError("positions must be strictly increasing")
        object.__setattr__(self, "plates", plates)
        object.__setattr__(self, "positions", positions)

    @classmethod
    def equally_spaced(cls, plates, spacing=1.0, start=0.0):
        if not spacing > 0.0:
            raise ConfigError("spacing must be positive")
        plates = tuple(plates)
        return cls(plates, tuple(start + spacing * i for i in range(len(plates))))

    def __len__(self):
        return len(self.plates)

    @property
    def gaps(self):
        z = self.positions
        return tuple(b - a for a, b in zip(z, z[1:]))

    @property
    def all_ideal(self):
        return all(p.is_ideal for p in self.plates)

    def swapped(self):
        return Stack(tuple(p.swapped() for p in self.plates), self.positions)


@dataclass(frozen=True)
class Composition:
    parts: tuple

    def __post_init__(self):
        if not self.parts or any(int(c) < 1 for c in self.parts):
            raise ConfigError("a composition is a nonempty tuple of positive integers")

    @property
    def total(self):
        return sum(self.parts)

    def factors(self, start=0):
        """Index pairs ``(i, k)`` of the scattering factors in this chain."""
        out = []
        i = start
        for c in self.parts:
            out.append((i, i + c))
            i += c
        return tuple(out)


@dataclass(frozen=True)
class DeltaExpansion:
    """All terms of the determinant of an ``n_plates`` stack, one per composition."""

    n_plates: int
    terms: tuple  # of (Composition, factor index pairs)
    mode: Mode = Mode.TM

    @property
    def distinct_factors(self):
        return sorted({f for _, factors in self.terms for f in factors})


@lru_cache(maxsize=None)
def _compositions(n):
    out = []
    for cuts in itertools.product((False, True), repeat=n - 1):
        parts, run = [], 1
        for cut in cuts:
            if cut:
                run += 1
            else:
                parts.append(run)
                run = 1
        parts.append(run)
        out.append(tuple(parts))
    return tuple(sorted(out))


def compositions(n):
    """All ordered compositions of ``n`` in lexicographic order (``2**(n-1)`` of them)."""
    if n < 1:
        raise ConfigError("compositions need n >= 1")
    return [Composition(p) for p in _compositions(n)]


def expansion(n_plates, mode=Mode.TM):
    if n_plates < 2:
        raise ConfigError("the scattering determinant needs at least two plates")
    terms = tuple((c, c.factors()) for c in compositions(n_plates - 1))
    return DeltaExpansion(n_plates, terms, Mode.parse(mode))


def _amplitudes(stack, pt, mode):
    mode = Mode.parse(mode)
    return [coefficients(p, pt).for_mode(mode) for p in stack.plates]


def _check_index(stack, i, k):
    if not (0 <= i < k < len(stack)):
        raise ConfigError(f"invalid plate indices ({i}, {k}) for a {len(stack)}-plate stack")


def delta_nn(stack, i, pt, mode):
    """Nearest-neighbour factor between plates ``i`` and ``i + 1``."""
    _check_index(stack, i, i + 1)
    amp = _amplitudes(stack, pt, mode)
    q = math.exp(-2.0 * pt.kappa * stack.gaps[i])
    return 1.0 - amp[i][0] * amp[i + 1][0] * q


def delta_far(stack, i, k, pt, mode):
    """Round-trip factor between non-adjacent plates ``i`` and ``k >= i + 2``."""
    if k < i + 2:
        raise ConfigError("delta_far needs k >= i + 2; use delta_nn for neighbours")
    _check_index(stack, i, k)
    amp = _amplitudes(stack, pt, mode)
    return _far_from(amp, stack.gaps, pt.kappa, i, k)


def _far_from(amp, gaps, kappa, i, k):
    trans = 1.0
    for m in range(i + 1, k):
        trans *= amp[m][1] ** 2
    return -amp[i][0] * amp[k][0] * trans * math.exp(-2.0 * kappa * sum(gaps[i:k]))


def _factor(amp, gaps, kappa, i, k):
    if k == i + 1:
        return 1.0 - amp[i][0] * amp[k][0] * math.exp(-2.0 * kappa * gaps[i])
    return _far_from(amp, gaps, kappa, i, k)


def delta_expanded(stack, pt, mode):
    """Determinant by explicit enumeration of all ``2**(N-2)`` composition terms.

    Factors are memoized per call. Limited to :data:`MAX_EXPANSION_PLATES`.
    """
    n = len(stack)
    if n < 2:
        raise ConfigError("the scattering determinant needs at least two plates")
    if n > MAX_EXPANSION_PLATES:
        raise ConfigError(
            f"explicit expansion of {n} plates exceeds the {MAX_EXPANSION_PLATES}-plate cap"
        )
    amp = _amplitudes(stack, pt, mode)
    gaps = stack.gaps
    memo = {}
    total = 0.0
    for _, factors in expansion(n, mode).terms:
        term = 1.0
        for f in factors:
            if f not in memo:
                memo[f] = _factor(amp, gaps, pt.kappa, *f)
            term *= memo[f]
        total += term
    return total


def stack_arrays(stack, mode, t, kappa):
    """Per-plate ``r``, ``t**2`` and per-gap round-trip factors on a point grid.

    ``t`` and ``kappa`` broadcast to a common shape ``S``; the results have
    shapes ``(N,) + S`` and ``(N-1,) + S``.
    """
    t, kappa = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(kappa, dtype=float))
    rs, ts = [], []
    for plate in stack.plates:
        r, tr = mode_arrays(plate, mode, t, kappa)
        rs.append(np.broadcast_to(r, t.shape))
        ts.append(np.broadcast_to(tr, t.shape))
    r = np.stack(rs)
    tr = np.stack(ts)
    gaps = np.asarray(stack.gaps, dtype=float).reshape((-1,) + (1,) * t.ndim)
    q = np.exp(-2.0 * kappa[np.newaxis] * gaps) if len(stack) > 1 else np.empty((0,) + t.shape)
    return r, tr, q


def delta_total_arrays(r, t2, q):
    """Dispatch the composition-sum kernel on arrays of any trailing shape."""
    shape = r.shape[1:]
    n = r.shape[0]
    out = kernels.delta_total(
        np.ascontiguousarray(r.reshape(n, -1)),
        np.ascontiguousarray(t2.reshape(n, -1)),
        np.ascontiguousarray(q.reshape(max(n - 1, 0), -1)),
    )
    return out.reshape(shape)


def delta_total(stack, pt, mode, method="recursive"):
    """Multiple-scattering determinant of the whole stack at one spectral point.

    ``method="recursive"`` sums the composition terms by the prefix recursion
    ``D_k = sum_j D_j * Delta_jk`` (identical terms, O(N^2));
    ``method="expand"`` enumerates every composition explicitly.
    """
    if len(stack) < 2:
        raise ConfigError("the scattering determinant needs at least two plates")
    if method == "expand":
        return delta_expanded(stack, pt, mode)
    if method != "recursive":
        raise ConfigError(f"unknown method {method!r}")
    r, tr, q = stack_arrays(stack, mode, np.array([pt.t]), np.array([pt.kappa]))
    return float(delta_total_arrays(r, tr * tr, q)[0])


_ORACLE_CHECKED = False


def _oracle_self_test():
    # fixes the transfer-matrix convention against the two-plate closed form
    global _ORACLE_CHECKED
    r = np.array([[0.37], [-0.52]])
    t = np.array([[0.41], [0.83]])
    q = np.array([[0.29]])
    got = kernels.delta_oracle(r, t, q)[0]
    want = 1.0 - r[0, 0] * r[1, 0] * q[0, 0]
    if abs(got - want) > 1e-14:
        raise NumericalError(f"transfer-matrix convention self-test failed: {got} != {want}")
    _ORACLE_CHECKED = True


def delta_oracle(stack, pt, mode):
    """Independent transfer-matrix evaluation of the determinant.

    The determinant equals ``prod(t) prod(exp(-kappa l)) / T`` with ``T`` the
    total transmission of the stack; opaque (ideal) plates make ``T`` vanish
    and are rejected.
    """
    if not _ORACLE_CHECKED:
        _oracle_self_test()
    if len(stack) < 2:
        raise ConfigError("the scattering determinant needs at least two plates")
    amp = _amplitudes(stack, pt, mode)
    if any(tr == 0.0 for _, tr in amp):
        raise OracleNotApplicable("transfer-matrix oracle needs nonzero transmission at every plate")
    r = np.array([[a[0]] for a in amp])
    t = np.array([[a[1]] for a in amp])
    q = np.exp(-2.0 * pt.kappa * np.asarray(stack.gaps)).reshape(-1, 1)
    return float(kernels.delta_oracle(r, t, q)[0])
