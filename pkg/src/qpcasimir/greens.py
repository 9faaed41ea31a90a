"""Region-wise Green's functions of one, two and three plates.

The ``(z, z')`` plane is cut by the plate positions into ``(N+1)**2`` regions.
Region ``(i, j)`` (1-based) has ``z'`` in the ``i``-th interval counted from
the top (largest ``z'``) and ``z`` in the ``j``-th interval counted from the
left. In each region ``2 kappa g = A_i B_ij C_j`` plus the free propagator
when both points share an interval (``i + j - 2 == N``). ``A_i`` and ``C_j``
are exponentials anchored at the interval ends; ``B`` holds the multiple
scattering amplitudes.

:func:`greens_bvp` solves the jump conditions directly and is used as an
independent oracle for every block of ``B``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, UnsupportedError
from .optics import Mode, Plate, PlateKind, SpectralPoint, coefficients
from .scattering import Stack, delta_total


@dataclass(frozen=True)
class GreensMatrices:
    """Flattened coefficient matrix ``B`` with its block layout.

    ``blocks`` lists the width of each interval's exponential vector, left to
    right (``[1, 2, ..., 2, 1]``); rows of ``B`` run over intervals top-down in
    ``z'`` and columns left to right in ``z``.
    """

    B: np.ndarray
    positions: tuple
    kappa: float
    mode: Mode

    @property
    def n_plates(self):
        return len(self.positions)

    @property
    def blocks(self):
        n = self.n_plates
        return [1] + [2] * (n - 1) + [1]

    def _offsets(self):
        return np.concatenate([[0], np.cumsum(self.blocks)])

    def block(self, i, j):
        """``B_ij`` for 1-based region labels."""
        off = self._offsets()
        n = self.n_plates
        row_interval = n + 1 - i
        return self.B[off[row_interval]:off[row_interval + 1], off[j - 1]:off[j]]

    def interval_vector(self, m, z):
        """Exponentials of interval ``m`` (0 = left of every plate) at ``z``.

        The same vector serves as ``C_j`` for ``z`` and, transposed, as ``A_i``
        for ``z'``: ``[exp(-kappa (a_R - z)), exp(-kappa (z - a_L))]`` with
        ``a_L``/``a_R`` the bounding plates.
        """
        k = self.kappa
        a = self.positions
        n = len(a)
        if m == 0:
            return np.array([math.exp(-k * (a[0] - z))])
        if m == n:
            return np.array([math.exp(-k * (z - a[-1]))])
        return np.array([math.exp(-k * (a[m] - z)), math.exp(-k * (z - a[m - 1]))])


def interval_of(positions, z):
    """Index of the open interval holding ``z``; plates themselves are excluded."""
    for m, a in enumerate(positions):
        if z == a:
            raise ConfigError(
                f"z = {z} lies on a plate; use greens_one_sided() for boundary values"
            )
        if z < a:
            return m
    return len(positions)


def region_label(positions, z, zp):
    """1-based ``(i, j)`` label of the region containing ``(z, z')``."""
    n = len(positions)
    return n + 1 - interval_of(positions, zp), interval_of(positions, z) + 1


def _amp(stack, pt, mode):
    mode = Mode.parse(mode)
    out = []
    for p in stack.plates:
        out.append(coefficients(p, pt).for_mode(mode))
    return out


def _b_one(amp):
    (r, t), = amp
    return _reorder_rows(np.array([[t, r], [r, t]]), [1, 1])


def _b_two(amp, x):
    (ri, ti), (rj, tj) = amp
    d = 1.0 - ri * x * rj * x
    B = np.empty((4, 4))
    # row block 1: z' right of both plates
    B[0] = [ti * x * tj / d, tj / d, ri * x * tj / d, rj + tj * x * ri * x * tj / d]
    # row block 2: z' between the plates
    B[1] = [ti / d, ri * x * rj / d, ri / d, ri * x * tj / d]
    B[2] = [ti * x * rj / d, rj / d, rj * x * ri / d, tj / d]
    # row block 3: z' left of both plates
    B[3] = [ri + ti * x * rj * x * ti / d, rj * x * ti / d, ti / d, tj * x * ti / d]
    return _reorder_rows(B, [1, 2, 1])


def _b_three(amp, x, y):
    (ri, ti), (rj, tj), (rk, tk) = amp
    dij = 1.0 - ri * x * rj * x
    djk = 1.0 - rj * y * rk * y
    d = dij * djk - ri * x * tj * y * rk * y * tj * x
    # the recurring bounce off plate i seen through plate j
    back_i = tj * x * ri * x * tj
    back_k = tj * y * rk * y * tj
    B = np.empty((6, 6))
    # row block 1: z' > a_k
    B[0] = [
        ti * x * tj * y * tk,
        tj * y * tk,
        ri * x * tj * y * tk,
        tk * dij,
        rj * y * tk * dij + back_i * y * tk,
        rk * d + tk * y * rj * y * tk * dij + tk * y * back_i * y * tk,
    ]
    # row block 2: a_j < z' < a_k
    B[1] = [
        ti * x * tj,
        tj,
        ri * x * tj,
        rk * y * rj * dij + rk * y * back_i,
        rj * dij + back_i,
        tk * y * rj * dij + tk * y * back_i,
    ]
    B[2] = [
        ti * x * tj * y * rk,
        tj * y * rk,
        ri * x * tj * y * rk,
        rk * dij,
        back_i * y * rk + rj * y * rk * dij,
        tk * dij,
    ]
    # row block 3: a_i < z' < a_j
    B[3] = [
        ti * djk,
        back_k * x * ri + rj * x * ri * djk,
        ri * djk,
        rk * y * tj * x * ri,
        tj * x * ri,
        tk * y * tj * x * ri,
    ]
    B[4] = [
        ti * x * rj * djk + ti * x * back_k,
        rj * djk + back_k,
        ri * x * rj * djk + ri * x * back_k,
        rk * y * tj,
        tj,
        tk * y * tj,
    ]
    # row block 4: z' < a_i
    B[5] = [
        ri * d + ti * x * rj * x * ti * djk + ti * x * back_k * x * ti,
        # printed in the opposite order; this order matches the C vector
        rj * x * ti * djk + back_k * x * ti,
        ti * djk,
        rk * y * tj * x * ti,
        tj * x * ti,
        tk * y * tj * x * ti,
    ]
    return _reorder_rows(B / d, [1, 2, 2, 1])


def _reorder_rows(B, blocks):
    # rows above are listed top-down in z'; store them by interval left to right
    off = np.concatenate([[0], np.cumsum(blocks)])
    pieces = [B[off[b]:off[b + 1]] for b in range(len(blocks))]
    return np.vstack(pieces[::-1])


def _require_small(stack):
    if not 1 <= len(stack) <= 3:
        raise UnsupportedError(
            f"closed-form Green's functions exist for 1 to 3 plates, got {len(stack)}"
        )


def greens_matrices(stack, pt, mode):
    """Coefficient matrix ``B`` of a one-, two- or three-plate stack."""
    _require_small(stack)
    mode = Mode.parse(mode)
    amp = _amp(stack, pt, mode)
    kappa = pt.kappa
    gaps = stack.gaps
    if len(stack) == 1:
        B = _b_one(amp)
    elif len(stack) == 2:
        B = _b_two(amp, math.exp(-kappa * gaps[0]))
    else:
        B = _b_three(amp, math.exp(-kappa * gaps[0]), math.exp(-kappa * gaps[1]))
    return GreensMatrices(B, stack.positions, kappa, mode)


def _evaluate(mats, z, zp, m_z, m_zp):
    n = mats.n_plates
    i, j = n + 1 - m_zp, m_z + 1
    A = mats.interval_vector(m_zp, zp)
    C = mats.interval_vector(m_z, z)
    # the A row vector lists the right-anchored exponential second
    if A.size == 2:
        A = A[::-1]
    val = float(A @ mats.block(i, j) @ C)
    if m_z == m_zp:
        val += math.exp(-mats.kappa * abs(z - zp))
    return val / (2.0 * mats.kappa)


def greens_value(stack, pt, mode, z, zp):
    """Green's function ``g(z, z')`` of a stack of at most three plates."""
    mats = greens_matrices(stack, pt, mode)
    return _evaluate(mats, z, zp, interval_of(stack.positions, z), interval_of(stack.positions, zp))


def greens_one_sided(stack, pt, mode, plate, side, zp):
    """Limit of ``g(z, z')`` as ``z`` approaches plate ``plate`` from ``side`` (-1 or +1)."""
    if side not in (-1, 1):
        raise ConfigError("side must be -1 (from below) or +1 (from above)")
    mats = greens_matrices(stack, pt, mode)
    m_z = plate + (1 if side > 0 else 0)
    return _evaluate(mats, stack.positions[plate], zp, m_z, interval_of(stack.positions, zp))


def _couplings(plate, pt, mode):
    """Couplings entering the value jump and the derivative jump for ``mode``."""
    zeta = pt.zeta
    if plate.is_ideal:
        raise UnsupportedError("jump conditions of ideal plates are limits, not finite couplings")
    if plate.kind is PlateKind.GENERAL:
        le, lg = plate.lambda_e, plate.lambda_g
    else:
        if zeta == 0.0 and plate.sigma:
            raise UnsupportedError("sigma/zeta couplings diverge at zeta = 0")
        lam = plate.sigma / zeta if plate.sigma else 0.0
        le, lg = (lam, 0.0) if plate.kind is PlateKind.FINITE_DIELECTRIC else (0.0, lam)
    if Mode.parse(mode) is Mode.TM:
        return le, lg
    return lg, le


def jump_residuals(stack, pt, mode, zp, h):
    """Residuals of the two plate jump conditions at every plate.

    One-sided values are exact limits; one-sided derivatives are forward and
    backward differences with step ``h``, so the residuals are O(h).
    Returns an array of shape ``(N, 2)``.
    """
    out = []
    for m, a in enumerate(stack.positions):
        val_jump, der_jump = _couplings(stack.plates[m], pt, mode)
        gp = greens_one_sided(stack, pt, mode, m, +1, zp)
        gm = greens_one_sided(stack, pt, mode, m, -1, zp)
        dp = (greens_value(stack, pt, mode, a + h, zp) - gp) / h
        dm = (gm - greens_value(stack, pt, mode, a - h, zp)) / h
        out.append((
            (gp - gm) - 0.5 * val_jump * (dp + dm),
            (dp - dm) - pt.zeta**2 * 0.5 * der_jump * (gp + gm),
        ))
    return np.array(out)


def greens_bvp(stack, pt, mode, z, zp):
    """Green's function by solving the jump conditions as a linear system.

    Works for any number of finite plates. Each segment between consecutive
    breakpoints (plates and the source) carries
    ``alpha exp(-kappa (z - left)) + beta exp(-kappa (right - z))``.
    """
    kappa = pt.kappa
    breaks = sorted([(a, m) for m, a in enumerate(stack.positions)] + [(zp, -1)])
    if len({b for b, _ in breaks}) != len(breaks):
        raise ConfigError("source point coincides with a plate")
    nb = len(breaks)
    pts = [b for b, _ in breaks]

    # unknown layout: seg 0 -> beta only, seg nb -> alpha only, others both
    def idx(seg, which):
        if seg == 0:
            return 0
        return 1 + 2 * (seg - 1) + which

    nunk = 2 * nb

    def value_row(seg, at):
        row = np.zeros(nunk)
        left = pts[seg - 1] if seg > 0 else None
        right = pts[seg] if seg < nb else None
        if seg < nb:
            row[idx(seg, 1) if seg > 0 else 0] += math.exp(-kappa * (right - at))
        if seg > 0:
            row[idx(seg, 0)] += math.exp(-kappa * (at - left))
        return row

    def deriv_row(seg, at):
        row = np.zeros(nunk)
        left = pts[seg - 1] if seg > 0 else None
        right = pts[seg] if seg < nb else None
        if seg < nb:
            row[idx(seg, 1) if seg > 0 else 0] += kappa * math.exp(-kappa * (right - at))
        if seg > 0:
            row[idx(seg, 0)] += -kappa * math.exp(-kappa * (at - left))
        return row

    M = np.zeros((nunk, nunk))
    rhs = np.zeros(nunk)
    for b, (at, plate_index) in enumerate(breaks):
        gl, gr = value_row(b, at), value_row(b + 1, at)
        dl, dr = deriv_row(b, at), deriv_row(b + 1, at)
        if plate_index < 0:
            M[2 * b] = gr - gl
            M[2 * b + 1] = dr - dl
            rhs[2 * b + 1] = -1.0
        else:
            val_jump, der_jump = _couplings(stack.plates[plate_index], pt, mode)
            M[2 * b] = (gr - gl) - 0.5 * val_jump * (dr + dl)
            M[2 * b + 1] = (dr - dl) - pt.zeta**2 * 0.5 * der_jump * (gr + gl)
    coef = np.linalg.solve(M, rhs)
    seg = sum(1 for p in pts if p < z)
    if any(p == z for p in pts):
        raise ConfigError("evaluation point coincides with a breakpoint")
    return float(value_row(seg, z) @ coef)


# ------------------------------------------------------------ transition matrix


def _require_pure(stack, mode):
    mode = Mode.parse(mode)
    bad = [p.label for p in stack.plates if not p.is_pure_for(mode)]
    if bad:
        kind = "magnetic (permeable)" if mode is Mode.TM else "electric (dielectric)"
        raise UnsupportedError(
            f"transition matrix in {mode.value} needs purely {kind} plates; got {', '.join(bad)}"
        )


def free_propagator_matrix(stack, pt):
    """Dimensionless free propagator between plates, ``exp(-kappa |a_m - a_n|)``."""
    a = np.asarray(stack.positions)
    return np.exp(-pt.kappa * np.abs(a[:, None] - a[None, :]))


def transition_matrix(stack, pt, mode):
    """Closed-form dimensionless transition matrix for one to three pure plates."""
    _require_small(stack)
    _require_pure(stack, mode)
    r = [a for a, _ in _amp(stack, pt, mode)]
    R = free_propagator_matrix(stack, pt)
    if len(stack) == 1:
        return np.array([[r[0]]])
    if len(stack) == 2:
        d = delta_total(stack, pt, mode)
        return np.array([
            [r[0], r[0] * R[0, 1] * r[1]],
            [r[1] * R[1, 0] * r[0], r[1]],
        ]) / d
    i, j, k = 0, 1, 2

    def dressed(m, n, via):
        return R[m, n] + R[m, via] * r[via] * R[via, n]

    d = delta_total(stack, pt, mode)
    T = np.array([
        [r[i] * (1.0 - r[j] * r[k] * R[j, k] * R[k, j]),
         r[i] * dressed(i, j, k) * r[j],
         r[i] * dressed(i, k, j) * r[k]],
        [r[j] * dressed(j, i, k) * r[i],
         r[j] * (1.0 - r[k] * r[i] * R[k, i] * R[i, k]),
         r[j] * dressed(j, k, i) * r[k]],
        [r[k] * dressed(k, i, j) * r[i],
         r[k] * dressed(k, j, i) * r[j],
         r[k] * (1.0 - r[i] * r[j] * R[i, j] * R[j, i])],
    ])
    return T / d


def transition_matrix_recursive(stack, pt, mode):
    """Transition matrix of any number of pure plates, built one plate at a time.

    Adding plate ``n+1`` to a stack with matrix ``T`` uses the coupling vector
    ``u`` (free propagators to the new plate) and the scalar
    ``s = 1 - r_{n+1} u.T u``; ``s`` is also the factor by which the
    scattering determinant grows. Experimental beyond three plates.
    Returns ``(T, determinant)``.
    """
    _require_pure(stack, mode)
    r = np.array([a for a, _ in _amp(stack, pt, mode)])
    R = free_propagator_matrix(stack, pt)
    T = np.array([[r[0]]])
    det = 1.0
    for n in range(1, len(stack)):
        u = R[:n, n]
        Tu = T @ u
        s = 1.0 - r[n] * (u @ Tu)
        new = np.empty((n + 1, n + 1))
        new[:n, :n] = T + np.outer(Tu, Tu) * r[n] / s
        new[:n, n] = Tu * r[n] / s
        new[n, :n] = Tu * r[n] / s
        new[n, n] = r[n] / s
        T = new
        det *= s
    return T, det


def greens_via_transition(stack, pt, mode, z, zp, recursive=False):
    """``g0 + R(z).T t R(z')`` on the regions where ``z`` and ``z'`` share an interval."""
    m_z = interval_of(stack.positions, z)
    if m_z != interval_of(stack.positions, zp):
        raise UnsupportedError("the transition-matrix form covers only same-interval regions")
    if recursive:
        T, _ = transition_matrix_recursive(stack, pt, mode)
    else:
        T = transition_matrix(stack, pt, mode)
    a = np.asarray(stack.positions)
    kappa = pt.kappa
    Rz = np.exp(-kappa * np.abs(z - a))
    Rzp = np.exp(-kappa * np.abs(zp - a))
    return (math.exp(-kappa * abs(z - zp)) + float(Rz @ T @ Rzp)) / (2.0 * kappa)


# ------------------------------------------------------------ invariant suite


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: int
    failed: int
    worst: float


def _random_stack(rng, n, pure_mode=None):
    if pure_mode is Mode.TM:
        plates = [Plate.general(0.0, rng.uniform(0.1, 3.0)) for _ in range(n)]
    elif pure_mode is Mode.TE:
        plates = [Plate.general(rng.uniform(0.1, 3.0), 0.0) for _ in range(n)]
    else:
        plates = [Plate.general(*rng.uniform(0.0, 3.0, 2)) for _ in range(n)]
    return Stack(tuple(plates), tuple(np.cumsum(rng.uniform(0.3, 1.5, n))))


def _random_point(rng):
    return SpectralPoint.from_polar(rng.uniform(0.2, 2.0), rng.uniform(0.05, 1.0))


def _off_plate(rng, stack, lo=None, hi=None):
    a = stack.positions
    lo = a[0] - 1.0 if lo is None else lo
    hi = a[-1] + 1.0 if hi is None else hi
    while True:
        z = float(rng.uniform(lo, hi))
        if min(abs(z - p) for p in a) > 1e-6:
            return z


def _rel(x, y):
    return abs(x - y) / max(abs(x), abs(y), 1e-300)


def check_invariants(n_points=100, seed=0, rtol=1e-12):
    """Run the Green's function identities on random stacks of one to three plates.

    Checks reciprocity, the TE/TM swap, the jump-condition solver, O(h)
    decay of the plate jump residuals and the transition-matrix form on
    same-interval regions. Returns a list of :class:`CheckResult`.
    """
    rng = np.random.default_rng(seed)
    tallies = {}

    def record(name, ok, err):
        p, f, w = tallies.get(name, (0, 0, 0.0))
        tallies[name] = (p + bool(ok), f + (not ok), max(w, float(err)))

    for n in (1, 2, 3):
        for _ in range(n_points):
            stack = _random_stack(rng, n)
            pt = _random_point(rng)
            z, zp = _off_plate(rng, stack), _off_plate(rng, stack)
            for mode in Mode:
                g = greens_value(stack, pt, mode, z, zp)
                e = _rel(g, greens_value(stack, pt, mode, zp, z))
                record("reciprocity", e <= rtol, e)
                e = _rel(g, greens_bvp(stack, pt, mode, z, zp))
                record("jump-solver", e <= 1e-10, e)
            e = _rel(greens_value(stack, pt, Mode.TE, z, zp),
                     greens_value(stack.swapped(), pt, Mode.TM, z, zp))
            record("te-tm-swap", e <= rtol, e)

            mode = Mode.TM if rng.random() < 0.5 else Mode.TE
            pure = _random_stack(rng, n, mode)
            m = int(rng.integers(0, n + 1))
            a = (pure.positions[0] - 1.0,) + pure.positions + (pure.positions[-1] + 1.0,)
            z, zp = (_off_plate(rng, pure, a[m], a[m + 1]) for _ in range(2))
            want = greens_value(pure, pt, mode, z, zp)
            e = _rel(want, greens_via_transition(pure, pt, mode, z, zp))
            record("transition", e <= rtol, e)

        for _ in range(max(1, n_points // 10)):
            stack = _random_stack(rng, n)
            pt = _random_point(rng)
            zp = _off_plate(rng, stack)
            for mode in Mode:
                r1 = np.abs(jump_residuals(stack, pt, mode, zp, 1e-4)).max()
                r2 = np.abs(jump_residuals(stack, pt, mode, zp, 5e-5)).max()
                ratio = r2 / r1 if r1 > 1e-13 else 0.5
                record("jump-order-h", 0.4 <= ratio <= 0.6 or r1 <= 1e-13, abs(ratio - 0.5))
    return [CheckResult(k, *v) for k, v in sorted(tallies.items())]
