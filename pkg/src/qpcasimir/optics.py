"""Plate material models and single-plate reflection/transmission amplitudes.

Amplitudes are evaluated at imaginary frequency ``zeta`` and lateral
wavenumber ``kperp``; with ``kappa = sqrt(kperp**2 + zeta**2)`` and the polar
cosine ``t = zeta / kappa`` the constant-conductivity plates depend on ``t``
alone, which is the parametrization used throughout the energy code.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


class Mode(enum.Enum):
    """Polarization: TM is the magnetic Green's function g^H, TE is g^E."""

    TM = "TM"
    TE = "TE"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ConfigError(f"unknown mode {value!r}; expected TM or TE") from None


class PlateKind(enum.Enum):
    IDEAL_CONDUCTOR = "D'"
    IDEAL_PERMEABLE = "N'"
    FINITE_DIELECTRIC = 'D"'
    FINITE_PERMEABLE = 'N"'
    GENERAL = "general"


@dataclass(frozen=True)
class Plate:
    """One delta-function plate.

    ``sigma`` is the dimensionless optical conductivity of the finite kinds
    (couplings ``sigma / zeta``); ``lambda_e``/``lambda_g`` are the constant
    electric/magnetic couplings of a ``GENERAL`` plate.
    """

    kind: PlateKind
    sigma: float = 0.0
    lambda_e: float = 0.0
    lambda_g: float = 0.0

    def __post_init__(self):
        for name in ("sigma", "lambda_e", "lambda_g"):
            value = getattr(self, name)
            if not (value >= 0.0) or math.isinf(value):
                raise ConfigError(f"{name} must be finite and >= 0, got {value!r}")
        if self.is_ideal and (self.sigma or self.lambda_e or self.lambda_g):
            raise ConfigError("ideal plates carry no numeric parameters")
        if self.kind in (PlateKind.FINITE_DIELECTRIC, PlateKind.FINITE_PERMEABLE):
            if self.lambda_e or self.lambda_g:
                raise ConfigError("finite plates are parametrized by sigma only")
        if self.kind is PlateKind.GENERAL and self.sigma:
            raise ConfigError("general plates are parametrized by lambda_e, lambda_g")

    @classmethod
    def ideal_conductor(cls):
        return cls(PlateKind.IDEAL_CONDUCTOR)

    @classmethod
    def ideal_permeable(cls):
        return cls(PlateKind.IDEAL_PERMEABLE)

    @classmethod
    def dielectric(cls, sigma):
        return cls(PlateKind.FINITE_DIELECTRIC, sigma=float(sigma))

    @classmethod
    def permeable(cls, sigma):
        return cls(PlateKind.FINITE_PERMEABLE, sigma=float(sigma))

    @classmethod
    def general(cls, lambda_e, lambda_g):
        return cls(PlateKind.GENERAL, lambda_e=float(lambda_e), lambda_g=float(lambda_g))

    @property
    def is_ideal(self):
        return self.kind in (PlateKind.IDEAL_CONDUCTOR, PlateKind.IDEAL_PERMEABLE)

    @property
    def is_transparent(self):
        if self.is_ideal:
            return False
        return self.sigma == 0.0 and self.lambda_e == 0.0 and self.lambda_g == 0.0

    @property
    def scale_free(self):
        """True when the amplitudes depend on the spectral point through ``t`` only."""
        return self.kind is not PlateKind.GENERAL or self.is_transparent

    def swapped(self):
        """The plate with electric and magnetic couplings exchanged."""
        swap = {
            PlateKind.IDEAL_CONDUCTOR: PlateKind.IDEAL_PERMEABLE,
            PlateKind.IDEAL_PERMEABLE: PlateKind.IDEAL_CONDUCTOR,
            PlateKind.FINITE_DIELECTRIC: PlateKind.FINITE_PERMEABLE,
            PlateKind.FINITE_PERMEABLE: PlateKind.FINITE_DIELECTRIC,
        }
        if self.kind is PlateKind.GENERAL:
            return Plate.general(self.lambda_g, self.lambda_e)
        return Plate(swap[self.kind], sigma=self.sigma)

    def is_pure_for(self, mode):
        """Whether ``t = 1 + r`` holds in ``mode`` (magnetic plates in TM, electric in TE)."""
        mode = Mode.parse(mode)
        if mode is Mode.TM:
            magnetic = (PlateKind.IDEAL_PERMEABLE, PlateKind.FINITE_PERMEABLE)
            return self.kind in magnetic or (self.kind is PlateKind.GENERAL and self.lambda_e == 0.0)
        electric = (PlateKind.IDEAL_CONDUCTOR, PlateKind.FINITE_DIELECTRIC)
        return self.kind in electric or (self.kind is PlateKind.GENERAL and self.lambda_g == 0.0)

    @property
    def label(self):
        if self.kind is PlateKind.GENERAL:
            return f"G(le={self.lambda_e:g},lg={self.lambda_g:g})"
        if self.is_ideal:
            return self.kind.value
        return f"{self.kind.value}(sigma={self.sigma:g})"


@dataclass(frozen=True)
class SpectralPoint:
    """Imaginary frequency ``zeta`` and lateral wavenumber ``kperp``."""

    zeta: float
    kperp: float

    def __post_init__(self):
        if not (self.zeta >= 0.0 and self.kperp >= 0.0):
            raise ConfigError("zeta and kperp must be nonnegative")
        if self.zeta == 0.0 and self.kperp == 0.0:
            raise ConfigError("degenerate spectral point zeta = kperp = 0 (t undefined)")

    @classmethod
    def from_polar(cls, kappa, t):
        """Point with ``kappa`` and polar cosine ``t = zeta / kappa``."""
        if not kappa > 0.0:
            raise ConfigError("kappa must be positive")
        if not 0.0 <= t <= 1.0:
            raise ConfigError("t must lie in [0, 1]")
        return cls(zeta=kappa * t, kperp=kappa * math.sqrt(max(0.0, 1.0 - t * t)))

    @property
    def kappa(self):
        return math.hypot(self.zeta, self.kperp)

    @property
    def t(self):
        return min(1.0, self.zeta / self.kappa)


@dataclass(frozen=True)
class Coefficients:
    r_tm: float
    t_tm: float
    r_te: float
    t_te: float

    def for_mode(self, mode):
        """``(r, t)`` for the requested polarization."""
        if Mode.parse(mode) is Mode.TM:
            return self.r_tm, self.t_tm
        return self.r_te, self.t_te


def _general_tm(lambda_e, lambda_g, t, kappa):
    # magnetic and electric partial responses of the TM amplitudes
    mag = lambda_g * t * t * kappa / (lambda_g * t * t * kappa + 2.0)
    ele = lambda_e * kappa / (lambda_e * kappa + 2.0)
    return ele - mag, 1.0 - mag - ele


def coefficient_arrays(plate, t, kappa=None):
    """Vectorized amplitudes ``(r_tm, t_tm, r_te, t_te)`` over an array of ``t``.

    ``kappa`` (same shape as ``t`` or scalar) is required only for
    ``GENERAL`` plates. The endpoint ``t = 0`` uses the continuous limits.
    """
    t = np.asarray(t, dtype=float)
    one = np.ones_like(t)
    zero = np.zeros_like(t)
    kind = plate.kind
    if plate.is_transparent:
        return zero, one, zero, one.copy()
    if kind is PlateKind.IDEAL_CONDUCTOR:
        return one, zero, -one, zero.copy()
    if kind is PlateKind.IDEAL_PERMEABLE:
        return -one, zero, one, zero.copy()
    sigma = plate.sigma
    if kind in (PlateKind.FINITE_DIELECTRIC, PlateKind.FINITE_PERMEABLE):
        # the electric-like response sigma*kappa/(sigma*kappa + 2 zeta) and the
        # magnetic-like response sigma*zeta/(sigma*zeta + 2 kappa)
        strong = sigma / (sigma + 2.0 * t)
        weak = sigma * t / (sigma * t + 2.0)
        if kind is PlateKind.FINITE_DIELECTRIC:
            return strong, 1.0 - strong, -weak, 1.0 - weak
        return -weak, 1.0 - weak, strong, 1.0 - strong
    if kappa is None:
        raise ConfigError("general plates need kappa to evaluate their amplitudes")
    kappa = np.broadcast_to(np.asarray(kappa, dtype=float), t.shape)
    r_tm, t_tm = _general_tm(plate.lambda_e, plate.lambda_g, t, kappa)
    r_te, t_te = _general_tm(plate.lambda_g, plate.lambda_e, t, kappa)
    return r_tm, t_tm, r_te, t_te


def mode_arrays(plate, mode, t, kappa=None):
    """``(r, t)`` arrays for one polarization."""
    r_tm, t_tm, r_te, t_te = coefficient_arrays(plate, t, kappa)
    if Mode.parse(mode) is Mode.TM:
        return r_tm, t_tm
    return r_te, t_te


def coefficients(plate, pt):
    """Reflection and transmission amplitudes of ``plate`` at ``pt``.

    Examples
    --------
    >>> coefficients(Plate.dielectric(2.0), SpectralPoint(1.0, 0.0)).r_tm
    0.5
    """
    vals = coefficient_arrays(plate, np.array(pt.t), np.array(pt.kappa))
    return Coefficients(*(float(v) for v in vals))


def plate_for_symbol(symbol, material, sigma=None):
    """Map a word symbol (``D`` or ``N``) to a plate.

    ``material`` is ``"ideal"`` or ``"finite"``; finite plates need ``sigma``.
    """
    symbol = str(symbol).upper()
    if symbol not in ("D", "N"):
        raise ConfigError(f"symbol {symbol!r} has no plate mapping (expected D or N)")
    if material == "ideal":
        return Plate.ideal_conductor() if symbol == "D" else Plate.ideal_permeable()
    if material == "finite":
        if sigma is None:
            raise ConfigError("finite plates need a sigma value")
        return Plate.dielectric(sigma) if symbol == "D" else Plate.permeable(sigma)
    raise ConfigError(f"unknown material {material!r}; expected 'ideal' or 'finite'")
