"""Physical channel parameters and the effective radial data derived from them.

A channel is fixed by the cone parameter ``alpha`` (the geometry has angle
2*pi*alpha), the flux ``phi`` in units of the flux quantum, twice the spin
``s`` and the orbital index ``m``.  The radial problem only sees

    j  = m + phi + (1 - alpha)/2      signed effective angular momentum
    nu = |j| / alpha                  order of the Bessel-type solutions
    g  = phi * s / alpha              strength of the delta(r)/r contact term

Channels with 0 < nu < 1 need a self-adjoint extension; everything else is
treated as regular at the origin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import DomainError, SingularCoupling
from .specfun import gamma_ratio_sym

NU_TIE_TOL = 1e-12
COUPLING_TOL = 1e-12


@dataclass(frozen=True)
class ChannelParams:
    alpha: float
    phi: float
    s: int
    m: int

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if self.s not in (-1, 1):
            raise DomainError(f"s must be +1 or -1, got {self.s!r}")
        if int(self.m) != self.m:
            raise DomainError(f"m must be an integer, got {self.m!r}")
        if not math.isfinite(self.phi):
            raise DomainError(f"phi must be finite, got {self.phi!r}")


@dataclass(frozen=True)
class EffectiveChannel:
    j: float
    nu: float
    g: float

    @property
    def modified(self) -> bool:
        return is_modified(self.nu)


class Scenario(Enum):
    SCATTERING_ONLY = "ScatteringOnly"
    BOUND_AND_SCATTERING = "BoundAndScattering"
    DEGENERATE = "Degenerate"


def is_modified(nu: float) -> bool:
    """True when 0 < nu < 1; ties within NU_TIE_TOL of 0 or 1 count as regular."""
    return NU_TIE_TOL < nu < 1.0 - NU_TIE_TOL


def effective_momentum(alpha: float, phi: float, m: int) -> float:
    return m + phi + 0.5 * (1.0 - alpha)


def effective_channel(p: ChannelParams) -> EffectiveChannel:
    j = effective_momentum(p.alpha, p.phi, p.m)
    return EffectiveChannel(j=j, nu=abs(j) / p.alpha, g=p.phi * p.s / p.alpha)


def classify(p: ChannelParams) -> Scenario:
    g = p.phi * p.s / p.alpha
    if abs(g) < COUPLING_TOL:
        return Scenario.DEGENERATE
    return Scenario.SCATTERING_ONLY if g > 0 else Scenario.BOUND_AND_SCATTERING


def modified_channels(alpha: float, phi: float) -> list[int]:
    """Orbital indices m with 0 < nu(m) < 1, in ascending order."""
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"alpha must lie in (0, 1], got {alpha!r}")
    shift = phi + 0.5 * (1.0 - alpha)
    lo = math.floor(-alpha - shift) - 1
    hi = math.ceil(alpha - shift) + 1
    return [m for m in range(lo, hi + 1)
            if is_modified(abs(effective_momentum(alpha, phi, m)) / alpha)]


def coupling_ratio(p: ChannelParams) -> float:
    """(phi*s + |j|) / (phi*s - |j|); raises SingularCoupling when phi*s == |j|."""
    aj = abs(effective_momentum(p.alpha, p.phi, p.m))
    ps = p.phi * p.s
    den = ps - aj
    if abs(den) <= COUPLING_TOL * max(1.0, abs(ps)):
        raise SingularCoupling(f"phi*s = |j| = {aj!r}: coupling ratio is singular")
    return (ps + aj) / den


def bound_existence(p: ChannelParams) -> bool:
    """Whether the pure flux-cone channel carries a bound state.

    Needs an attractive contact term with phi*s <= -1, an extended channel
    (0 < nu < 1) and a positive product of coupling ratio and gamma ratio so
    that the energy is real.
    """
    if p.phi * p.s > -1.0:
        return False
    ch = effective_channel(p)
    if not ch.modified:
        return False
    try:
        r = coupling_ratio(p)
    except SingularCoupling:
        return False
    return r * gamma_ratio_sym(ch.nu) > 0.0
