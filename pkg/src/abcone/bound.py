"""Bound states of the spin-1/2 flux tube on the cone.

Two closed forms are provided.  The first fixes the boundary condition from a
flux tube of small radius r0 (zero-energy log-derivative matching), the second
is written in terms of the self-adjoint extension parameter lambda of the
boundary condition f0 = lambda * f1.  ``extension_param`` converts between
them, and ``energy_ks_oracle`` solves the un-inverted matching relation by
bisection as an independent check on the closed form.

Units: hbar = c = 1, the mass M and tube radius r0 are explicit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize

from .channel import (ChannelParams, EffectiveChannel, bound_existence, coupling_ratio,
                      effective_channel, is_modified)
from .errors import BracketError, DomainError, NoBoundState
from .specfun import bessel_k, gamma_ratio_sym, ln_gamma_signed


class Provenance(Enum):
    PHYSICAL = "physical"
    USER_SUPPLIED = "user"


class Method(Enum):
    KS_CLOSED_FORM = "ks"
    BG_CLOSED_FORM = "bg"
    NUMERICAL_ORACLE = "oracle"


@dataclass(frozen=True)
class ExtensionParam:
    """Self-adjoint extension parameter lambda (units r0**(2 nu)).

    ``infinite`` marks lambda = infinity, the boundary condition that keeps
    only the irregular r**(-nu) behaviour; ``lam`` is then meaningless.
    """

    lam: float
    nu: float
    provenance: Provenance = Provenance.USER_SUPPLIED
    r0: Optional[float] = None
    coupling_ratio: Optional[float] = None
    infinite: bool = False

    def __post_init__(self):
        if not is_modified(self.nu):
            raise DomainError(f"extension parameters exist only for 0 < nu < 1, got nu={self.nu!r}")
        if not self.infinite and not math.isfinite(self.lam):
            raise DomainError("use ExtensionParam.at_infinity() for lambda = infinity")

    @classmethod
    def user(cls, lam: float, nu: float) -> "ExtensionParam":
        return cls(lam=float(lam), nu=nu)

    @classmethod
    def at_infinity(cls, nu: float, **kw) -> "ExtensionParam":
        return cls(lam=math.nan, nu=nu, infinite=True, **kw)

    @classmethod
    def dirichlet(cls, nu: float) -> "ExtensionParam":
        return cls(lam=0.0, nu=nu)


@dataclass(frozen=True)
class BoundState:
    channel: EffectiveChannel
    energy: float
    method: Method


def _check_positive(**kw):
    for name, val in kw.items():
        if not (val > 0.0 and math.isfinite(val)):
            raise DomainError(f"{name} must be positive and finite, got {val!r}")


def _require_bound(p: ChannelParams) -> tuple[EffectiveChannel, float]:
    ch = effective_channel(p)
    if not ch.modified:
        raise NoBoundState(f"nu={ch.nu!r} is outside (0, 1): channel is regular")
    if not bound_existence(p):
        raise NoBoundState(f"no bound state for phi*s={p.phi * p.s!r} in channel m={p.m}")
    return ch, coupling_ratio(p)


def energy_ks(M: float, r0: float, p: ChannelParams) -> BoundState:
    """Bound-state energy fixed by the finite-radius flux tube (no free parameter)."""
    _check_positive(M=M, r0=r0)
    ch, r = _require_bound(p)
    base = r * gamma_ratio_sym(ch.nu)
    # log form keeps the 1/nu power from amplifying intermediate roundings
    energy = -2.0 / M * math.exp(math.log(base) / ch.nu - 2.0 * math.log(r0))
    return BoundState(ch, energy, Method.KS_CLOSED_FORM)


def extension_param(r0: float, p: ChannelParams) -> ExtensionParam:
    """lambda from the tube radius: 1/lambda = -(1/r0**(2 nu)) * coupling_ratio."""
    _check_positive(r0=r0)
    ch = effective_channel(p)
    if not ch.modified:
        raise DomainError(f"channel m={p.m} is regular (nu={ch.nu!r}); no extension parameter")
    r = coupling_ratio(p)
    if r == 0.0:
        return ExtensionParam.at_infinity(ch.nu, provenance=Provenance.PHYSICAL,
                                          r0=r0, coupling_ratio=r)
    return ExtensionParam(lam=-r0 ** (2.0 * ch.nu) / r, nu=ch.nu, provenance=Provenance.PHYSICAL,
                          r0=r0, coupling_ratio=r)


def energy_bg(M: float, ext: ExtensionParam, channel: Optional[EffectiveChannel] = None) -> BoundState:
    """Bound-state energy for a given extension parameter; needs lambda < 0."""
    _check_positive(M=M)
    if ext.infinite or ext.lam >= 0.0:
        raise NoBoundState("a bound state requires a finite negative lambda")
    nu = ext.nu
    energy = -2.0 / M * math.exp((math.log(gamma_ratio_sym(nu)) - math.log(-ext.lam)) / nu)
    return BoundState(channel or EffectiveChannel(j=math.nan, nu=nu, g=math.nan),
                      energy, Method.BG_CLOSED_FORM)


# --- bisection oracle --------------------------------------------------------

ORACLE_WINDOW = (1e-30, 1e30)
_ORACLE_SCAN_POINTS = 600


def matching_residual(energy: float, M: float, r0: float, p: ChannelParams) -> float:
    """Left minus right side of the zero-energy log-derivative matching relation.

    nu [X + Y] / [X - Y] - phi s / alpha, X = r0^(2nu) Gamma(1-nu) (-M E)^nu,
    Y = 2^nu Gamma(1+nu).
    """
    ch = effective_channel(p)
    nu = ch.nu
    x = r0 ** (2.0 * nu) * ln_gamma_signed(1.0 - nu).value * (-M * energy) ** nu
    y = 2.0 ** nu * ln_gamma_signed(1.0 + nu).value
    if x == y:
        return math.inf
    return nu * (x + y) / (x - y) - ch.g


def energy_ks_oracle(M: float, r0: float, p: ChannelParams) -> BoundState:
    """Solve the matching relation for E < 0 by scan + bisection in log(-E)."""
    _check_positive(M=M, r0=r0)
    ch = effective_channel(p)
    if not ch.modified:
        raise NoBoundState(f"nu={ch.nu!r} is outside (0, 1)")
    coupling_ratio(p)
    scale = 1.0 / (M * r0 * r0)

    def resid(u):
        return matching_residual(-scale * math.exp(u), M, r0, p)

    w_lo, w_hi = math.log(ORACLE_WINDOW[0]), math.log(ORACLE_WINDOW[1])
    grid = np.linspace(w_lo, w_hi, _ORACLE_SCAN_POINTS)
    # split the scan at the pole X = Y so a root next to it is not skipped
    nu = ch.nu
    w_pole = (math.log(2.0 ** nu * ln_gamma_signed(1.0 + nu).value)
              - ln_gamma_signed(1.0 - nu).log_abs) / nu
    if w_lo < w_pole < w_hi:
        eps = 1e-9 * max(1.0, abs(w_pole))
        grid = np.sort(np.concatenate([grid, [w_pole - eps, w_pole + eps]]))
    vals = [resid(u) for u in grid]
    for u0, u1, f0, f1 in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if not (f0 * f1 < 0.0):
            continue
        u = optimize.bisect(resid, u0, u1, xtol=1e-14, rtol=1e-15, maxiter=200)
        # the residual also changes sign across the pole X = Y; keep true zeros only
        if abs(resid(u)) <= 1e-6 * (1.0 + abs(ch.g)):
            return BoundState(ch, -scale * math.exp(u), Method.NUMERICAL_ORACLE)
    raise BracketError("no sign change of the matching residual in the energy window")


# --- wavefunction ------------------------------------------------------------

@dataclass(frozen=True)
class RadialWavefunction:
    """Normalised radial function with integral of f(r)**2 r dr equal to 1."""

    shape: Callable[[float], float]
    norm: float

    def __call__(self, r: float) -> float:
        return self.norm * self.shape(r)


def _k_norm_integral(nu: float) -> float:
    # int_0^inf x K_nu(x)^2 dx, split where the small-x singularity lives
    f = lambda x: x * bessel_k(nu, x) ** 2
    head, _ = integrate.quad(f, 0.0, 1.0, epsabs=0.0, epsrel=1e-12, limit=200)
    tail, _ = integrate.quad(f, 1.0, 60.0, epsabs=0.0, epsrel=1e-12, limit=200)
    return head + tail


def bound_wavefunction(state: BoundState, M: float) -> RadialWavefunction:
    """r -> N K_nu(kappa r), kappa = sqrt(-2 M E), normalised by quadrature."""
    _check_positive(M=M)
    if not state.energy < 0.0:
        raise DomainError("bound states have negative energy")
    kappa = math.sqrt(-2.0 * M * state.energy)
    nu = state.channel.nu
    norm = kappa / math.sqrt(_k_norm_integral(nu))
    return RadialWavefunction(lambda r: bessel_k(nu, kappa * r), norm)
