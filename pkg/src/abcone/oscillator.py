"""Flux tube on the cone plus a two-dimensional isotropic harmonic oscillator.

The mixed boundary condition turns the oscillator spectrum into the roots of

    G(E) = Gamma(1/2 + nu/2 - E/2w) / Gamma(1/2 - nu/2 - E/2w) = c

where c is fixed either by the tube radius or by the extension parameter.
G has zeros at (2n+1-nu)w and poles at (2n+1+nu)w; between each adjacent
pair it is monotone, so the roots are bracketed by that ladder and found by
bisection of log|G| - log|c|.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Union

from scipy import integrate, optimize

from .bound import ExtensionParam, Provenance, RadialWavefunction, extension_param
from .channel import ChannelParams, coupling_ratio, effective_channel, is_modified
from .errors import BracketError, DomainError, PoleError
from .specfun import (LogGammaValue, gamma_ratio_sym, is_nonpositive_integer, kummer_m,
                      ln_gamma_ratio, ln_gamma_signed, sinpi, tricomi_u)

ROOT_RTOL = 1e-12
ROOT_MAXITER = 300


class Branch(Enum):
    REGULAR = "Regular"
    IRREGULAR = "Irregular"
    MIXED = "Mixed"


@dataclass(frozen=True)
class HoParams:
    omega: float
    M: float
    r0: float
    channel: ChannelParams

    def __post_init__(self):
        for name in ("omega", "M", "r0"):
            val = getattr(self, name)
            if not (val > 0.0 and math.isfinite(val)):
                raise DomainError(f"{name} must be positive and finite, got {val!r}")


@dataclass(frozen=True)
class HoLevel:
    n: int
    energy: float
    branch: Branch
    energy_over_omega: float


def _branch(branch: Union[Branch, str]) -> Branch:
    if isinstance(branch, Branch):
        return branch
    table = {"+": Branch.REGULAR, "-": Branch.IRREGULAR, "regular": Branch.REGULAR,
             "irregular": Branch.IRREGULAR}
    try:
        return table[str(branch).lower()]
    except KeyError:
        raise DomainError(f"unknown branch {branch!r}") from None


def ho_limit_spectrum(n: int, nu: float, omega: float, branch: Union[Branch, str] = Branch.REGULAR) -> float:
    """(2n + 1 + nu) w for the regular branch, (2n + 1 - nu) w for the irregular one."""
    b = _branch(branch)
    if int(n) != n or n < 0:
        raise DomainError(f"n must be a non-negative integer, got {n!r}")
    if not (omega > 0.0):
        raise DomainError(f"omega must be positive, got {omega!r}")
    if b is Branch.MIXED:
        raise DomainError("the mixed branch has no closed-form spectrum")
    if b is Branch.IRREGULAR:
        if not is_modified(nu):
            raise DomainError(f"irregular branch needs 0 < nu < 1, got nu={nu!r}")
        return (2 * n + 1 - nu) * omega
    if nu < 0.0:
        raise DomainError(f"nu must be non-negative, got {nu!r}")
    return (2 * n + 1 + nu) * omega


def ho_regular_levels(nu: float, omega: float, levels: int) -> list[HoLevel]:
    """Regular-branch ladder; valid for any nu >= 0."""
    return [HoLevel(n, e, Branch.REGULAR, e / omega)
            for n, e in ((n, ho_limit_spectrum(n, nu, omega, Branch.REGULAR)) for n in range(levels))]


# --- spectral function -------------------------------------------------------

class SpectralValue(NamedTuple):
    value: float
    nearest_pole: float
    nearest_zero: float


def _ladder_index(E: float, nu: float, omega: float, shift: float) -> int:
    return max(0, round((E / omega - 1.0 - shift) / 2.0))


def _log_lhs(E: float, nu: float, omega: float) -> LogGammaValue:
    """log|G(E)| and sign; numerator poles raise PoleError, zeros give -inf."""
    a2 = 0.5 - 0.5 * nu - 0.5 * E / omega
    a1 = a2 + nu
    if is_nonpositive_integer(a1):
        raise PoleError(f"spectral function has a pole at E={E!r}")
    if is_nonpositive_integer(a2):
        return LogGammaValue(-math.inf, 1)
    if a2 > 0.0:
        return ln_gamma_ratio(a2, nu)
    # reflect both gammas: G = Gamma(b + nu)/Gamma(b) * sin(pi a2)/sin(pi a1), b = 1 - a1
    b = 1.0 - a1
    r = ln_gamma_ratio(b, nu)
    s2, s1 = sinpi(a2), sinpi(a1)
    sign = r.sign * (1 if s2 > 0 else -1) * (1 if s1 > 0 else -1)
    return LogGammaValue(r.log_abs + math.log(abs(s2)) - math.log(abs(s1)), sign)


def spectral_lhs(E: float, nu: float, omega: float) -> SpectralValue:
    """Gamma(1/2 + nu/2 - E/2w) / Gamma(1/2 - nu/2 - E/2w) with the nearest ladder points."""
    if not (omega > 0.0):
        raise DomainError(f"omega must be positive, got {omega!r}")
    lg = _log_lhs(E, nu, omega)
    value = 0.0 if lg.log_abs == -math.inf else lg.value
    pole = (2 * _ladder_index(E, nu, omega, nu) + 1 + nu) * omega
    zero = (2 * _ladder_index(E, nu, omega, -nu) + 1 - nu) * omega
    return SpectralValue(value, pole, zero)


def _bisect_level(F, lo: float, hi: float, omega: float) -> float:
    return optimize.bisect(F, lo, hi, xtol=1e-14 * omega, rtol=ROOT_RTOL, maxiter=ROOT_MAXITER)


def _solve(c: float, nu: float, omega: float, levels: int) -> list[HoLevel]:
    if int(levels) != levels or levels < 1:
        raise DomainError(f"levels must be a positive integer, got {levels!r}")
    zero = lambda n: (2 * n + 1 - nu) * omega
    pole = lambda n: (2 * n + 1 + nu) * omega

    if c == 0.0:
        return [HoLevel(n, zero(n), Branch.IRREGULAR, zero(n) / omega) for n in range(levels)]
    if math.isinf(c):
        return [HoLevel(n, pole(n), Branch.REGULAR, pole(n) / omega) for n in range(levels)]

    log_c = math.log(abs(c))
    want = 1 if c > 0 else -1

    def F(E):
        # +inf at poles, -inf at zeros; monotone inside each bracket
        try:
            lg = _log_lhs(E, nu, omega)
        except PoleError:
            return math.inf
        if lg.log_abs != -math.inf and lg.sign != want:
            raise BracketError(f"G has the wrong sign at E={E!r}")
        return lg.log_abs - log_c

    out = []
    for n in range(levels):
        if c < 0:
            lo, hi = zero(n), pole(n)
        elif n == 0:
            hi = zero(0)
            step = omega
            lo = hi - step
            while F(lo) <= 0.0:
                step *= 2.0
                lo = hi - step
                if not math.isfinite(lo) or step > 1e300:
                    raise BracketError("lowest root runs off to -infinity")
        else:
            lo, hi = pole(n - 1), zero(n)
        f_lo, f_hi = F(lo), F(hi)
        if not (f_lo * f_hi < 0.0):
            raise BracketError(f"bracket [{lo!r}, {hi!r}] has no sign change")
        e = _bisect_level(F, lo, hi, omega)
        out.append(HoLevel(n, e, Branch.MIXED, e / omega))
    return out


def _require_modified(h: HoParams):
    ch = effective_channel(h.channel)
    if not ch.modified:
        raise DomainError(f"channel m={h.channel.m} has nu={ch.nu!r} outside (0, 1)")
    return ch


def ks_rhs(h: HoParams) -> float:
    """Right-hand side c from the finite tube radius."""
    nu = _require_modified(h).nu
    r = coupling_ratio(h.channel)
    return r * gamma_ratio_sym(nu) / ((h.M * h.omega) ** nu * h.r0 ** (2.0 * nu))


def bg_rhs(h: HoParams, ext: ExtensionParam) -> float:
    """Right-hand side c for a given extension parameter (0 for lambda = infinity)."""
    ch = _require_modified(h)
    if abs(ext.nu - ch.nu) > 1e-9:
        raise DomainError(f"extension parameter built for nu={ext.nu!r}, channel has nu={ch.nu!r}")
    if ext.infinite:
        return 0.0
    if ext.lam == 0.0:
        return math.inf
    return -gamma_ratio_sym(ch.nu) / (ext.lam * (h.M * h.omega) ** ch.nu)


def solve_ho_ks(h: HoParams, levels: int) -> list[HoLevel]:
    """Lowest ``levels`` roots with the boundary condition fixed by r0."""
    nu = _require_modified(h).nu
    return _solve(ks_rhs(h), nu, h.omega, levels)


def solve_ho_bg(h: HoParams, ext: ExtensionParam, levels: int) -> list[HoLevel]:
    """Lowest ``levels`` roots for a given extension parameter."""
    c = bg_rhs(h, ext)
    return _solve(c, ext.nu, h.omega, levels)


def extension_param_ho(r0: float, p: ChannelParams) -> ExtensionParam:
    """lambda from 1/lambda = (2 / r0^(2 nu)) (phi s + |j|)/(phi s - |j|)."""
    if not (r0 > 0.0 and math.isfinite(r0)):
        raise DomainError(f"r0 must be positive and finite, got {r0!r}")
    ch = effective_channel(p)
    if not ch.modified:
        raise DomainError(f"channel m={p.m} is regular (nu={ch.nu!r}); no extension parameter")
    r = coupling_ratio(p)
    inv_lam = 2.0 * r / r0 ** (2.0 * ch.nu)
    if inv_lam == 0.0:
        return ExtensionParam.at_infinity(ch.nu, provenance=Provenance.PHYSICAL, r0=r0, coupling_ratio=r)
    return ExtensionParam(lam=1.0 / inv_lam, nu=ch.nu, provenance=Provenance.PHYSICAL,
                          r0=r0, coupling_ratio=r)


def lambda_ratio(r0: float, p: ChannelParams) -> float:
    """lambda (pure flux cone) divided by lambda (oscillator formula); nan if both infinite."""
    ab, ho = extension_param(r0, p), extension_param_ho(r0, p)
    if ab.infinite or ho.infinite:
        return math.nan
    return ab.lam / ho.lam


# --- wavefunctions -----------------------------------------------------------

def ho_wavefunction(level: HoLevel, h: HoParams) -> RadialWavefunction:
    """Normalised radial function chi(r) for an oscillator level.

    Regular levels use r^nu e^(-z/2) M(-n, 1+nu, z); the other branches use
    r^nu e^(-z/2) U(d, 1+nu, z) with d = (1+nu)/2 - E/2w, z = M w r^2.
    """
    nu = effective_channel(h.channel).nu
    mw = h.M * h.omega
    b = 1.0 + nu
    if level.branch is Branch.REGULAR:
        n = level.n

        def shape(r):
            z = mw * r * r
            return r ** nu * math.exp(-0.5 * z) * kummer_m(-n, b, z)
    else:
        if not is_modified(nu):
            raise DomainError(f"non-regular branches need 0 < nu < 1, got nu={nu!r}")
        d = 0.5 * b - 0.5 * level.energy / h.omega

        def shape(r):
            z = mw * r * r
            return r ** nu * math.exp(-0.5 * z) * tricomi_u(d, b, z)

    scale = 1.0 / math.sqrt(mw)
    r_max = scale * math.sqrt(2.0 * max(level.energy_over_omega, 0.0) + 80.0)
    f = lambda r: shape(r) ** 2 * r
    pieces = [0.0, 0.5 * scale, 2.0 * scale, r_max]
    total = math.fsum(integrate.quad(f, a, c, epsabs=0.0, epsrel=1e-11, limit=200)[0]
                      for a, c in zip(pieces[:-1], pieces[1:]) if c > a)
    return RadialWavefunction(shape, 1.0 / math.sqrt(total))


def radial_residual(chi, r: float, nu: float, M: float, omega: float, energy: float, h: float = None) -> float:
    """Relative central-difference residual of the oscillator radial equation at r."""
    if h is None:
        h = 1e-4 * r
    f0, fp, fm = chi(r), chi(r + h), chi(r - h)
    d2 = (fp - 2.0 * f0 + fm) / (h * h)
    d1 = (fp - fm) / (2.0 * h)
    lhs = -d2 - d1 / r + (nu * nu / (r * r) + (M * omega * r) ** 2) * f0
    rhs = 2.0 * M * energy * f0
    scale = max(abs(d2), abs(d1 / r), abs(nu * nu / (r * r) * f0), abs((M * omega * r) ** 2 * f0), abs(rhs))
    return abs(lhs - rhs) / scale
