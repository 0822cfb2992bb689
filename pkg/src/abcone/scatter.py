"""Partial-wave scattering off the spin-1/2 flux tube on the cone.

Regular channels (nu outside (0, 1)) scatter with the bare Aharonov-Bohm
phase.  Channels with 0 < nu < 1 pick up an extra phase fixed by the
extension parameter lambda:

    N = lambda k^(2 nu) Gamma(1 - nu),   C = 4^nu Gamma(1 + nu)
    S = e^(2i Delta_AB) (N e^(i pi nu) + C) / (N e^(-i pi nu) + C)

so that delta = Delta_AB + arg(C + N e^(i pi nu)).  ``mu`` is the tangent of
the extra phase, mu = N sin(pi nu) / (N cos(pi nu) + C).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np
from scipy import optimize

from .bound import ExtensionParam, extension_param
from .channel import ChannelParams, EffectiveChannel, effective_channel, modified_channels
from .errors import DomainError, PoleAtK
from .specfun import gamma

NU_MATCH_TOL = 1e-9
MU_POLE_TOL = 1e-14
FORWARD_ANGLE = 0.05
TRUNCATION_TOL = 1e-6


def ab_phase(m: int, phi: float) -> float:
    """Bare Aharonov-Bohm phase shift (pi/2)(|m| - |m + phi|)."""
    return 0.5 * math.pi * (abs(m) - abs(m + phi))


def _check_k(k: float):
    if not (k > 0.0 and math.isfinite(k)):
        raise DomainError(f"k must be positive and finite, got {k!r}")


def _n_and_c(ext: ExtensionParam, k: float) -> tuple[float, float]:
    nu = ext.nu
    return ext.lam * k ** (2.0 * nu) * gamma(1.0 - nu), 4.0 ** nu * gamma(1.0 + nu)


def _check_nu(ext: ExtensionParam, ch: EffectiveChannel):
    if abs(ext.nu - ch.nu) > NU_MATCH_TOL:
        raise DomainError(f"extension parameter built for nu={ext.nu!r}, channel has nu={ch.nu!r}")


def mu(ext: ExtensionParam, k: float) -> float:
    """Tangent of the extension-induced phase; raises PoleAtK where it diverges."""
    _check_k(k)
    nu = ext.nu
    if ext.infinite:
        c = math.cos(math.pi * nu)
        if abs(c) < MU_POLE_TOL:
            raise PoleAtK(k, "mu diverges for lambda = infinity at nu = 1/2")
        return math.tan(math.pi * nu)
    n, c = _n_and_c(ext, k)
    num = n * math.sin(math.pi * nu)
    den = n * math.cos(math.pi * nu) + c
    if abs(den) < MU_POLE_TOL * max(abs(n), c):
        raise PoleAtK(k)
    return num / den


def _extra_phase(ext: ExtensionParam, k: float) -> float:
    # continuous in k: the imaginary part of C + N e^(i pi nu) never changes sign
    if ext.infinite:
        return math.pi * ext.nu
    n, c = _n_and_c(ext, k)
    return math.atan2(n * math.sin(math.pi * ext.nu), c + n * math.cos(math.pi * ext.nu))


def phase_shift(ext: ExtensionParam, p: ChannelParams, k: float, continuous: bool = False) -> float:
    """Phase shift of a modified channel.

    The default is Delta_AB + arctan(mu) on the principal branch, which raises
    PoleAtK where mu diverges.  With ``continuous=True`` the branch is chosen
    so that delta is continuous in k (it differs from the principal value by
    a multiple of pi) and no error is raised.
    """
    _check_k(k)
    ch = effective_channel(p)
    _check_nu(ext, ch)
    base = ab_phase(p.m, p.phi)
    if continuous:
        return base + _extra_phase(ext, k)
    return base + math.atan(mu(ext, k))


def s_element(ext: ExtensionParam, p: ChannelParams, k: float) -> complex:
    """S-matrix element of a modified channel in ratio form (finite at mu poles)."""
    _check_k(k)
    ch = effective_channel(p)
    _check_nu(ext, ch)
    bare = cmath.exp(2j * ab_phase(p.m, p.phi))
    if ext.infinite:
        return bare * cmath.exp(2j * math.pi * ext.nu)
    if ext.lam == 0.0:
        return bare
    n, c = _n_and_c(ext, k)
    e = cmath.exp(1j * math.pi * ext.nu)
    return bare * (n * e + c) / (n * e.conjugate() + c)


def s_element_mu_form(ext: ExtensionParam, p: ChannelParams, k: float) -> complex:
    """Same element written as e^(2i Delta_AB)(1 + i mu)/(1 - i mu)."""
    ch = effective_channel(p)
    _check_nu(ext, ch)
    u = mu(ext, k)
    return cmath.exp(2j * ab_phase(p.m, p.phi)) * (1 + 1j * u) / (1 - 1j * u)


@dataclass(frozen=True)
class ScatterRecord:
    k: float
    channel: EffectiveChannel
    mu: float
    delta: float
    s_element: complex
    pole_at_k: bool = False


def scatter_record(ext: ExtensionParam, p: ChannelParams, k: float) -> ScatterRecord:
    """Bundle mu, the continuous phase shift and S at one wavenumber.

    At a pole of mu the record carries mu = inf and ``pole_at_k`` is set; the
    phase is the continuous one in every case.
    """
    ch = effective_channel(p)
    try:
        u, pole = mu(ext, k), False
    except PoleAtK:
        u, pole = math.inf, True
    return ScatterRecord(k=k, channel=ch, mu=u,
                         delta=phase_shift(ext, p, k, continuous=True),
                         s_element=s_element(ext, p, k), pole_at_k=pole)


# --- poles on the positive imaginary k axis ----------------------------------

_POLE_KAPPA_MIN = 1e-200
_POLE_SCAN_POINTS = 4000


def s_pole_energies(ext: ExtensionParam, M: float, kappa_max: float = 1e100) -> list[float]:
    """Bound-state energies -kappa^2/(2M) from poles of S at k = i kappa.

    With k = i kappa the denominator reduces to the real function
    lambda kappa^(2 nu) Gamma(1 - nu) + 4^nu Gamma(1 + nu); its sign changes
    on a log grid are refined by bisection.  lambda >= 0 gives no poles.
    """
    if not (M > 0.0 and math.isfinite(M)):
        raise DomainError(f"M must be positive and finite, got {M!r}")
    if ext.infinite or ext.lam >= 0.0:
        return []
    nu = ext.nu
    a = ext.lam * gamma(1.0 - nu)
    c = 4.0 ** nu * gamma(1.0 + nu)

    def h(u):
        return a * math.exp(2.0 * nu * u) + c

    grid = np.linspace(math.log(_POLE_KAPPA_MIN), math.log(kappa_max), _POLE_SCAN_POINTS)
    vals = [h(u) for u in grid]
    out = []
    for u0, u1, f0, f1 in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if f0 == 0.0:
            out.append(u0)
        elif f0 * f1 < 0.0:
            out.append(optimize.bisect(h, u0, u1, xtol=1e-15, rtol=1e-15, maxiter=300))
    return [-math.exp(2.0 * u) / (2.0 * M) for u in out]


# --- amplitude ---------------------------------------------------------------

@dataclass(frozen=True)
class AmplitudeRequest:
    """One amplitude evaluation.

    ``analytic_tail`` adds the exact Abel-smoothed sum of the regular
    channels beyond m_max (they all carry the same phase there); without it
    the regular sum is simply truncated.
    """

    k: float
    theta_sc: float
    m_max: int = 2000
    smoothing: float = 1.0 - 1e-4
    analytic_tail: bool = True

    def __post_init__(self):
        _check_k(self.k)
        if not math.isfinite(self.theta_sc):
            raise DomainError(f"theta_sc must be finite, got {self.theta_sc!r}")
        if int(self.m_max) != self.m_max or self.m_max < 1:
            raise DomainError(f"m_max must be a positive integer, got {self.m_max!r}")
        if not (0.0 < self.smoothing <= 1.0):
            raise DomainError(f"smoothing must lie in (0, 1], got {self.smoothing!r}")


@dataclass(frozen=True)
class AmplitudeResult:
    value: complex
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def cross_section(self) -> float:
        return abs(self.value) ** 2


def physical_extension_map(alpha: float, phi: float, s: int, r0: float) -> dict[int, ExtensionParam]:
    """lambda for every modified channel from the finite tube radius."""
    return {m: extension_param(r0, ChannelParams(alpha, phi, s, m))
            for m in modified_channels(alpha, phi)}


def _wrap_angle(theta: float) -> float:
    return math.remainder(theta, 2.0 * math.pi)


def _geometric_tail(coef: complex, z: complex, start: int) -> complex:
    if coef == 0:
        return 0j
    if z == 1:
        raise DomainError("smoothed tail diverges in the exact forward direction with t = 1")
    return coef * z ** start / (1 - z)


def amplitude(req: AmplitudeRequest, alpha: float, phi: float, s: int,
              ext_map: Mapping[int, ExtensionParam]) -> AmplitudeResult:
    """Partial-wave amplitude, exact over modified channels, Abel-smoothed elsewhere."""
    mods = modified_channels(alpha, phi)
    missing = [m for m in mods if m not in ext_map]
    if missing:
        raise DomainError(f"no extension parameter for modified channels {missing}")
    if mods and req.m_max < max(abs(m) for m in mods) + 5:
        raise DomainError(f"m_max={req.m_max} too small for modified channels {mods}")
    if req.analytic_tail and req.m_max < abs(phi) + 1:
        raise DomainError(f"m_max={req.m_max} must exceed |phi| + 1 for the analytic tail")

    k, th, t, mm = req.k, req.theta_sc, req.smoothing, req.m_max
    warnings = []
    if abs(_wrap_angle(th)) < FORWARD_ANGLE:
        warnings.append("forward-angle: partial-wave sum unreliable for |theta_sc| < 0.05")

    ms = np.arange(-mm, mm + 1)
    if mods:
        ms = ms[~np.isin(ms, mods)]
    dab = 0.5 * np.pi * (np.abs(ms) - np.abs(ms + phi))
    terms = np.expm1(2j * dab) * t ** np.abs(ms).astype(float) * np.exp(1j * ms * th)
    regular = complex(np.sum(terms))

    if req.analytic_tail:
        regular += _geometric_tail(cmath.exp(-1j * math.pi * phi) - 1, t * cmath.exp(1j * th), mm + 1)
        regular += _geometric_tail(cmath.exp(1j * math.pi * phi) - 1, t * cmath.exp(-1j * th), mm + 1)

    modified = 0j
    for m in mods:
        sm = s_element(ext_map[m], ChannelParams(alpha, phi, s, m), k)
        modified += (sm - 1) * cmath.exp(1j * m * th)

    f = (regular + modified) / cmath.sqrt(2j * math.pi * k)

    if not req.analytic_tail:
        ring = complex(np.sum(terms[np.abs(ms) == mm])) / cmath.sqrt(2j * math.pi * k)
        if abs(ring) > TRUNCATION_TOL * abs(f):
            warnings.append(f"truncation: ring |m|={mm} contributes {abs(ring):.3g} of |f|={abs(f):.3g}")
    return AmplitudeResult(f, tuple(warnings))


def diff_cross_section(req: AmplitudeRequest, alpha: float, phi: float, s: int,
                       ext_map: Mapping[int, ExtensionParam]) -> float:
    """|f|^2 for the same inputs as ``amplitude``."""
    return amplitude(req, alpha, phi, s, ext_map).cross_section
