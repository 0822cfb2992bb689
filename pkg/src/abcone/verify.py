"""Built-in acceptance suite.

Each check returns a ``CriterionResult``; ``run_all`` runs them in order.
Random draws use fixed seeds so the suite is deterministic.
"""
from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .bound import (ExtensionParam, bound_wavefunction, energy_bg, energy_ks, energy_ks_oracle,
                    extension_param)
from .channel import ChannelParams, bound_existence, effective_channel, modified_channels
from .oscillator import HoParams, ho_regular_levels, ho_wavefunction, radial_residual, solve_ho_ks
from .scatter import AmplitudeRequest, ab_phase, amplitude, s_element, s_pole_energies
from .specfun import bessel_k, gamma, kummer_m, sinpi

WORKED = ChannelParams(alpha=1.0, phi=-1.5, s=1, m=1)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed: float
    time_limit: float | None = None

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        lim = f" (limit {self.time_limit:g}s)" if self.time_limit else ""
        return f"[{tag}] {self.number:2d} {self.name}: {self.detail}; {self.elapsed:.2f}s{lim}"


def _timed(number: int, name: str, limit: float | None):
    def deco(fn: Callable[[], tuple[bool, str]]):
        def run() -> CriterionResult:
            t0 = time.perf_counter()
            try:
                ok, detail = fn()
            except Exception as exc:  # a crash is a failure, reported not raised
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            dt = time.perf_counter() - t0
            if limit is not None and dt > limit:
                ok, detail = False, detail + f"; over time limit {limit}s"
            return CriterionResult(number, name, ok, detail, dt, limit)
        run.__name__ = fn.__name__
        run.number, run.label = number, name
        return run
    return deco


def rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def draw_bound_channels(n: int, seed: int) -> list[tuple[ChannelParams, float, float]]:
    """n random (channel, M, r0) triples that carry a bound state."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        alpha = float(rng.uniform(0.2, 1.0))
        s = int(rng.choice([-1, 1]))
        phi = -s * float(rng.uniform(1.0, 4.0))
        for m in modified_channels(alpha, phi):
            p = ChannelParams(alpha, phi, s, m)
            if bound_existence(p):
                out.append((p, float(10 ** rng.uniform(-1, 1)), float(10 ** rng.uniform(-1, 1))))
                break
    return out


@_timed(1, "unitarity", 5.0)
def check_unitarity():
    lams = [-10.0, -3.0, -1.0, -0.1, 0.0, 0.1, 1.0, 3.0, 10.0, None]
    ks = np.logspace(-3, 1, 20)
    worst = 0.0
    for nu in np.arange(1, 10) / 10.0:
        p = ChannelParams(1.0, float(nu), 1, 0)
        nu_ch = effective_channel(p).nu
        for lam in lams:
            ext = ExtensionParam.at_infinity(nu_ch) if lam is None else ExtensionParam.user(lam, nu_ch)
            for k in ks:
                worst = max(worst, abs(abs(s_element(ext, p, float(k))) - 1.0))
    return worst < 1e-12, f"max | |S| - 1 | = {worst:.3e} over 10x20x9 grid (tol 1e-12)"


@_timed(2, "ks-bg bridge", 1.0)
def check_bridge():
    worst = 0.0
    for p, M, r0 in draw_bound_channels(500, seed=2):
        e1 = energy_ks(M, r0, p).energy
        e2 = energy_bg(M, extension_param(r0, p)).energy
        worst = max(worst, rel(e2, e1))
    return worst < 1e-13, f"max relative gap {worst:.3e} over 500 draws (tol 1e-13)"


@_timed(3, "oracle equivalence", 5.0)
def check_oracle():
    worst = 0.0
    for p, M, r0 in draw_bound_channels(100, seed=3):
        worst = max(worst, rel(energy_ks_oracle(M, r0, p).energy, energy_ks(M, r0, p).energy))
    return worst < 1e-9, f"max relative gap {worst:.3e} over 100 draws (tol 1e-9)"


@_timed(4, "pole-bound duality", 10.0)
def check_poles():
    rng = np.random.default_rng(4)
    worst, bad_count, extra = 0.0, 0, 0
    for _ in range(50):
        nu = float(rng.uniform(0.05, 0.95))
        lam = -float(10 ** rng.uniform(-2, 1))
        M = float(10 ** rng.uniform(-1, 1))
        ext = ExtensionParam.user(lam, nu)
        poles = s_pole_energies(ext, M)
        if len(poles) != 1:
            bad_count += 1
            continue
        worst = max(worst, rel(poles[0], energy_bg(M, ext).energy))
        extra += len(s_pole_energies(ExtensionParam.user(-lam, nu), M))
    ok = worst < 1e-8 and bad_count == 0 and extra == 0
    return ok, (f"max relative gap {worst:.3e} (tol 1e-8); draws without exactly one pole: {bad_count}; "
                f"poles found for lambda > 0: {extra}")


@_timed(5, "worked channel", None)
def check_worked():
    ch = effective_channel(WORKED)
    ext = extension_param(1.0, WORKED)
    e_ks = energy_ks(1.0, 1.0, WORKED).energy
    e_bg = energy_bg(1.0, ext).energy
    e_or = energy_ks_oracle(1.0, 1.0, WORKED).energy
    gaps = [abs(ch.nu - 0.5), abs(ext.lam + 2.0), abs(e_ks + 0.125), abs(e_bg + 0.125), abs(e_or + 0.125)]
    ok = max(gaps) < 1e-10
    return ok, f"nu={ch.nu!r} lambda={ext.lam!r} E_ks={e_ks!r} E_bg={e_bg!r} E_oracle={e_or!r}"


@_timed(6, "flat fluxless amplitude", None)
def check_flat():
    worst = 0.0
    for k in (0.01, 0.1, 1.0, 5.0, 10.0):
        for th in np.linspace(-math.pi, math.pi, 21)[1:]:
            worst = max(worst, abs(amplitude(AmplitudeRequest(k, float(th)), 1.0, 0.0, 1, {}).value))
    return worst <= 1e-14, f"max |f| = {worst:.3e} at 20 angles x 5 wavenumbers (tol 1e-14)"


# channels with c < 0 (every root sits between a zero and a pole) and the
# worked channel (c > 0, lowest root is the deep flux-tube bound state)
HO_SWEEP_CHANNELS = (ChannelParams(1.0, 0.3, 1, -1), ChannelParams(0.8, 0.3, 1, 0), WORKED)
HO_R0_SWEEP = (1e-1, 1e-2, 1e-3, 1e-4)
HO_OMEGA_SWEEP = (1e-2, 1e-3, 1.25e-4)


def _ladder_gap(e: float, nu: float, omega: float) -> float:
    x = e / omega
    n_plus = max(0, round((x - 1.0 - nu) / 2.0))
    n_minus = max(0, round((x - 1.0 + nu) / 2.0))
    return min(abs(x - (2 * n_plus + 1 + nu)), abs(x - (2 * n_minus + 1 - nu))) * omega


@_timed(7, "oscillator limits", 30.0)
def check_ho_limits():
    notes, ok = [], True
    omega, levels = 1.0, 4
    for p in HO_SWEEP_CHANNELS:
        nu = effective_channel(p).nu
        deep = p is WORKED
        gaps = []
        for r0 in HO_R0_SWEEP:
            roots = solve_ho_ks(HoParams(omega, 1.0, r0, p), levels + int(deep))
            if deep:
                roots = roots[1:]
            gaps.append(max(_ladder_gap(l.energy, nu, omega) for l in roots))
        mono = all(b < a for a, b in zip(gaps, gaps[1:]))
        ok &= gaps[-1] < 1e-3 * omega and mono
        notes.append(f"m={p.m} nu={nu:.3g} gap@r0=1e-4 {gaps[-1]:.2e}w")
    e_ab = energy_ks(1.0, 1.0, WORKED).energy
    wgaps = [rel(solve_ho_ks(HoParams(w, 1.0, 1.0, WORKED), 1)[0].energy, e_ab) for w in HO_OMEGA_SWEEP]
    ok &= wgaps[-1] < 1e-2 and all(b < a for a, b in zip(wgaps, wgaps[1:]))
    notes.append(f"omega->0 relative gap {wgaps[-1]:.2e}")
    return ok, "; ".join(notes)


WF_BOUND_CHANNELS = (WORKED, ChannelParams(0.9, -1.0, 1, 1), ChannelParams(0.7, -1.8, 1, 1))
WF_HO_CHANNELS = (WORKED, ChannelParams(1.0, 0.3, 1, -1), ChannelParams(0.8, 0.3, 1, 0))


@_timed(8, "wavefunction residuals", None)
def check_wavefunctions():
    worst_k = 0.0
    for p in WF_BOUND_CHANNELS:
        state = energy_ks(1.0, 1.0, p)
        wf = bound_wavefunction(state, 1.0)
        kappa = math.sqrt(-2.0 * state.energy)
        for r in np.geomspace(0.05, 8.0, 50) / kappa:
            worst_k = max(worst_k, radial_residual(wf, float(r), state.channel.nu, 1.0, 0.0, state.energy))
    worst_ho = 0.0
    for p in WF_HO_CHANNELS:
        h = HoParams(1.0, 1.0, 1.0, p)
        nu = effective_channel(p).nu
        for lv in solve_ho_ks(h, 2) + ho_regular_levels(nu, 1.0, 2):
            wf = ho_wavefunction(lv, h)
            for r in np.geomspace(0.05, 4.0, 50):
                worst_ho = max(worst_ho, radial_residual(wf, float(r), nu, 1.0, 1.0, lv.energy))
    ok = worst_k <= 1e-6 and worst_ho <= 1e-6
    return ok, f"K_nu residual {worst_k:.2e}, oscillator n=0,1 residual {worst_ho:.2e} (tol 1e-6)"


@_timed(9, "special-function kernel", None)
def check_specfun():
    refl = max(abs(gamma(x) * gamma(1.0 - x) * sinpi(x) / math.pi - 1.0)
               for x in (0.1, 0.37, 0.5, 0.81, -1.3, -2.6, 3.7))
    kd = 0.0
    for a, b, z in ((0.3, 1.4, 0.7), (-1.7, 1.2, 3.0), (2.2, 1.8, 12.0)):
        hh = 1e-5 * max(1.0, z)
        num = (kummer_m(a, b, z + hh) - kummer_m(a, b, z - hh)) / (2 * hh)
        kd = max(kd, rel(num, a / b * kummer_m(a + 1, b + 1, z)))
    khalf = max(rel(bessel_k(0.5, x), math.sqrt(math.pi / (2 * x)) * math.exp(-x))
                for x in (0.01, 0.5, 1.0, 3.0, 25.0, 60.0))
    kint = 0.0
    for nu, x in ((0.3, 0.4), (0.7, 2.5), (0.5, 8.0), (0.9, 1.0)):
        t_max = math.acosh(800.0 / x)  # integrand below 1e-340 beyond this
        val, _ = integrate.quad(lambda t: math.exp(-x * math.cosh(t)) * math.cosh(nu * t),
                                0.0, t_max, epsabs=0.0, epsrel=1e-13, limit=200)
        kint = max(kint, rel(bessel_k(nu, x), val))
    ok = refl < 1e-10 and kd < 1e-6 and khalf < 1e-10 and kint < 1e-10
    return ok, (f"reflection {refl:.1e}, Kummer derivative {kd:.1e}, K_1/2 {khalf:.1e}, "
                f"K integral {kint:.1e}")


@_timed(10, "dirichlet and infinite limits", None)
def check_limits():
    worst = 0.0
    for nu in (0.1, 0.3, 0.5, 0.7, 0.9):
        for m in (-1, 0):
            phi = nu - m
            p = ChannelParams(1.0, phi, 1, m)
            nu_ch = effective_channel(p).nu
            d = ab_phase(m, phi)
            for k in (1e-3, 0.5, 7.0):
                s0 = s_element(ExtensionParam.dirichlet(nu_ch), p, k)
                si = s_element(ExtensionParam.at_infinity(nu_ch), p, k)
                worst = max(worst, abs(cmath.phase(s0 * cmath.exp(-2j * d))),
                            abs(cmath.phase(si * cmath.exp(-2j * (d + math.pi * nu_ch)))))
    return worst < 1e-13, f"max phase error {worst:.2e} (tol 1e-13)"


CRITERIA = (check_unitarity, check_bridge, check_oracle, check_poles, check_worked, check_flat,
            check_ho_limits, check_wavefunctions, check_specfun, check_limits)


def run_all() -> list[CriterionResult]:
    return [c() for c in CRITERIA]
