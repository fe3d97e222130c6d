"""Amplification factors, phase-speed error and scaled group velocity.

Everything here is nondimensional: wavenumber enters as kh in [0, pi]
(Nyquist bound), time stepping through N_c = c dt/h, Pe = nu dt/h^2 and
Da = lambda dt, and time itself in units of dt. The per-mode exact
amplification of the PDE over one step is

    G_exact = exp(-(Pe (kh)^2 + i N_c kh - Da)),

and each scheme's G_num follows from its update formula with the operator
row symbols S_n(kh) = sum_r D_n[j, r] e^{i kh (r - j)} evaluated at an
interior node j. Derived diagnostics:

    beta     = -atan2(Im G, Re G)                       (numerical phase shift)
    c-ratio  = -(1/N_c) (ln|G| - i beta) / ((Pe (kh)^2 - Da)/N_c + i kh)
    phase error = |1 - c-ratio|
    V_g ratio   = (1/N_c) d beta / d(kh)

all of which are exactly 1/0 when G_num = G_exact (within the principal
branch of beta).

All evaluations are pure; sweep samples are independent, and maps are
emitted in a deterministic row-major order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adr1d import SchemeId
from .operators import DerivativeOperator

#: default half-step for the central kh-difference in group_velocity_ratio
VG_HALF_STEP = 1e-4

#: slack on |G_num/G_exact| <= 1 in stability scans; absorbs the O(Da^3)
#: excess of the explicit reaction factor over exp(Da) at kh -> 0
STABILITY_TOL = 1e-6


@dataclass(frozen=True)
class SpectralParams:
    kh: float
    nc: float
    pe: float
    da: float
    node: int = 500          # 1-based interior node index
    n_points: int = 1001

    def __post_init__(self):
        if not 0.0 <= self.kh <= np.pi + 1e-12:
            raise ValueError("kh must lie in [0, pi]")
        if self.n_points < 7:
            raise ValueError("n_points must be >= 7")
        if not 1 < self.node < self.n_points:
            raise ValueError("node must be interior (1-based)")


@dataclass(frozen=True)
class DispersionPoint:
    kh: float
    nc: float
    g_num: complex
    g_ratio: float
    beta: float
    vg_ratio: float
    phase_err: float


@dataclass(frozen=True)
class DispersionMap:
    kh_axis: np.ndarray
    nc_axis: np.ndarray
    points: list          # points[i_nc][i_kh]
    scheme: SchemeId
    pe: float
    da: float
    node: int
    n_points: int


def g_exact(p: SpectralParams) -> complex:
    return complex(np.exp(-(p.pe * p.kh**2 + 1j * p.nc * p.kh - p.da)))


def _symbols(scheme: SchemeId, p: SpectralParams, ops) -> tuple:
    d1, d2 = ops
    if d1.n_points != p.n_points:
        raise ValueError("operators were built for a different n_points")
    j = p.node - 1
    s1 = d1.row_symbol(j, p.kh)
    s2 = d2.row_symbol(j, p.kh)
    return s1, s2


def g_num(scheme: SchemeId, p: SpectralParams, ops) -> complex:
    """One-step amplification factor of the scheme at row `node`.

    The explicit scheme uses the closed form 2 Pe (cos kh - 1) for its
    diffusion symbol (identical to the CD2 row symbol at interior nodes);
    the other schemes use the operator row symbols throughout.
    """
    s1, s2 = _symbols(scheme, p, ops)
    nc, pe, da, kh = p.nc, p.pe, p.da, p.kh
    if scheme is SchemeId.EXPLICIT_OUCS3_CD2:
        diff = pe * (np.cos(kh) - 1.0)
        g_star = 1 - nc * s1 + 2 * diff + da
        return complex(1 - ((nc / 2) * s1 - diff - da / 2) * (1 + g_star))
    if scheme is SchemeId.IMPLICIT_OUCS3_LELE:
        z = nc * s1 - pe * s2
        return complex((1 + da / 2 - z / 2) / (1 - da / 2 + z / 2))
    # both IMEX schemes share the formula; only the operators differ
    g_star = 1 + (da - (nc * s1 - pe * s2)) / (1 - da / 2 - (pe / 2) * s2)
    return complex(1 - ((nc / 2) * s1 - (pe / 2) * s2 - da / 2) * (1 + g_star))


def phase_shift(g: complex) -> float:
    """beta = -atan2(Im G, Re G), branch-correct, in (-pi, pi]."""
    if g == 0:
        raise ValueError("phase shift undefined for G = 0")
    beta = -np.arctan2(g.imag, g.real)
    if beta <= -np.pi:
        beta = np.pi
    return float(beta)


def phase_speed_error(p: SpectralParams, g: complex) -> float:
    """|1 - c_num/c_exact| from the modulus and phase of G.

    At kh = 0 the expression reduces to |1 - ln|G|/Da|, finite whenever
    Da != 0; with Da = 0 as well the exact phase speed is singular there.
    """
    if p.kh == 0.0:
        if p.da == 0.0:
            raise ValueError("phase speed error singular at kh = 0 with Da = 0")
        return float(abs(1 - np.log(abs(g)) / p.da))
    num = np.log(abs(g)) - 1j * phase_shift(g)
    den = (p.pe * p.kh**2 - p.da) / p.nc + 1j * p.kh
    ratio = -(1.0 / p.nc) * num / den
    return float(abs(1 - ratio))


def _unwrap_pair(b_plus: float, b_minus: float) -> float:
    db = b_plus - b_minus
    if db > np.pi:
        db -= 2 * np.pi
    elif db < -np.pi:
        db += 2 * np.pi
    return db


def group_velocity_of_gfun(gfun, kh: float, nc: float,
                           half_step: float = VG_HALF_STEP) -> float:
    """(1/N_c) d beta/d(kh) for an arbitrary kh -> G map.

    Central difference of the phase with branch jumps unwrapped; within
    half_step of kh = 0 or pi a one-sided difference is used, so the
    endpoints are covered but only to first order there.
    """
    def beta_at(x: float) -> float:
        return phase_shift(gfun(x))

    lo, hi = kh - half_step, kh + half_step
    if lo < 0.0:
        db = _unwrap_pair(beta_at(kh + half_step), beta_at(kh))
        return float(db / half_step / nc)
    if hi > np.pi:
        db = _unwrap_pair(beta_at(kh), beta_at(kh - half_step))
        return float(db / half_step / nc)
    db = _unwrap_pair(beta_at(hi), beta_at(lo))
    return float(db / (2 * half_step) / nc)


def group_velocity_ratio(scheme: SchemeId, p: SpectralParams, ops,
                         half_step: float = VG_HALF_STEP) -> float:
    """Scaled group velocity of a scheme at one (kh, N_c) sample."""
    def gfun(x: float) -> complex:
        q = SpectralParams(x, p.nc, p.pe, p.da, p.node, p.n_points)
        return g_num(scheme, q, ops)

    return group_velocity_of_gfun(gfun, p.kh, p.nc, half_step)


def error_forcing_value(p: SpectralParams, a0, t: float, g: complex) -> complex:
    """Forcing integrand of the error-propagation equation at one kh.

    Returns, in units of 1/dt,

        A0(kh) (i N_c kh + Pe (kh)^2 - Da) [1 - c_num/c_exact] G^t

    with t counted in steps (time in units of dt). The bracket vanishes
    identically when G = G_exact, which is the classical von Neumann limit;
    the principal-branch beta makes that exact only while N_c * kh <= pi.
    """
    amp = a0(p.kh)
    if amp == 0:
        return 0.0 + 0.0j
    if abs(g) == 0.0:
        raise ValueError("forcing undefined for G = 0")
    num = np.log(abs(g)) - 1j * phase_shift(g)
    den = (p.pe * p.kh**2 - p.da) / p.nc + 1j * p.kh
    bracket = 1 + (1.0 / p.nc) * num / den
    coeff = 1j * p.nc * p.kh + p.pe * p.kh**2 - p.da
    return complex(amp * coeff * bracket * g**t)


def error_forcing_spectrum(scheme: SchemeId, p: SpectralParams, a0, t: float,
                           ops) -> complex:
    """error_forcing_value evaluated with the scheme's own G_num."""
    return error_forcing_value(p, a0, t, g_num(scheme, p, ops))


def dispersion_point(scheme: SchemeId, p: SpectralParams, ops) -> DispersionPoint:
    """All diagnostics at one (kh, N_c) sample.

    The kh = 0 column stores the analytic limits: the finite reaction-only
    amplification ratio, phase error 0 and V_g ratio 1.
    """
    g = g_num(scheme, p, ops)
    ge = g_exact(p)
    ratio = abs(g / ge)
    if p.kh == 0.0:
        return DispersionPoint(p.kh, p.nc, g, ratio, 0.0, 1.0, 0.0)
    return DispersionPoint(
        p.kh, p.nc, g, ratio,
        phase_shift(g),
        group_velocity_ratio(scheme, p, ops),
        phase_speed_error(p, g),
    )


def sweep(scheme: SchemeId, kh_axis, nc_axis, pe: float, da: float,
          node: int, n_points: int, ops) -> DispersionMap:
    """Rectangular (kh, N_c) map of DispersionPoint samples."""
    kh_axis = np.asarray(kh_axis, dtype=float)
    nc_axis = np.asarray(nc_axis, dtype=float)
    if np.any(np.diff(kh_axis) <= 0) or np.any(np.diff(nc_axis) < 0):
        raise ValueError("axes must be monotone")
    points = []
    for nc in nc_axis:
        row = [dispersion_point(scheme,
                                SpectralParams(kh, nc, pe, da, node, n_points), ops)
               for kh in kh_axis]
        points.append(row)
    return DispersionMap(kh_axis, nc_axis, points, scheme, pe, da, node, n_points)


def max_ratio_over_kh(scheme: SchemeId, kh_axis, nc: float, pe: float, da: float,
                      node: int, n_points: int, ops) -> float:
    out = 0.0
    for kh in kh_axis:
        p = SpectralParams(kh, nc, pe, da, node, n_points)
        out = max(out, abs(g_num(scheme, p, ops) / g_exact(p)))
    return out


def stability_boundary(scheme: SchemeId, ops, pe: float, da: float,
                       node: int = 500, n_points: int = 1001,
                       kh_axis=None, nc_start: float = 0.5, nc_max: float = 3.2,
                       tol: float = STABILITY_TOL, iters: int = 40) -> float:
    """Largest N_c with |G_num/G_exact| <= 1 + tol across the kh axis.

    Bisected upward from nc_start (which must itself be stable). Returns
    nc_max when the whole search range is stable; very small N_c can be
    ratio-unstable at high kh (numerical diffusion weaker than exact), so
    the scan deliberately starts at an intermediate CFL.
    """
    if kh_axis is None:
        kh_axis = np.linspace(0.0, np.pi, 64)[1:]

    def stable(nc: float) -> bool:
        return max_ratio_over_kh(scheme, kh_axis, nc, pe, da, node, n_points, ops) <= 1 + tol

    if not stable(nc_start):
        raise ValueError(f"N_c = {nc_start} is not ratio-stable; no bracket")
    if stable(nc_max):
        return nc_max
    lo, hi = nc_start, nc_max
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if stable(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def negative_vg_interval(scheme: SchemeId, ops, nc: float, pe: float, da: float,
                         node: int = 500, n_points: int = 1001,
                         kh_axis=None):
    """(kh_lo, kh_hi) hull of the sampled kh where V_g ratio < 0, or None."""
    if kh_axis is None:
        kh_axis = np.linspace(0.02, np.pi - 0.02, 400)
    neg = [kh for kh in kh_axis
           if group_velocity_ratio(
               scheme, SpectralParams(kh, nc, pe, da, node, n_points), ops) < 0]
    if not neg:
        return None
    return min(neg), max(neg)


def write_map_csv(dmap: DispersionMap, path) -> None:
    """Map CSV: one comment header, then kh,nc rows (nc outer, kh inner)."""
    with open(path, "w") as fh:
        fh.write(f"# scheme={dmap.scheme.value},pe={dmap.pe:.12g},da={dmap.da:.12g},"
                 f"node={dmap.node},n_points={dmap.n_points}\n")
        fh.write("kh,nc,g_ratio,vg_ratio,phase_err\n")
        for row in dmap.points:
            for pt in row:
                fh.write(f"{pt.kh:.12g},{pt.nc:.12g},{pt.g_ratio:.12g},"
                         f"{pt.vg_ratio:.12g},{pt.phase_err:.12g}\n")
