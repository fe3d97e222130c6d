"""Time steppers for the 1D linear advection-diffusion-reaction equation.

    u_t + c u_x = nu u_xx + lambda u,   c, nu > 0,

with Dirichlet end values, discretized by one of four spatiotemporal
schemes. All steppers work on the nondimensional groups N_c = c dt/h
(CFL), Pe = nu dt/h^2 and Da = lambda dt, and accept real or complex
nodal vectors; complex input is stepped by two real passes wherever a
linear solve is involved.

Dirichlet handling: implicit systems get identity rows at both ends
carrying the boundary data; explicit stages re-impose the end values
after evaluation. Either way the interior stencil rows stay exactly as
analyzed spectrally.

Steppers factor their stage matrices once per configuration and are
immutable afterwards; a run owns its state, so independent runs can
execute in parallel.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .operators import (
    DerivativeOperator,
    Grid1D,
    build_cd2_second,
    build_lele_second,
    build_nccd,
    build_oucs3,
)


class AdrInstabilityError(Exception):
    """Non-finite value produced during a run; carries step and node index."""

    def __init__(self, step: int, node: int, t: float):
        self.step = step
        self.node = node
        self.t = t
        super().__init__(f"non-finite value at node {node} after step {step} (t={t:g})")


class SchemeId(enum.Enum):
    EXPLICIT_OUCS3_CD2 = "explicit-oucs3-cd2"
    IMPLICIT_OUCS3_LELE = "implicit-oucs3-lele"
    IMEX_OUCS3_LELE = "imex-oucs3-lele"
    IMEX_NCCD = "imex-nccd"


@dataclass(frozen=True)
class AdrConfig:
    """Physical parameters plus grid and time step.

    The nondimensional groups are always recomputed from the stored fields,
    so they cannot drift out of consistency.
    """

    c: float
    nu: float
    lam: float
    dt: float
    grid: Grid1D

    def __post_init__(self):
        if not (self.c > 0 and self.nu > 0 and self.dt > 0):
            raise ValueError("require c > 0, nu > 0, dt > 0")

    @property
    def n_c(self) -> float:
        return self.c * self.dt / self.grid.h

    @property
    def pe(self) -> float:
        return self.nu * self.dt / self.grid.h**2

    @property
    def da(self) -> float:
        return self.lam * self.dt


@dataclass(frozen=True)
class SolutionState:
    """Nodal solution vector at time t. Values are finite in any accepted
    state; `run` aborts with AdrInstabilityError the moment they are not."""

    values: np.ndarray
    t: float


def scheme_operators(scheme: SchemeId, grid: Grid1D):
    """The (first-derivative, second-derivative) operator pair of a scheme."""
    if scheme is SchemeId.EXPLICIT_OUCS3_CD2:
        return build_oucs3(grid), build_cd2_second(grid)
    if scheme is SchemeId.IMPLICIT_OUCS3_LELE or scheme is SchemeId.IMEX_OUCS3_LELE:
        return build_oucs3(grid), build_lele_second(grid)
    if scheme is SchemeId.IMEX_NCCD:
        return build_nccd(grid)
    raise ValueError(f"unknown scheme {scheme!r}")


def _check_ops(cfg: AdrConfig, *ops: DerivativeOperator) -> None:
    for op in ops:
        if op.n_points != cfg.grid.n_points:
            raise ValueError("operator size does not match grid")


def _bc_of(values: np.ndarray, bc):
    return (values[0], values[-1]) if bc is None else bc


def _pin(values: np.ndarray, bc) -> np.ndarray:
    values[0], values[-1] = bc
    return values


def _identity_end_rows(m: np.ndarray) -> np.ndarray:
    m[0, :] = 0.0
    m[0, 0] = 1.0
    m[-1, :] = 0.0
    m[-1, -1] = 1.0
    return m


def _lu_solve_any(lu, b: np.ndarray) -> np.ndarray:
    # real factorization; complex rhs handled as two real solves
    if np.iscomplexobj(b):
        return lu_solve(lu, b.real) + 1j * lu_solve(lu, b.imag)
    return lu_solve(lu, b)


class ExplicitRk2Stepper:
    """Heun (two-stage RK2) stepping with upwind-compact advection and CD2 diffusion.

    Stage 1:  u* = u - N_c D1 u + Pe D2 u + Da u
    Stage 2:  u+ = u - N_c/2 D1 (u*+u) + Pe/2 D2 (u*+u) + Da/2 (u*+u)
    """

    scheme = SchemeId.EXPLICIT_OUCS3_CD2

    def __init__(self, cfg: AdrConfig, d1: DerivativeOperator, d2: DerivativeOperator):
        _check_ops(cfg, d1, d2)
        self.cfg = cfg
        self.d1 = d1.matrix
        self.d2 = d2.matrix

    def step(self, state: SolutionState, bc=None) -> SolutionState:
        cfg = self.cfg
        u = state.values
        bc = _bc_of(u, bc)
        nc, pe, da = cfg.n_c, cfg.pe, cfg.da
        us = u - nc * (self.d1 @ u) + pe * (self.d2 @ u) + da * u
        _pin(us, bc)
        both = us + u
        un = u - (nc / 2) * (self.d1 @ both) + (pe / 2) * (self.d2 @ both) + (da / 2) * both
        _pin(un, bc)
        return SolutionState(un, state.t + cfg.dt)


class ImplicitMidpointStepper:
    """Implicit mid-point rule; the stage matrix is factored once and reused.

    [(1 - Da/2) I + N_c/2 D1 - Pe/2 D2] u+ = [(1 + Da/2) I - N_c/2 D1 + Pe/2 D2] u
    """

    scheme = SchemeId.IMPLICIT_OUCS3_LELE

    def __init__(self, cfg: AdrConfig, d1: DerivativeOperator, d2: DerivativeOperator):
        _check_ops(cfg, d1, d2)
        self.cfg = cfg
        n = cfg.grid.n_points
        eye = np.eye(n)
        nc, pe, da = cfg.n_c, cfg.pe, cfg.da
        m = (1 - da / 2) * eye + (nc / 2) * d1.matrix - (pe / 2) * d2.matrix
        self.lu = lu_factor(_identity_end_rows(m))
        self.rhs_mat = (1 + da / 2) * eye - (nc / 2) * d1.matrix + (pe / 2) * d2.matrix

    def step(self, state: SolutionState, bc=None) -> SolutionState:
        u = state.values
        bc = _bc_of(u, bc)
        rhs = self.rhs_mat @ u
        rhs[0], rhs[-1] = bc
        un = _lu_solve_any(self.lu, rhs)
        return SolutionState(un, state.t + self.cfg.dt)


class ImexStepper:
    """Mid-point-implicit diffusion/reaction with Heun-explicit advection.

    Stage 1 (implicit): [(1 - Da/2) I - Pe/2 D2] u* =
                        [(1 + Da/2) I + Pe/2 D2 - N_c D1] u
    Stage 2 (explicit): u+ = u - 1/2 (N_c D1 - Pe D2 - Da I)(u + u*)
    """

    def __init__(self, cfg: AdrConfig, d1: DerivativeOperator, d2: DerivativeOperator,
                 scheme: SchemeId = SchemeId.IMEX_OUCS3_LELE):
        _check_ops(cfg, d1, d2)
        self.cfg = cfg
        self.scheme = scheme
        n = cfg.grid.n_points
        eye = np.eye(n)
        nc, pe, da = cfg.n_c, cfg.pe, cfg.da
        m = (1 - da / 2) * eye - (pe / 2) * d2.matrix
        self.lu = lu_factor(_identity_end_rows(m))
        self.rhs_mat = (1 + da / 2) * eye + (pe / 2) * d2.matrix - nc * d1.matrix
        self.d1 = d1.matrix
        self.d2 = d2.matrix

    def step(self, state: SolutionState, bc=None) -> SolutionState:
        cfg = self.cfg
        u = state.values
        bc = _bc_of(u, bc)
        rhs = self.rhs_mat @ u
        rhs[0], rhs[-1] = bc
        us = _lu_solve_any(self.lu, rhs)
        both = u + us
        nc, pe, da = cfg.n_c, cfg.pe, cfg.da
        un = u - 0.5 * (nc * (self.d1 @ both) - pe * (self.d2 @ both) - da * both)
        _pin(un, bc)
        return SolutionState(un, state.t + cfg.dt)


def make_stepper(scheme: SchemeId, cfg: AdrConfig, ops=None):
    """Build (and for implicit schemes factor) the stepper for one config."""
    d1, d2 = scheme_operators(scheme, cfg.grid) if ops is None else ops
    if scheme is SchemeId.EXPLICIT_OUCS3_CD2:
        return ExplicitRk2Stepper(cfg, d1, d2)
    if scheme is SchemeId.IMPLICIT_OUCS3_LELE:
        return ImplicitMidpointStepper(cfg, d1, d2)
    return ImexStepper(cfg, d1, d2, scheme)


def step_explicit_rk2(state, cfg, d1, d2, bc=None) -> SolutionState:
    return ExplicitRk2Stepper(cfg, d1, d2).step(state, bc)


def step_implicit_midpoint(state, cfg, d1, d2, bc=None) -> SolutionState:
    return ImplicitMidpointStepper(cfg, d1, d2).step(state, bc)


def step_imex(state, cfg, d1, d2, bc=None, scheme=SchemeId.IMEX_OUCS3_LELE) -> SolutionState:
    return ImexStepper(cfg, d1, d2, scheme).step(state, bc)


def run(scheme: SchemeId, cfg: AdrConfig, u0: SolutionState, t_end: float,
        snapshot_times=()) -> list:
    """March from u0 to t_end, snapshotting at the nearest completed steps.

    Dirichlet data is frozen from the end values of u0. Returns the list of
    snapshots (u0 itself when it matches a requested time) plus the final
    state. Aborts with AdrInstabilityError on the first non-finite value.
    """
    if t_end < u0.t:
        raise ValueError("t_end must be >= u0.t")
    n_steps = int(round((t_end - u0.t) / cfg.dt))
    want = sorted({min(max(int(round((ts - u0.t) / cfg.dt)), 0), n_steps)
                   for ts in snapshot_times})
    stepper = make_stepper(scheme, cfg)
    bc = (u0.values[0], u0.values[-1])
    out = []
    state = u0
    if want and want[0] == 0:
        out.append(state)
        want = want[1:]
    for k in range(1, n_steps + 1):
        values = stepper.step(state, bc).values
        if not np.all(np.isfinite(values)):
            bad = int(np.argmin(np.isfinite(values)))
            raise AdrInstabilityError(k, bad, u0.t + k * cfg.dt)
        state = SolutionState(values, u0.t + k * cfg.dt)
        if want and k == want[0]:
            out.append(state)
            want = want[1:]
    if not out or out[-1].t < state.t:
        out.append(state)
    return out
