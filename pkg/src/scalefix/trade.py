"""Built-in quantitative trade models.

Three parameter bundles and their fixed-point systems:

  * one-sector: J countries, one sector, country-specific labor shares;
    unknowns are market access OMEGA[i] and transformed price index P[i]
    (the price index enters as its -theta power throughout).
  * multi-sector: J countries, S sectors, labor the only input;
    unknowns OMEGA[i][s], P[i][s] and the transformed wage W[i], which
    stands for the wage raised to 1 + sum of sector elasticities.
  * general: sectors plus an input-output structure of intermediates;
    unknowns OMEGA[i][s], P[i][s] and the raw wage w[i].  No closed-form
    sign structure is attached: certification is evidence-only there.

All builders return immutable PositiveSystem values with analytic
elasticities where available, a closed-form scaling direction, and (for
the two proven models) a fixed sign pattern.  Infinite trade costs are
legal as long as the finite-cost graph stays strongly connected; the
corresponding sum terms are exact zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from scalefix.solve import SolveOptions, SolveResult, iterate
from scalefix.spectral import strongly_connected_components
from scalefix.system import PositiveSystem, StateVector

__all__ = [
    "ParameterError",
    "StaleStateError",
    "OneSectorParams",
    "MultiSectorParams",
    "GeneralParams",
    "Outcomes",
    "ShockStep",
    "CounterfactualResult",
    "gamma_constant",
    "build_one_sector",
    "build_multi_sector",
    "build_general",
    "build_system",
    "recover_outcomes",
    "apply_shock",
    "counterfactual",
]


class ParameterError(ValueError):
    """Invalid model parameters; `field` names the offending input."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class StaleStateError(RuntimeError):
    """recover_outcomes was handed a state that is not an equilibrium."""


# --------------------------------------------------------------- gamma

# Lanczos approximation, g = 7, 9 coefficients.  Relative error is below
# 1e-13 on (0, 1], comfortably past the 12 significant digits required.
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _gamma(x: float) -> float:
    if x < 0.5:
        # recurrence instead of reflection: argument stays positive here
        return _gamma(x + 1.0) / x
    x -= 1.0
    acc = _LANCZOS[0]
    for i, c in enumerate(_LANCZOS[1:], start=1):
        acc += c / (x + i)
    t = x + 7.5
    return math.sqrt(2.0 * math.pi) * t ** (x + 0.5) * math.exp(-t) * acc


def gamma_constant(theta: float, sigma: float) -> float:
    """The constant multiplying every trade term: the gamma function of
    (theta + 1 - sigma) / theta, raised to -theta / (1 - sigma)."""
    if sigma <= 1.0:
        raise ParameterError("sigma must exceed 1", field="sigma")
    if theta <= sigma - 1.0:
        raise ParameterError(
            f"theta={theta} must exceed sigma-1={sigma - 1}: the gamma "
            "argument (theta+1-sigma)/theta must be positive",
            field="theta")
    arg = (theta + 1.0 - sigma) / theta
    return _gamma(arg) ** (-theta / (1.0 - sigma))


# ---------------------------------------------------------- parameters


def _as_pos_vector(x, n, name) -> NDArray[np.float64]:
    a = np.asarray(x, dtype=float)
    if a.shape != (n,):
        raise ParameterError(f"{name} must have shape ({n},)", field=name)
    if not np.all(np.isfinite(a) & (a > 0)):
        raise ParameterError(f"{name} entries must be positive and finite",
                             field=name)
    return a


def _check_tau(tau, shape, name="tau") -> NDArray[np.float64]:
    t = np.asarray(tau, dtype=float)
    if t.shape != shape:
        raise ParameterError(f"{name} must have shape {shape}", field=name)
    finite = np.isfinite(t)
    if np.any(t[finite] < 1.0) or np.any(np.isnan(t)):
        raise ParameterError(f"{name} entries must be >= 1 or infinite",
                             field=name)
    diag = t[np.arange(shape[0]), np.arange(shape[0])] if t.ndim == 2 \
        else t[np.arange(shape[0]), np.arange(shape[0]), :]
    if not np.all(np.isfinite(diag)):
        raise ParameterError(f"{name} must be finite on the diagonal",
                             field=name)
    return t


def _connectivity(finite_edges: NDArray[np.bool_]):
    # graph on countries; certification re-checks on the full system
    comps = strongly_connected_components(finite_edges.astype(float))
    return len(comps) == 1, comps


@dataclass(frozen=True)
class OneSectorParams:
    """One sector, J countries, labor shares gamma in [0, 1]."""

    A: NDArray[np.float64]
    tau: NDArray[np.float64]
    gamma: NDArray[np.float64]
    L: NDArray[np.float64]
    theta: float
    sigma: float
    connected: bool = field(init=False)
    blocs: tuple = field(init=False)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        J = A.shape[0] if A.ndim == 1 else 0
        if J < 1:
            raise ParameterError("A must be a nonempty vector", field="A")
        object.__setattr__(self, "A", _as_pos_vector(A, J, "A"))
        object.__setattr__(self, "tau", _check_tau(self.tau, (J, J)))
        g = np.asarray(self.gamma, dtype=float)
        if g.shape != (J,) or np.any(g < 0) or np.any(g > 1):
            raise ParameterError("gamma must be J values in [0, 1]",
                                 field="gamma")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "L", _as_pos_vector(self.L, J, "L"))
        gamma_constant(self.theta, self.sigma)  # validates theta, sigma
        connected, blocs = _connectivity(np.isfinite(self.tau))
        object.__setattr__(self, "connected", connected)
        object.__setattr__(self, "blocs", tuple(tuple(b) for b in blocs))
        for arr in (self.A, self.tau, self.gamma, self.L):
            arr.setflags(write=False)

    @property
    def J(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class MultiSectorParams:
    """J countries, S sectors, labor-only production."""

    A: NDArray[np.float64]        # (J, S)
    tau: NDArray[np.float64]      # (J, J, S)
    alpha: NDArray[np.float64]    # (J, S), rows sum to 1
    L: NDArray[np.float64]        # (J,)
    theta: NDArray[np.float64]    # (S,)
    sigma: NDArray[np.float64]    # (S,)
    connected: bool = field(init=False)
    blocs: tuple = field(init=False)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 2:
            raise ParameterError("A must be a J x S matrix", field="A")
        J, S = A.shape
        if not np.all(np.isfinite(A) & (A > 0)):
            raise ParameterError("A entries must be positive", field="A")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "tau", _check_tau(self.tau, (J, J, S)))
        al = np.asarray(self.alpha, dtype=float)
        if al.shape != (J, S) or np.any(al < 0):
            raise ParameterError("alpha must be J x S nonnegative",
                                 field="alpha")
        rowsums = al.sum(axis=1)
        if np.max(np.abs(rowsums - 1.0)) > 1e-12:
            bad = int(np.argmax(np.abs(rowsums - 1.0)))
            raise ParameterError(
                f"alpha row for country {bad + 1} sums to {rowsums[bad]:.17g},"
                " expected 1", field="alpha")
        object.__setattr__(self, "alpha", al)
        object.__setattr__(self, "L", _as_pos_vector(self.L, J, "L"))
        th = _as_pos_vector(self.theta, S, "theta")
        sg = np.asarray(self.sigma, dtype=float)
        if sg.shape != (S,):
            raise ParameterError("sigma must have one entry per sector",
                                 field="sigma")
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "sigma", sg)
        for s in range(S):
            gamma_constant(float(th[s]), float(sg[s]))
        connected, blocs = _connectivity(np.isfinite(self.tau).any(axis=2))
        object.__setattr__(self, "connected", connected)
        object.__setattr__(self, "blocs", tuple(tuple(b) for b in blocs))
        for arr in (self.A, self.tau, self.alpha, self.L, th, sg):
            arr.setflags(write=False)

    @property
    def J(self) -> int:
        return self.A.shape[0]

    @property
    def S(self) -> int:
        return self.A.shape[1]

    @property
    def Theta(self) -> float:
        return float(self.theta.sum())


@dataclass(frozen=True)
class GeneralParams:
    """Sectors plus intermediates.

    gamma_labor[i, s] is the labor cost share of sector s in country i;
    gamma_io[i, r, s] the cost share of sector-r intermediates used by
    sector s.  For every (i, s) the labor share plus the column of input
    shares must sum to one.
    """

    A: NDArray[np.float64]
    tau: NDArray[np.float64]
    alpha: NDArray[np.float64]
    L: NDArray[np.float64]
    theta: NDArray[np.float64]
    sigma: NDArray[np.float64]
    gamma_labor: NDArray[np.float64]   # (J, S)
    gamma_io: NDArray[np.float64]      # (J, S, S) input sector first
    connected: bool = field(init=False)
    blocs: tuple = field(init=False)

    def __post_init__(self):
        base = MultiSectorParams(self.A, self.tau, self.alpha, self.L,
                                 self.theta, self.sigma)
        for name in ("A", "tau", "alpha", "L", "theta", "sigma"):
            object.__setattr__(self, name, getattr(base, name))
        J, S = base.J, base.S
        gl = np.asarray(self.gamma_labor, dtype=float)
        gio = np.asarray(self.gamma_io, dtype=float)
        if gl.shape != (J, S):
            raise ParameterError("gamma_labor must be J x S",
                                 field="gamma_labor")
        if gio.shape != (J, S, S):
            raise ParameterError("gamma_io must be J x S x S",
                                 field="gamma_io")
        if np.any(gl < 0) or np.any(gl > 1) or np.any(gio < 0) or np.any(gio > 1):
            raise ParameterError("cost shares must lie in [0, 1]",
                                 field="gamma_io")
        total = gl + gio.sum(axis=1)  # labor + all input sectors, per (i, s)
        if np.max(np.abs(total - 1.0)) > 1e-12:
            raise ParameterError(
                "labor share plus intermediate shares must sum to 1 "
                "for every country and sector", field="gamma_labor")
        object.__setattr__(self, "gamma_labor", gl)
        object.__setattr__(self, "gamma_io", gio)
        object.__setattr__(self, "connected", base.connected)
        object.__setattr__(self, "blocs", base.blocs)
        gl.setflags(write=False)
        gio.setflags(write=False)

    @property
    def J(self) -> int:
        return self.A.shape[0]

    @property
    def S(self) -> int:
        return self.A.shape[1]


# ------------------------------------------------------------- labels


def one_sector_labels(J: int) -> tuple[str, ...]:
    return tuple(f"OMEGA[{i + 1}]" for i in range(J)) + \
        tuple(f"P[{i + 1}]" for i in range(J))


def multi_sector_labels(J: int, S: int, wage: str = "W") -> tuple[str, ...]:
    oms = tuple(f"OMEGA[{i + 1}][{s + 1}]" for i in range(J) for s in range(S))
    pps = tuple(f"P[{i + 1}][{s + 1}]" for i in range(J) for s in range(S))
    ws = tuple(f"{wage}[{i + 1}]" for i in range(J))
    return oms + pps + ws


# ------------------------------------------------------ one-sector model


def _tau_power(tau: NDArray[np.float64], theta) -> NDArray[np.float64]:
    # infinity to the negative power is an exact zero, no overflow path
    return tau ** (-theta)


def _one_sector_pieces(p: OneSectorParams):
    J = p.J
    kappa = gamma_constant(p.theta, p.sigma)
    a = 1.0 / (1.0 + p.theta * p.gamma)
    b = (1.0 - p.gamma) / (1.0 + p.theta * p.gamma) - 1.0
    # (gamma/L)^(-theta*gamma/(1+theta*gamma)), taken as 1 where gamma = 0
    expo = -p.theta * p.gamma * a
    prefac = np.where(p.gamma > 0, (p.gamma / p.L) ** expo, 1.0)
    T = _tau_power(p.tau, p.theta)
    KOm = kappa * p.A[:, None] * T * prefac[None, :]
    KP = kappa * p.A[None, :] * T.T * prefac[None, :]
    return a, b, prefac, KOm, KP


def build_one_sector(p: OneSectorParams) -> PositiveSystem:
    """Fixed-point system of dimension 2J over (OMEGA[i], P[i])."""
    J = p.J
    a, b, _, KOm, KP = _one_sector_pieces(p)

    def evaluate(x):
        om, pp = x[:J], x[J:]
        return np.concatenate([
            KOm @ (om ** a * pp ** b),
            KP @ (om ** (a - 1.0) * pp ** (b + 1.0)),
        ])

    def elasticity(x):
        om, pp = x[:J], x[J:]
        t_om = om ** a * pp ** b
        t_pp = om ** (a - 1.0) * pp ** (b + 1.0)
        f_om = KOm @ t_om
        f_pp = KP @ t_pp
        sh_om = KOm * t_om[None, :] / f_om[:, None]
        sh_pp = KP * t_pp[None, :] / f_pp[:, None]
        E = np.zeros((2 * J, 2 * J))
        E[:J, :J] = sh_om * a[None, :]
        E[:J, J:] = sh_om * b[None, :]
        E[J:, :J] = sh_pp * (a - 1.0)[None, :]
        E[J:, J:] = sh_pp * (b + 1.0)[None, :]
        return E

    fin = np.isfinite(p.tau)
    pos_g = p.gamma > 0
    sub_g = p.gamma < 1
    pattern = np.zeros((2 * J, 2 * J), dtype=int)
    pattern[:J, :J] = fin.astype(int)
    pattern[:J, J:] = -(fin & pos_g[None, :]).astype(int)
    pattern[J:, :J] = -(fin.T & pos_g[None, :]).astype(int)
    pattern[J:, J:] = (fin.T & sub_g[None, :]).astype(int)

    u = np.concatenate([np.ones(J),
                        np.full(J, -p.theta / (1.0 + p.theta))])
    return PositiveSystem(
        labels=one_sector_labels(J),
        evaluate_values=evaluate,
        elasticity_values=elasticity,
        sign_pattern=pattern,
        scaling=u,
        kind="one-sector",
        meta={"params": p},
    )


# ---------------------------------------------------- multi-sector model


def _multi_sector_pieces(p: MultiSectorParams):
    J, S = p.J, p.S
    kappa = np.array([gamma_constant(float(p.theta[s]), float(p.sigma[s]))
                      for s in range(S)])
    KOm = np.empty((S, J, J))
    KP = np.empty((S, J, J))
    for s in range(S):
        T = _tau_power(p.tau[:, :, s], p.theta[s])
        KOm[s] = kappa[s] * p.A[:, None, s] * T * (p.alpha[:, s] * p.L)[None, :]
        KP[s] = kappa[s] * p.A[None, :, s] * T.T
    return kappa, KOm, KP


def build_multi_sector(p: MultiSectorParams) -> PositiveSystem:
    """System of dimension 2JS + J over (OMEGA[i][s], P[i][s], W[i])."""
    J, S = p.J, p.S
    Theta = p.Theta
    _, KOm, KP = _multi_sector_pieces(p)
    e_w = 1.0 / (1.0 + Theta)
    e_p = -p.theta * e_w                 # (S,) exponent of W in the P rows
    e_self = (Theta - p.theta) * e_w     # (S,) exponent of W in its own row
    n = 2 * J * S + J

    def unpack(x):
        om = x[:J * S].reshape(J, S)
        pp = x[J * S:2 * J * S].reshape(J, S)
        W = x[2 * J * S:]
        return om, pp, W

    def evaluate(x):
        om, pp, W = unpack(x)
        f_om = np.empty((J, S))
        f_pp = np.empty((J, S))
        Ww = W ** e_w
        for s in range(S):
            f_om[:, s] = KOm[s] @ (Ww / pp[:, s])
            f_pp[:, s] = KP[s] @ (W ** e_p[s])
        f_W = ((om / p.L[:, None]) * W[:, None] ** e_self[None, :]).sum(axis=1)
        return np.concatenate([f_om.ravel(), f_pp.ravel(), f_W])

    def elasticity(x):
        om, pp, W = unpack(x)
        E = np.zeros((n, n))
        Ww = W ** e_w
        woff = 2 * J * S
        for s in range(S):
            t_om = Ww / pp[:, s]
            f_om = KOm[s] @ t_om
            sh_om = KOm[s] * t_om[None, :] / f_om[:, None]
            t_pp = W ** e_p[s]
            f_pp = KP[s] @ t_pp
            sh_pp = KP[s] * t_pp[None, :] / f_pp[:, None]
            rows_om = np.arange(J) * S + s
            rows_pp = J * S + rows_om
            cols_pp = J * S + np.arange(J) * S + s
            E[np.ix_(rows_om, cols_pp)] = -sh_om
            E[np.ix_(rows_om, woff + np.arange(J))] = sh_om * e_w
            E[np.ix_(rows_pp, woff + np.arange(J))] = sh_pp * e_p[s]
        terms_W = (om / p.L[:, None]) * W[:, None] ** e_self[None, :]
        f_W = terms_W.sum(axis=1)
        sh_W = terms_W / f_W[:, None]
        for i in range(J):
            E[woff + i, i * S + np.arange(S)] = sh_W[i]
            E[woff + i, woff + i] = float(sh_W[i] @ e_self)
        return E

    fin = np.isfinite(p.tau)            # (J, J, S)
    apos = p.alpha > 0                  # (J, S)
    pattern = np.zeros((n, n), dtype=int)
    woff = 2 * J * S
    for s in range(S):
        live = fin[:, :, s] & apos[None, :, s]
        rows_om = np.arange(J) * S + s
        pattern[np.ix_(rows_om, J * S + rows_om)] = -live.astype(int)
        pattern[np.ix_(rows_om, woff + np.arange(J))] = live.astype(int)
        pattern[np.ix_(J * S + rows_om, woff + np.arange(J))] = \
            -fin[:, :, s].T.astype(int)
    for i in range(J):
        pattern[woff + i, i * S + np.arange(S)] = 1
        pattern[woff + i, woff + i] = 1 if S >= 2 else 0

    u = np.concatenate([
        np.tile((1.0 + p.theta) / (1.0 + Theta), J),
        np.tile(-p.theta / (1.0 + Theta), J),
        np.ones(J),
    ])
    return PositiveSystem(
        labels=multi_sector_labels(J, S),
        evaluate_values=evaluate,
        elasticity_values=elasticity,
        sign_pattern=pattern,
        scaling=u,
        kind="multi-sector",
        meta={"params": p},
    )


# --------------------------------------------------------- general model


def _general_pieces(p: GeneralParams):
    J, S = p.J, p.S
    kappa = np.array([gamma_constant(float(p.theta[s]), float(p.sigma[s]))
                      for s in range(S)])
    KOm = np.empty((S, J, J))
    KP = np.empty((S, J, J))
    for s in range(S):
        T = _tau_power(p.tau[:, :, s], p.theta[s])
        KOm[s] = kappa[s] * p.A[:, None, s] * T
        KP[s] = kappa[s] * p.A[None, :, s] * T.T
    return kappa, KOm, KP


def _general_costs(p: GeneralParams, pp: NDArray, w: NDArray) -> NDArray:
    # log c_is = labor share * log w_i + sum_r input share * log P_ir
    lnP = -np.log(pp) / p.theta[None, :]
    lnc = p.gamma_labor * np.log(w)[:, None] + \
        np.einsum("irs,ir->is", p.gamma_io, lnP)
    return np.exp(lnc)


def build_general(p: GeneralParams) -> PositiveSystem:
    """System over (OMEGA[i][s], P[i][s], w[i]) with intermediates.

    Each evaluation computes input costs, revenues and expenditures from
    the current state before forming the three blocks.  No sign pattern
    or analytic elasticity: the certifier works from samples here.
    Iterating this system usually needs damping well below 1.
    """
    J, S = p.J, p.S
    _, KOm, KP = _general_pieces(p)

    def unpack(x):
        om = x[:J * S].reshape(J, S)
        pp = x[J * S:2 * J * S].reshape(J, S)
        w = x[2 * J * S:]
        return om, pp, w

    def evaluate(x):
        om, pp, w = unpack(x)
        c = _general_costs(p, pp, w)
        R = om * c ** (-p.theta[None, :])
        E = p.alpha * (w * p.L)[:, None] + np.einsum("isr,ir->is", p.gamma_io, R)
        f_om = np.empty((J, S))
        f_pp = np.empty((J, S))
        for s in range(S):
            f_om[:, s] = KOm[s] @ (E[:, s] / pp[:, s])
            # R/omega reduces to c^-theta; forming it directly keeps the
            # price block exactly independent of omega
            f_pp[:, s] = KP[s] @ (c[:, s] ** (-p.theta[s]))
        f_w = (p.gamma_labor * R).sum(axis=1) / p.L
        return np.concatenate([f_om.ravel(), f_pp.ravel(), f_w])

    theta_max = float(p.theta.max())
    u = np.concatenate([
        np.tile((1.0 + p.theta) / (1.0 + theta_max), J),
        np.tile(-p.theta / (1.0 + theta_max), J),
        np.full(J, 1.0 / (1.0 + theta_max)),
    ])
    return PositiveSystem(
        labels=multi_sector_labels(J, S, wage="w"),
        evaluate_values=evaluate,
        scaling=u,
        kind="general",
        meta={"params": p},
    )


def build_system(params) -> PositiveSystem:
    """Dispatch on the parameter bundle type."""
    if isinstance(params, GeneralParams):
        return build_general(params)
    if isinstance(params, MultiSectorParams):
        return build_multi_sector(params)
    if isinstance(params, OneSectorParams):
        return build_one_sector(params)
    raise TypeError(f"unknown parameter bundle {type(params).__name__}")


# ------------------------------------------------------------- outcomes


@dataclass(frozen=True)
class Outcomes:
    """Observable equilibrium objects recovered from a solved state.

    Sector-indexed arrays keep a sector axis even when S = 1.  pi[i, j, s]
    is the share of destination j's sector-s spending sourced from i.
    """

    w: NDArray[np.float64]      # (J,)
    R: NDArray[np.float64]      # (J, S)
    E: NDArray[np.float64]      # (J, S)
    P: NDArray[np.float64]      # (J, S)
    c: NDArray[np.float64]      # (J, S)
    pi: NDArray[np.float64]     # (J, J, S)
    U: NDArray[np.float64]      # (J,)

    def __post_init__(self):
        for a in (self.w, self.R, self.E, self.P, self.c, self.pi, self.U):
            np.asarray(a).setflags(write=False)


def _import_shares(A, c, tau, theta) -> NDArray[np.float64]:
    # normalized column by column so each destination's shares sum to 1
    J, S = c.shape
    pi = np.empty((J, J, S))
    for s in range(S):
        numer = A[:, s][:, None] * _tau_power(c[:, s][:, None] * tau[:, :, s],
                                              theta[s])
        pi[:, :, s] = numer / numer.sum(axis=0, keepdims=True)
    return pi


def _welfare(w, L, P, alpha) -> NDArray[np.float64]:
    # Cobb-Douglas real income: spending alpha*w*L on each sector at
    # price P gives utility w*L*prod(P^-alpha)
    return w * L * np.prod(P ** (-alpha), axis=1)


def _check_fresh(sys: PositiveSystem, x: StateVector, tol: float):
    F = sys._eval_checked(x.values)
    rel = float(np.max(np.abs(F - x.values) / x.values))
    if rel > tol:
        raise StaleStateError(
            f"state is not an equilibrium: relative residual {rel:.3e} "
            f"exceeds {tol:.1e}")


def recover_outcomes(kind: str, x_star: StateVector, params,
                     tol: float = 1e-6) -> Outcomes:
    """Wages, revenues, expenditures, price levels, input costs, import
    shares and welfare at a solved equilibrium.

    Refuses states whose relative fixed-point residual exceeds tol, since
    every downstream identity would silently degrade.
    """
    if kind == "one-sector":
        p: OneSectorParams = params
        _check_fresh(build_one_sector(p), x_star, tol)
        J = p.J
        om = x_star.values[:J]
        pp = x_star.values[J:]
        a, b, prefac, _, _ = _one_sector_pieces(p)
        R = prefac * om ** a * pp ** (b + 1.0)
        w = p.gamma * R / p.L
        P = pp ** (-1.0 / p.theta)
        c = np.where(p.gamma > 0, w ** p.gamma, 1.0) * P ** (1.0 - p.gamma)
        alpha = np.ones((J, 1))
        pi = _import_shares(p.A[:, None], c[:, None],
                            p.tau[:, :, None], np.array([p.theta]))
        U = _welfare(w, p.L, P[:, None], alpha)
        return Outcomes(w=w, R=R[:, None], E=R[:, None].copy(),
                        P=P[:, None], c=c[:, None], pi=pi, U=U)

    if kind == "multi-sector":
        mp: MultiSectorParams = params
        _check_fresh(build_multi_sector(mp), x_star, tol)
        J, S = mp.J, mp.S
        om = x_star.values[:J * S].reshape(J, S)
        pp = x_star.values[J * S:2 * J * S].reshape(J, S)
        W = x_star.values[2 * J * S:]
        w = W ** (1.0 / (1.0 + mp.Theta))
        c = np.tile(w[:, None], (1, S))
        R = om * w[:, None] ** (-mp.theta[None, :])
        E = mp.alpha * (w * mp.L)[:, None]
        P = pp ** (-1.0 / mp.theta[None, :])
        pi = _import_shares(mp.A, c, mp.tau, mp.theta)
        U = _welfare(w, mp.L, P, mp.alpha)
        return Outcomes(w=w, R=R, E=E, P=P, c=c, pi=pi, U=U)

    if kind == "general":
        gp: GeneralParams = params
        _check_fresh(build_general(gp), x_star, tol)
        J, S = gp.J, gp.S
        om = x_star.values[:J * S].reshape(J, S)
        pp = x_star.values[J * S:2 * J * S].reshape(J, S)
        w = x_star.values[2 * J * S:]
        c = _general_costs(gp, pp, w)
        R = om * c ** (-gp.theta[None, :])
        E = gp.alpha * (w * gp.L)[:, None] + \
            np.einsum("isr,ir->is", gp.gamma_io, R)
        P = pp ** (-1.0 / gp.theta[None, :])
        pi = _import_shares(gp.A, c, gp.tau, gp.theta)
        U = _welfare(w, gp.L, P, gp.alpha)
        return Outcomes(w=w, R=R, E=E, P=P, c=c, pi=pi, U=U)

    raise ValueError(f"unknown system kind {kind!r}")


# ------------------------------------------------------- counterfactuals


@dataclass(frozen=True)
class ShockStep:
    """One parameter edit: field, 1-based indices, '=' or '*=' and a value."""

    field: str
    indices: tuple[int, ...]
    op: str
    value: float

    def __post_init__(self):
        if self.op not in ("=", "*="):
            raise ParameterError(f"unknown shock operator {self.op!r}",
                                 field=self.field)


def apply_shock(params, steps: Sequence[ShockStep]):
    """Return a new parameter bundle with the edits applied.

    The result passes full validation again; connectivity is re-derived.
    """
    editable = {}
    if isinstance(params, OneSectorParams):
        names = ("A", "tau", "gamma", "L", "theta", "sigma")
        cls = OneSectorParams
    elif isinstance(params, GeneralParams):
        names = ("A", "tau", "alpha", "L", "theta", "sigma",
                 "gamma_labor", "gamma_io")
        cls = GeneralParams
    elif isinstance(params, MultiSectorParams):
        names = ("A", "tau", "alpha", "L", "theta", "sigma")
        cls = MultiSectorParams
    else:
        raise TypeError(f"unknown parameter bundle {type(params).__name__}")
    for name in names:
        val = getattr(params, name)
        editable[name] = np.array(val, dtype=float) if isinstance(
            val, np.ndarray) else val

    for step in steps:
        if step.field not in editable:
            raise ParameterError(f"no parameter field {step.field!r}",
                                 field=step.field)
        target = editable[step.field]
        if isinstance(target, float) or np.ndim(target) == 0:
            if step.indices:
                raise ParameterError(
                    f"{step.field} is a scalar, indices not allowed",
                    field=step.field)
            new = step.value if step.op == "=" else float(target) * step.value
            editable[step.field] = new
            continue
        if len(step.indices) != np.ndim(target):
            raise ParameterError(
                f"{step.field} needs {np.ndim(target)} indices, "
                f"got {len(step.indices)}", field=step.field)
        idx = tuple(k - 1 for k in step.indices)
        try:
            old = target[idx]
        except IndexError:
            raise ParameterError(
                f"index {step.indices} out of range for {step.field}",
                field=step.field) from None
        target[idx] = step.value if step.op == "=" else old * step.value

    return cls(**editable)


@dataclass(frozen=True)
class CounterfactualResult:
    base: Outcomes
    shocked: Outcomes
    changes: dict
    base_solve: SolveResult
    shocked_solve: SolveResult


def _relative_changes(base: Outcomes, shocked: Outcomes) -> dict:
    out = {}
    for name in ("w", "R", "E", "P", "c", "pi", "U"):
        old = getattr(base, name)
        new = getattr(shocked, name)
        with np.errstate(divide="ignore", invalid="ignore"):
            ch = np.where(old != 0.0, new / old - 1.0,
                          np.where(new == 0.0, 0.0, np.inf))
        out[name] = ch
    return out


def counterfactual(base_params, steps: Sequence[ShockStep],
                   opts: SolveOptions = SolveOptions(),
                   x0_values=None) -> CounterfactualResult:
    """Solve the model before and after a parameter shock.

    Both solves share the starting point and the numeraire rule, so the
    reported relative changes are well defined.  A shock that severs the
    trade network is rejected before any solving happens.
    """
    if not base_params.connected:
        raise ParameterError("base trade network is not connected",
                             field="tau")
    shocked_params = apply_shock(base_params, steps)
    if not shocked_params.connected:
        raise ParameterError(
            "shock disconnects the trade network into blocs "
            f"{shocked_params.blocs}", field="tau")

    results = []
    outcomes = []
    for params in (base_params, shocked_params):
        sys = build_system(params)
        x0 = sys.state(np.ones(sys.dimension) if x0_values is None
                       else x0_values)
        res = iterate(sys, x0, u=sys.scaling, opts=opts)
        if res.status != "converged":
            raise StaleStateError(
                f"solve did not converge ({res.status}): {res.message}")
        results.append(res)
        outcomes.append(recover_outcomes(sys.kind, res.x_star, params))
    return CounterfactualResult(
        base=outcomes[0],
        shocked=outcomes[1],
        changes=_relative_changes(outcomes[0], outcomes[1]),
        base_solve=results[0],
        shocked_solve=results[1],
    )
