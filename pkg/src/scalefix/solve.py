"""Fixed-point iteration in log coordinates with up-to-scale stopping.

The iteration is z_{n+1} = (1-d) z_n + d G(z_n) with G = log o F o exp.
Convergence is judged on the quotient of log space by the scaling
direction u (plain gauge norm when no u is known), then re-verified as a
relative residual on F itself before a run is reported converged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from scalefix.spectral import gauge_norm, quotient_norm
from scalefix.system import EvaluationError, PositiveSystem, StateVector, log_transform

__all__ = [
    "NumeraireRule",
    "SolveOptions",
    "SolveResult",
    "NormalizationError",
    "iterate",
    "up_to_scale_distance",
    "normalize",
    "trace_to_csv",
]

Status = Literal["converged", "budget-exhausted", "evaluation-failed"]


class NormalizationError(ValueError):
    """The numeraire rule cannot pin the scale (zero exponent at target)."""


@dataclass(frozen=True)
class NumeraireRule:
    """How to pin the free scale after convergence.

    kind is one of "first-coordinate-one", "geometric-mean-one",
    "named-coordinate".  label names the target coordinate for
    named-coordinate; block restricts geometric-mean-one to coordinates
    whose label starts with the given prefix (all coordinates if None).
    """

    kind: str = "first-coordinate-one"
    label: str | None = None
    block: str | None = None

    _KINDS = ("first-coordinate-one", "geometric-mean-one", "named-coordinate")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown numeraire rule {self.kind!r}")
        if self.kind == "named-coordinate" and not self.label:
            raise ValueError("named-coordinate rule needs a label")

    @classmethod
    def first(cls) -> "NumeraireRule":
        return cls("first-coordinate-one")

    @classmethod
    def geometric_mean(cls, block: str | None = None) -> "NumeraireRule":
        return cls("geometric-mean-one", block=block)

    @classmethod
    def named(cls, label: str) -> "NumeraireRule":
        return cls("named-coordinate", label=label)


@dataclass(frozen=True)
class SolveOptions:
    tol: float = 1e-10
    max_iter: int = 10_000
    numeraire_rule: NumeraireRule = field(default_factory=NumeraireRule)
    damping: float = 1.0

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if not (0.0 < self.damping <= 1.0):
            raise ValueError("damping must lie in (0, 1]")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass(frozen=True)
class SolveResult:
    """Outcome of one solve.

    step_gauge[n] and step_quotient[n] are the gauge and quotient norms
    of z_{n+1} - z_n; decay_rate is the empirical geometric rate fitted
    to the tail of step_gauge (None when the trace is too short), offered
    as a diagnostic only since the theory promises no rate.
    """

    x_star: StateVector
    status: Status
    iterations: int
    step_gauge: NDArray[np.float64]
    step_quotient: NDArray[np.float64]
    normalization_scalar: float
    decay_rate: float | None
    message: str = ""

    @property
    def residual_trace(self) -> list[tuple[float, float]]:
        return list(zip(self.step_gauge.tolist(), self.step_quotient.tolist()))


def _decay_rate(steps: NDArray[np.float64]) -> float | None:
    n = steps.shape[0]
    if n < 6:
        return None
    m = n // 2
    a, b = float(steps[m]), float(steps[-1])
    if a <= 0.0 or b <= 0.0:
        return None
    return float((b / a) ** (1.0 / (n - 1 - m)))


def iterate(sys: PositiveSystem, x0: StateVector, u=None,
            opts: SolveOptions = SolveOptions()) -> SolveResult:
    """Run the damped fixed-point iteration from x0.

    When u is given it must be nonzero in every coordinate; |u| is the
    gauge and steps are measured modulo span(u).  A run only reports
    converged once the quotient step is below tol AND the relative
    residual max_j |F(x)_j - x_j| / x_j is below tol.
    """
    if x0.labels != sys.labels:
        raise ValueError("x0 belongs to a different system")
    if u is not None:
        u = np.asarray(u, dtype=float)
        if u.shape != (sys.dimension,):
            raise ValueError("u has wrong dimension")
        if np.any(u == 0.0):
            raise ValueError("gauge from u needs every u_j nonzero")
        v = np.abs(u)
    else:
        v = np.ones(sys.dimension)

    d = opts.damping
    z = np.log(x0.values)
    gauge_steps: list[float] = []
    quot_steps: list[float] = []

    def result(status: Status, zz, iters, c=1.0, msg="") -> SolveResult:
        sg = np.asarray(gauge_steps)
        sq = np.asarray(quot_steps)
        return SolveResult(
            x_star=sys.state(np.exp(zz)),
            status=status,
            iterations=iters,
            step_gauge=sg,
            step_quotient=sq,
            normalization_scalar=c,
            decay_rate=_decay_rate(sg),
            message=msg,
        )

    try:
        Gz = log_transform(z, sys)
    except EvaluationError as exc:
        return result("evaluation-failed", z, 0, msg=str(exc))

    for it in range(1, opts.max_iter + 1):
        z_next = (1.0 - d) * z + d * Gz
        step = z_next - z
        sg = gauge_norm(step, v)
        sq = quotient_norm(step, u, v) if u is not None else sg
        gauge_steps.append(sg)
        quot_steps.append(sq)
        try:
            Gz_next = log_transform(z_next, sys)
        except EvaluationError as exc:
            return result("evaluation-failed", z, it, msg=str(exc))
        if sq <= opts.tol:
            residual = float(np.max(np.abs(np.expm1(Gz_next - z_next))))
            if residual <= opts.tol:
                x = sys.state(np.exp(z_next))
                if u is not None:
                    x_norm, c = normalize(x, u, opts.numeraire_rule)
                    return result("converged", np.log(x_norm.values), it, c)
                return result("converged", z_next, it)
        z, Gz = z_next, Gz_next

    return result(
        "budget-exhausted", z, opts.max_iter,
        msg=(f"no convergence in {opts.max_iter} iterations; "
             f"last steps gauge={gauge_steps[-1]:.3e} "
             f"quotient={quot_steps[-1]:.3e}"))


def up_to_scale_distance(x: StateVector, y: StateVector, u) -> float:
    """Distance between x and y modulo the scaling family c^u.

    Zero exactly when y = c^u x for some c > 0.
    """
    u = np.asarray(u, dtype=float)
    if x.values.shape != y.values.shape or u.shape != x.values.shape:
        raise ValueError("dimension mismatch")
    return quotient_norm(np.log(x.values) - np.log(y.values), u, np.abs(u))


def _block_indices(labels: tuple[str, ...], block: str | None) -> NDArray[np.int64]:
    if block is None:
        return np.arange(len(labels))
    idx = np.array([j for j, name in enumerate(labels)
                    if name.startswith(block)], dtype=int)
    if idx.size == 0:
        raise NormalizationError(f"no coordinate label starts with {block!r}")
    return idx


def normalize(x: StateVector, u, rule: NumeraireRule) -> tuple[StateVector, float]:
    """Rescale x along the scaling family so the numeraire rule holds.

    Returns (c^u * x, c); ln c is the solution of one linear equation.
    Applying the same rule twice gives c = 1 the second time.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != x.values.shape:
        raise ValueError("dimension mismatch")
    lx = np.log(x.values)
    if rule.kind in ("first-coordinate-one", "named-coordinate"):
        j = 0 if rule.kind == "first-coordinate-one" else x.labels.index(rule.label)
        if u[j] == 0.0:
            raise NormalizationError(
                f"cannot normalize at {x.labels[j]!r}: scaling exponent is 0")
        lnc = -lx[j] / u[j]
    else:
        idx = _block_indices(x.labels, rule.block)
        usum = float(u[idx].sum())
        if usum == 0.0:
            raise NormalizationError(
                "cannot normalize: block scaling exponents sum to 0")
        lnc = -float(lx[idx].sum()) / usum
    scaled = StateVector(np.exp(lx + lnc * u), x.labels)
    return scaled, float(np.exp(lnc))


def trace_to_csv(res: SolveResult) -> str:
    """Residual traces as comma-separated text: iteration, step_gauge, step_quotient."""
    lines = ["iteration,step_gauge,step_quotient"]
    for n, (sg, sq) in enumerate(zip(res.step_gauge, res.step_quotient), start=1):
        lines.append(f"{n},{sg:.17g},{sq:.17g}")
    return "\n".join(lines) + "\n"
