"""Abstract positive fixed-point systems and their log-coordinate view.

A system is a map F taking strictly positive vectors to strictly positive
vectors.  All of the theory used by the certifier lives in log
coordinates: with G = log o F o exp, fixed points of F correspond one to
one with fixed points of G, and the Jacobian of G at z = log x is the
matrix of elasticities

    DG(z)[j, k] = (x_k / F_j(x)) * dF_j/dx_k,

which is what the sign and spectral checks consume.  Systems may ship an
analytic elasticity provider; otherwise central finite differences in log
space are used (stepping in log coordinates gives relative steps for
free).

Coordinates are addressed by label everywhere.  For the built-in trade
models the stacking order is: all market-access coordinates
(country-major, sector-minor), then all price-index coordinates, then any
wage coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "StateVector",
    "PositiveSystem",
    "ElasticityMatrix",
    "EvaluationError",
    "DifferentiationError",
    "log_transform",
    "elasticity_at",
]

NUMERIC_STEP = 1e-6


class EvaluationError(RuntimeError):
    """The system produced a non-positive or non-finite value.

    `coordinate` holds the label of the first offending entry.
    """

    def __init__(self, message: str, coordinate: str | None = None):
        super().__init__(message)
        self.coordinate = coordinate


class DifferentiationError(RuntimeError):
    """Numeric differentiation produced NaN."""


@dataclass(frozen=True)
class StateVector:
    """Strictly positive point in the system's domain."""

    values: NDArray[np.float64]
    labels: tuple[str, ...]

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if vals.ndim != 1 or len(labels) != vals.shape[0]:
            raise ValueError("values and labels must have matching length")
        bad = ~(np.isfinite(vals) & (vals > 0.0))
        if bad.any():
            j = int(np.flatnonzero(bad)[0])
            raise EvaluationError(
                f"coordinate {labels[j]!r} is {vals[j]!r}; "
                "state entries must be positive and finite",
                coordinate=labels[j],
            )

    def __len__(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, label: str) -> float:
        return float(self.values[self.labels.index(label)])


@dataclass(frozen=True)
class ElasticityMatrix:
    """Log-Jacobian of the system at a point.

    entries[j, k] is the elasticity of F_j with respect to coordinate k,
    evaluated at `point`.  `method` records how it was obtained
    ("analytic" or "numeric-central-log"); immutable once built.
    """

    entries: NDArray[np.float64]
    point: StateVector
    method: str

    def __post_init__(self):
        object.__setattr__(
            self, "entries", np.asarray(self.entries, dtype=float))
        self.entries.setflags(write=False)


@dataclass(frozen=True)
class PositiveSystem:
    """A map F on the strictly positive orthant, addressed by labels.

    evaluate_values is the raw callable on value arrays; it must be
    deterministic, side-effect-free and reentrant.  elasticity_values,
    when given, returns the analytic elasticity matrix at a value array.
    sign_pattern, when given, fixes the sign of every elasticity entry
    across the whole domain (-1, 0, +1), which certification uses for
    exact sign verdicts.  scaling, when given, is a closed-form scaling
    direction u with F(c^u x) = c^u F(x).
    """

    labels: tuple[str, ...]
    evaluate_values: Callable[[NDArray[np.float64]], NDArray[np.float64]]
    elasticity_values: Callable[[NDArray[np.float64]], NDArray[np.float64]] | None = None
    sign_pattern: NDArray[np.int64] | None = None
    scaling: NDArray[np.float64] | None = None
    kind: str = "custom"
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) == 0:
            raise ValueError("a system needs at least one coordinate")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("coordinate labels must be unique")
        if self.sign_pattern is not None:
            p = np.asarray(self.sign_pattern)
            if p.shape != (self.dimension, self.dimension):
                raise ValueError("sign_pattern must be N x N")
            if not np.isin(p, (-1, 0, 1)).all():
                raise ValueError("sign_pattern entries must be -1, 0 or +1")
        if self.scaling is not None:
            object.__setattr__(
                self, "scaling", np.asarray(self.scaling, dtype=float))

    @property
    def dimension(self) -> int:
        return len(self.labels)

    def state(self, values) -> StateVector:
        return StateVector(np.asarray(values, dtype=float), self.labels)

    def _eval_checked(self, x: NDArray[np.float64]) -> NDArray[np.float64]:
        # overflow/invalid deliberately silenced: the finiteness check
        # below turns them into coordinate-named errors
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            y = np.asarray(self.evaluate_values(x), dtype=float)
        if y.shape != (self.dimension,):
            raise EvaluationError(
                f"evaluate returned shape {y.shape}, expected ({self.dimension},)")
        bad = ~(np.isfinite(y) & (y > 0.0))
        if bad.any():
            j = int(np.flatnonzero(bad)[0])
            raise EvaluationError(
                f"evaluate produced {y[j]!r} at coordinate {self.labels[j]!r}",
                coordinate=self.labels[j],
            )
        return y

    def evaluate(self, x: StateVector) -> StateVector:
        if x.labels != self.labels:
            raise ValueError("state belongs to a different system")
        return StateVector(self._eval_checked(x.values), self.labels)


def log_transform(z, sys: PositiveSystem) -> NDArray[np.float64]:
    """G(z) = log F(exp z); fixed points of G are fixed points of F."""
    z = np.asarray(z, dtype=float)
    return np.log(sys._eval_checked(np.exp(z)))


def elasticity_at(sys: PositiveSystem, x: StateVector) -> ElasticityMatrix:
    """Elasticity matrix of the system at x.

    Uses the analytic provider when the system has one; otherwise central
    differences in log coordinates with step 1e-6.
    """
    if x.labels != sys.labels:
        raise ValueError("state belongs to a different system")
    if sys.elasticity_values is not None:
        E = np.asarray(sys.elasticity_values(x.values), dtype=float)
        if E.shape != (sys.dimension, sys.dimension):
            raise ValueError("analytic elasticity has wrong shape")
        return ElasticityMatrix(entries=E, point=x, method="analytic")
    n = sys.dimension
    z = np.log(x.values)
    h = NUMERIC_STEP
    E = np.empty((n, n))
    for k in range(n):
        zp = z.copy()
        zp[k] += h
        zm = z.copy()
        zm[k] -= h
        gp = log_transform(zp, sys)
        gm = log_transform(zm, sys)
        E[:, k] = (gp - gm) / (2.0 * h)
    if not np.all(np.isfinite(E)):
        raise DifferentiationError(
            "central differences produced non-finite entries")
    return ElasticityMatrix(entries=E, point=x, method="numeric-central-log")
