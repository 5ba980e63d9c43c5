"""Certification of the four structural properties behind up-to-scale
uniqueness, plus the spectral evidence that backs them.

The four properties, checked at sampled states (or symbolically for the
built-in models, whose elasticity signs are parameter-determined):

  connectedness      every coordinate influences every other, possibly
                     indirectly: |DG(z)| is irreducible
  self-interaction   some coordinate feeds back on itself: a nonzero
                     diagonal elasticity entry
  scaling            a direction u with F(c^u x) = c^u F(x), equivalently
                     DG(z) u = u everywhere
  monotonicity       after splitting coordinates by the sign of u,
                     within-block elasticities are >= 0 and cross-block
                     ones <= 0

A "pass" verdict is only issued in exact mode, where the sign structure
is known symbolically.  Sample-based runs can at best report
"evidence-only"; a single numeric counterexample still yields a hard
"fail" since the properties are universally quantified.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from scalefix.spectral import (
    PowerIterationError,
    ReducibleMatrixError,
    is_irreducible,
    spectral_radius,
    strongly_connected_components,
)
from scalefix.system import ElasticityMatrix, PositiveSystem, StateVector, elasticity_at

__all__ = [
    "CheckResult",
    "SignPartition",
    "ScalingCertificate",
    "SpectralEvidence",
    "CertificationReport",
    "AmbiguousScalingError",
    "sample_states",
    "check_connectedness",
    "check_self_interaction",
    "find_scaling_exponent",
    "check_monotonicity",
    "check_spectral",
    "certify",
]

TOL_SIGN = 1e-10          # numeric zero for sign classification
TOL_DIAG = 1e-10          # diagonal threshold, relative to its row max
TOL_EIGENVALUE = 1e-8     # window around 1 for the scaling eigenvalue
TOL_RESIDUAL = 1e-6       # scaling-law verification ceiling
SCALE_TEST_FACTORS = (0.5, 2.0, 10.0)


class AmbiguousScalingError(RuntimeError):
    """The eigenspace for eigenvalue 1 has dimension above one.

    The theory precludes this when the other conditions hold, so seeing
    it is itself diagnostic of a condition violation.
    """


@dataclass(frozen=True)
class CheckResult:
    verdict: str              # pass | fail | evidence-only | absent | skipped | error
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.verdict in ("pass", "evidence-only")


@dataclass(frozen=True)
class SignPartition:
    """Coordinate labels split by the sign of the scaling direction."""

    zeta_plus: tuple[str, ...]
    zeta_minus: tuple[str, ...]


@dataclass(frozen=True)
class ScalingCertificate:
    """A verified scaling direction, normalized to max |u_j| = 1."""

    u: NDArray[np.float64]
    residual_fixed_eq: float    # max over samples of inf-norm of DG u - u
    residual_direct: float      # max relative deviation of the scale law
    normalization: str = "max-abs-one"

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        object.__setattr__(self, "u", u)
        u.setflags(write=False)


@dataclass(frozen=True)
class SpectralEvidence:
    """Per-sample spectral facts about DG and its entrywise absolute value."""

    rho: tuple[float, ...]            # spectral radius of |DG| per sample
    max_rho_deviation: float          # max |rho - 1|
    eigvec_residual: float | None     # max inf-norm of |DG||u| - |u|
    similarity_residual: float | None  # eigenvalue multiset distance DG vs |DG|
    unique_modulus_one: bool | None   # 1 the only eigenvalue on the unit circle
    spectral_gap: float | None        # min over samples of 1 - second modulus


@dataclass(frozen=True)
class CertificationReport:
    connectedness: CheckResult
    self_interaction: CheckResult
    scaling: CheckResult
    monotonicity: CheckResult
    certificate: ScalingCertificate | None
    partition: SignPartition | None
    spectral: SpectralEvidence | None
    samples: tuple[StateVector, ...]
    sample_seed: int
    mode: str                         # exact | sampled
    uniqueness_applicable: bool
    attractivity_applicable: bool
    scaling_free_radius_one: bool     # rho(|DG|) = 1 yet no scaling direction
    system_kind: str
    labels: tuple[str, ...]
    differentiation: str              # analytic | numeric-central-log


def sample_states(sys: PositiveSystem, count: int, seed: int) -> list[StateVector]:
    """Deterministic log-uniform draws over [e^-3, e^3] per coordinate."""
    if count < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    return [sys.state(np.exp(rng.uniform(-3.0, 3.0, size=sys.dimension)))
            for _ in range(count)]


def _elasticities(sys: PositiveSystem, samples: Sequence[StateVector],
                  threads: int = 1) -> list[ElasticityMatrix]:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda x: elasticity_at(sys, x), samples))
    return [elasticity_at(sys, x) for x in samples]


def _bloc_labels(adj: NDArray, labels: tuple[str, ...]) -> list[list[str]]:
    comps = strongly_connected_components(adj.astype(float))
    return [[labels[j] for j in comp] for comp in comps]


def check_connectedness(sys: PositiveSystem,
                        samples: Sequence[StateVector],
                        elasticities: Sequence[ElasticityMatrix] | None = None,
                        ) -> CheckResult:
    """Irreducibility of |DG|: symbolic for systems with a sign pattern,
    per-sample otherwise."""
    if not samples:
        raise ValueError("need at least one sample")
    if sys.sign_pattern is not None:
        adj = np.abs(sys.sign_pattern).astype(float)
        if is_irreducible(adj):
            return CheckResult("pass")
        return CheckResult("fail", {
            "blocs": _bloc_labels(adj, sys.labels),
            "reason": "influence graph splits into isolated blocs",
        })
    elasticities = elasticities or _elasticities(sys, samples)
    for idx, E in enumerate(elasticities):
        adj = (np.abs(E.entries) > TOL_SIGN).astype(float)
        if not is_irreducible(adj):
            return CheckResult("fail", {
                "sample_index": idx,
                "blocs": _bloc_labels(adj, sys.labels),
                "reason": "influence graph splits into isolated blocs",
            })
    return CheckResult("evidence-only")


def check_self_interaction(sys: PositiveSystem,
                           samples: Sequence[StateVector],
                           elasticities: Sequence[ElasticityMatrix] | None = None,
                           ) -> CheckResult:
    """Some diagonal elasticity entry must be nonzero (at every sample)."""
    if sys.sign_pattern is not None:
        if np.any(np.diag(sys.sign_pattern) != 0):
            return CheckResult("pass")
        return CheckResult("fail", {"reason": "all diagonal entries vanish"})
    elasticities = elasticities or _elasticities(sys, samples)
    for idx, E in enumerate(elasticities):
        A = np.abs(E.entries)
        rowmax = A.max(axis=1)
        live = np.diag(A) > TOL_DIAG * np.maximum(rowmax, 1e-300)
        if not live.any():
            return CheckResult("fail", {
                "sample_index": idx,
                "reason": "no coordinate feeds back on itself",
            })
    return CheckResult("evidence-only")


def find_scaling_exponent(sys: PositiveSystem,
                          samples: Sequence[StateVector],
                          elasticities: Sequence[ElasticityMatrix] | None = None,
                          ) -> ScalingCertificate | None:
    """Extract and verify a scaling direction from the eigenvalue-1
    eigenspace of the first sample's elasticity matrix.

    Returns None when no eigenvalue lies within 1e-8 of 1.  Raises
    AmbiguousScalingError when the eigenspace is multi-dimensional.
    """
    elasticities = elasticities or _elasticities(sys, samples)
    E0 = elasticities[0].entries
    n = E0.shape[0]
    eigs = np.linalg.eigvals(E0)
    if np.min(np.abs(eigs - 1.0)) > TOL_EIGENVALUE:
        return None
    sv = np.linalg.svd(np.eye(n) - E0, compute_uv=True)
    s, Vh = sv[1], sv[2]
    dim = int(np.sum(s < TOL_EIGENVALUE))
    if dim == 0:
        return None
    if dim > 1:
        raise AmbiguousScalingError(
            f"eigenspace for eigenvalue 1 has dimension {dim}; "
            "a unique scaling direction requires dimension 1")
    u = Vh[-1].copy()
    # orient: first clearly nonzero coordinate positive, then scale
    for j in range(n):
        if abs(u[j]) > 1e-12 * np.abs(u).max():
            if u[j] < 0:
                u = -u
            break
    u /= np.abs(u).max()

    res_eq = max(float(np.max(np.abs(E.entries @ u - u)))
                 for E in elasticities)
    res_direct = 0.0
    for x in samples:
        fx = sys._eval_checked(x.values)
        for c in SCALE_TEST_FACTORS:
            lhs = sys._eval_checked(c ** u * x.values)
            rhs = c ** u * fx
            res_direct = max(res_direct,
                             float(np.max(np.abs(lhs / rhs - 1.0))))
    return ScalingCertificate(u=u, residual_fixed_eq=res_eq,
                              residual_direct=res_direct)


def _split_by_sign(u: NDArray, labels: tuple[str, ...]) -> SignPartition:
    plus = tuple(labels[j] for j in range(len(labels)) if u[j] > 0)
    minus = tuple(labels[j] for j in range(len(labels)) if u[j] < 0)
    return SignPartition(zeta_plus=plus, zeta_minus=minus)


def check_monotonicity(sys: PositiveSystem, u,
                       samples: Sequence[StateVector],
                       elasticities: Sequence[ElasticityMatrix] | None = None,
                       ) -> tuple[CheckResult, SignPartition]:
    """Block sign rule induced by u: within a block >= 0, across <= 0."""
    u = np.asarray(u, dtype=float)
    tiny = np.abs(u) <= 1e-9 * np.abs(u).max()
    if tiny.any():
        j = int(np.flatnonzero(tiny)[0])
        raise ValueError(
            f"scaling direction has a zero entry at {sys.labels[j]!r}; "
            "the block partition is undefined there")
    partition = _split_by_sign(u, sys.labels)
    same = np.equal.outer(u > 0, u > 0)   # True when j, k share a block

    if sys.sign_pattern is not None:
        P = sys.sign_pattern
        bad = (same & (P < 0)) | (~same & (P > 0))
        if not bad.any():
            return CheckResult("pass"), partition
        j, k = map(int, np.argwhere(bad)[0])
        return CheckResult("fail", {
            "row": sys.labels[j], "column": sys.labels[k],
            "reason": "declared sign violates the block rule",
        }), partition

    elasticities = elasticities or _elasticities(sys, samples)
    for idx, E in enumerate(elasticities):
        M = E.entries
        bad = (same & (M < -TOL_SIGN)) | (~same & (M > TOL_SIGN))
        if bad.any():
            j, k = map(int, np.argwhere(bad)[0])
            return CheckResult("fail", {
                "row": sys.labels[j], "column": sys.labels[k],
                "sample_index": idx,
                "value": float(M[j, k]),
            }), partition
    return CheckResult("evidence-only"), partition


def _multiset_distance(a: NDArray, b: NDArray) -> float:
    # greedy nearest-neighbor matching of two complex eigenvalue multisets
    b = list(b)
    worst = 0.0
    for lam in sorted(a, key=abs, reverse=True):
        dists = [abs(lam - mu) for mu in b]
        k = int(np.argmin(dists))
        worst = max(worst, dists[k])
        b.pop(k)
    return worst


def check_spectral(sys: PositiveSystem, u,
                   samples: Sequence[StateVector],
                   elasticities: Sequence[ElasticityMatrix] | None = None,
                   compare_spectra: bool = True) -> SpectralEvidence:
    """Spectral radius of |DG|, the |u| eigenvector residual, spectrum
    similarity between DG and |DG|, and the modulus-1 uniqueness check.

    Out-of-tolerance values are recorded, never raised.
    """
    elasticities = elasticities or _elasticities(sys, samples)
    rhos = []
    eig_res = None
    sim_res = None
    unique = None
    gap = None
    if u is not None:
        u = np.asarray(u, dtype=float)
        eig_res = 0.0
    for E in elasticities:
        A = np.abs(E.entries)
        try:
            rho = spectral_radius(A, tol=1e-12).rho
        except (ReducibleMatrixError, PowerIterationError):
            # reducible or imprimitive inputs: dense eigenvalues instead
            rho = float(np.max(np.abs(np.linalg.eigvals(A))))
        rhos.append(rho)
        if u is not None:
            eig_res = max(eig_res, float(np.max(np.abs(A @ np.abs(u)
                                                       - np.abs(u)))))
        if compare_spectra:
            eigs_raw = np.linalg.eigvals(E.entries)
            eigs_abs = np.linalg.eigvals(A)
            d = _multiset_distance(eigs_raw, eigs_abs)
            sim_res = d if sim_res is None else max(sim_res, d)
            # eigenvalues of DG away from 1 must sit strictly inside
            # the unit circle for 1 to be the unique peripheral one
            away = eigs_raw[np.abs(eigs_raw - 1.0) > 1e-6]
            second = float(np.max(np.abs(away))) if away.size else 0.0
            near_one = int(np.sum(np.abs(eigs_raw - 1.0) <= 1e-6))
            ok = near_one == 1 and second < 1.0 - 1e-6
            unique = ok if unique is None else (unique and ok)
            g = 1.0 - second
            gap = g if gap is None else min(gap, g)
    return SpectralEvidence(
        rho=tuple(rhos),
        max_rho_deviation=float(np.max(np.abs(np.asarray(rhos) - 1.0))),
        eigvec_residual=eig_res,
        similarity_residual=sim_res,
        unique_modulus_one=unique,
        spectral_gap=gap,
    )


def certify(sys: PositiveSystem, sample_count: int = 8, seed: int = 0,
            threads: int = 1) -> CertificationReport:
    """Run all four property checks plus the spectral evidence.

    Checker errors are recorded in the relevant verdict; a report is
    always produced.  mode is "exact" only when the system declares a
    parameter-determined sign pattern.
    """
    samples = sample_states(sys, sample_count, seed)
    elas = _elasticities(sys, samples, threads=threads)
    mode = "exact" if sys.sign_pattern is not None else "sampled"

    def guarded(fn, *args):
        try:
            return fn(*args)
        except Exception as exc:  # per-check errors must not kill the report
            return CheckResult("error", {"error": f"{type(exc).__name__}: {exc}"})

    conn = guarded(lambda: check_connectedness(sys, samples, elas))
    self_int = guarded(lambda: check_self_interaction(sys, samples, elas))

    certificate = None
    partition = None
    try:
        certificate = find_scaling_exponent(sys, samples, elas)
    except AmbiguousScalingError as exc:
        scaling = CheckResult("error", {"error": str(exc)})
    else:
        if certificate is None:
            scaling = CheckResult("absent", {
                "reason": "no elasticity eigenvalue within 1e-08 of 1"})
        elif (certificate.residual_fixed_eq > TOL_RESIDUAL
              or certificate.residual_direct > TOL_RESIDUAL):
            scaling = CheckResult("fail", {
                "residual_fixed_eq": certificate.residual_fixed_eq,
                "residual_direct": certificate.residual_direct,
                "reason": "candidate direction does not satisfy the "
                          "scale law at all samples",
            })
        else:
            details = {}
            if sys.scaling is not None:
                ref = sys.scaling / np.abs(sys.scaling).max()
                cosine = float(abs(certificate.u @ ref)
                               / (np.linalg.norm(certificate.u)
                                  * np.linalg.norm(ref)))
                details["matches_closed_form"] = cosine >= 1.0 - 1e-10
            scaling = CheckResult(
                "pass" if mode == "exact" else "evidence-only", details)

    if certificate is not None and scaling.ok:
        try:
            mono, partition = check_monotonicity(
                sys, certificate.u, samples, elas)
        except ValueError as exc:
            mono = CheckResult("error", {"error": str(exc)})
    else:
        mono = CheckResult("skipped", {
            "reason": "no verified scaling direction"})

    spectral = check_spectral(
        sys, certificate.u if certificate is not None else None,
        samples, elas, compare_spectra=self_int.ok)

    footnote = (scaling.verdict == "absent"
                and spectral.max_rho_deviation <= 1e-6)
    uniq = conn.ok and scaling.ok and mono.ok
    attr = uniq and self_int.ok
    return CertificationReport(
        connectedness=conn,
        self_interaction=self_int,
        scaling=scaling,
        monotonicity=mono,
        certificate=certificate,
        partition=partition,
        spectral=spectral,
        samples=tuple(samples),
        sample_seed=seed,
        mode=mode,
        uniqueness_applicable=uniq,
        attractivity_applicable=attr,
        scaling_free_radius_one=footnote,
        system_kind=sys.kind,
        labels=sys.labels,
        differentiation=elas[0].method,
    )
