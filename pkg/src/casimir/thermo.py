"""Entropy of the mirror pair and a low-temperature consistency probe.

The entropy per unit area is S = -dF/dT.  The third law requires
S(T) -> 0 as T -> 0 for an equilibrium system; a model whose entropy
extrapolates to a nonzero plateau at T = 0 is flagged as violating that
requirement.  The probe quantifies this with explicit tolerances instead
of asserting it qualitatively: S is computed on a decreasing temperature
ladder, the lowest three points are fitted linearly in T, and the
extrapolated S(0) is compared against a tolerance relative to a
reference entropy at laboratory temperature.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AmbiguousClassificationError
from .lifshitz import LifshitzOptions, MirrorPair, free_energy

__all__ = [
    "EntropyEstimate",
    "EntropyCurve",
    "NernstClassification",
    "entropy",
    "nernst_probe",
    "default_temperature_ladder",
]


@dataclass(frozen=True)
class EntropyEstimate:
    """One entropy value with its finite-difference diagnostics."""

    s_j_per_m2_k: float
    temperature_k: float
    fd_step: float  # relative half-step of the finer stencil
    err_est: float


@dataclass(frozen=True)
class EntropyCurve:
    """Entropy along a decreasing temperature ladder plus the T = 0 fit."""

    temperatures_k: tuple[float, ...]
    s_values: tuple[float, ...]
    fd_steps: tuple[float, ...]
    err_ests: tuple[float, ...]
    s_extrapolated_0: float
    extrapolation_err: float

    def csv_lines(self, classification: "NernstClassification | None" = None) -> list[str]:
        lines = ["T_K,S,fd_step,err_est"]
        for i, t in enumerate(self.temperatures_k):
            lines.append(
                f"{t!r},{self.s_values[i]!r},{self.fd_steps[i]!r},{self.err_ests[i]!r}"
            )
        if classification is not None:
            lines.append("# " + classification.summary())
        return lines


@dataclass(frozen=True)
class NernstClassification:
    satisfies: bool
    plateau_j_per_m2_k: float | None
    s_reference_j_per_m2_k: float
    reference_temperature_k: float
    threshold_j_per_m2_k: float
    fit_residual: float

    def summary(self) -> str:
        ref = (
            f"|S({self.reference_temperature_k:g} K)| = "
            f"{abs(self.s_reference_j_per_m2_k)!r}, threshold = "
            f"{self.threshold_j_per_m2_k!r}"
        )
        if self.satisfies:
            return f"classification: satisfies third law ({ref})"
        return (
            f"classification: violates third law, plateau = "
            f"{self.plateau_j_per_m2_k!r} J/(m^2 K) ({ref})"
        )


def entropy(
    pair: MirrorPair,
    temperature_k: float,
    rel_step: float = 0.05,
    opts: LifshitzOptions | None = None,
) -> EntropyEstimate:
    """S = -dF/dT by central difference with one Richardson refinement.

    rel_step is the relative temperature half-step h: F is evaluated at
    T(1 +- h) and T(1 +- h/2) and the two central differences are
    combined to cancel the leading h^2 error.  The returned err_est is
    the step-halving estimate |S_h/2 - S_h| / 3.
    """
    if temperature_k <= 0.0:
        raise ValueError(f"temperature must be > 0 K, got {temperature_k}")
    if not 0.0 < rel_step < 0.5:
        raise ValueError(f"rel_step must be in (0, 0.5), got {rel_step}")
    opts = opts or LifshitzOptions()

    def central(h: float) -> float:
        f_hi = free_energy(pair, temperature_k * (1.0 + h), opts).free_energy_j_per_m2
        f_lo = free_energy(pair, temperature_k * (1.0 - h), opts).free_energy_j_per_m2
        return -(f_hi - f_lo) / (2.0 * temperature_k * h)

    s_h = central(rel_step)
    s_h2 = central(0.5 * rel_step)
    refined = (4.0 * s_h2 - s_h) / 3.0
    return EntropyEstimate(
        s_j_per_m2_k=refined,
        temperature_k=temperature_k,
        fd_step=0.5 * rel_step,
        err_est=abs(s_h2 - s_h) / 3.0,
    )


def default_temperature_ladder(
    top_k: float = 300.0, floor_k: float = 2.0, count: int = 12
) -> tuple[float, ...]:
    """Decreasing geometric ladder from top_k down to floor_k."""
    return tuple(float(t) for t in np.geomspace(top_k, floor_k, count))


def nernst_probe(
    pair: MirrorPair,
    t_ladder_k: Sequence[float] | None = None,
    tol: float = 1e-3,
    rel_step: float = 0.05,
    opts: LifshitzOptions | None = None,
    workers: int = 1,
    reference_temperature_k: float = 300.0,
) -> tuple[NernstClassification, EntropyCurve]:
    """Classify the pair's T -> 0 entropy behavior.

    The ladder must be strictly decreasing with at least 6 points and
    reach 2 K or below.  S(T) on the lowest three points is fitted with
    a + b T; the pair satisfies the third law when |a| does not exceed
    tol * |S(reference_temperature)|.  A fit residual larger than the
    margin between |a| and the threshold makes the call ambiguous and
    raises AmbiguousClassificationError.
    """
    ladder = tuple(float(t) for t in (t_ladder_k if t_ladder_k is not None else default_temperature_ladder()))
    if len(ladder) < 6:
        raise ValueError(f"ladder needs at least 6 points, got {len(ladder)}")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("ladder must be strictly decreasing")
    if ladder[-1] > 2.0:
        raise ValueError(f"ladder must reach 2 K or below, got floor {ladder[-1]}")
    opts = opts or LifshitzOptions()

    def one(t: float) -> EntropyEstimate:
        return entropy(pair, t, rel_step=rel_step, opts=opts)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(one, ladder))
    else:
        points = [one(t) for t in ladder]

    if math.isclose(ladder[0], reference_temperature_k, rel_tol=1e-12):
        s_ref = points[0].s_j_per_m2_k
    else:
        s_ref = entropy(pair, reference_temperature_k, rel_step=rel_step, opts=opts).s_j_per_m2_k

    t3 = np.array(ladder[-3:])
    s3 = np.array([p.s_j_per_m2_k for p in points[-3:]])
    slope, intercept = np.polyfit(t3, s3, 1)
    fit_residual = float(np.max(np.abs(s3 - (intercept + slope * t3))))
    threshold = tol * abs(s_ref)

    margin = abs(abs(intercept) - threshold)
    if fit_residual > margin:
        raise AmbiguousClassificationError(
            f"low-temperature fit residual {fit_residual:g} exceeds the "
            f"classification margin {margin:g} (|S(0)| = {abs(intercept):g}, "
            f"threshold = {threshold:g}); refine the ladder or tolerances"
        )

    curve = EntropyCurve(
        temperatures_k=ladder,
        s_values=tuple(p.s_j_per_m2_k for p in points),
        fd_steps=tuple(p.fd_step for p in points),
        err_ests=tuple(p.err_est for p in points),
        s_extrapolated_0=float(intercept),
        extrapolation_err=fit_residual,
    )
    satisfies = abs(intercept) <= threshold
    cls = NernstClassification(
        satisfies=satisfies,
        plateau_j_per_m2_k=None if satisfies else float(intercept),
        s_reference_j_per_m2_k=s_ref,
        reference_temperature_k=reference_temperature_k,
        threshold_j_per_m2_k=threshold,
        fit_residual=fit_residual,
    )
    return cls, curve
