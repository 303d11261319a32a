"""Tabulated optical data: loading, imaginary-axis reconstruction, fitting.

A table of complex refractive index (omega, n, k) defines the absorptive
part of the permittivity on its support.  Two consumers are provided:

* eps_imag_axis_from_data evaluates eps(i xi) through the causality
  integral, with an explicit user-chosen model for frequencies below the
  first tabulated node.  The low-frequency choice is deliberately not
  defaulted: reconstructions with free-carrier dissipation and without it
  differ, and that difference is the point of the comparison tools built
  on top of this module.
* fit_oscillators determines bound-charge oscillator parameters from the
  table over a fit window, keeping the plasma frequency fixed.

Only synthetic generators and a loader ship here; no measured datasets
are bundled.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np
from scipy.integrate import quad

from .errors import CoverageError
from .materials import DrudeParams, OscillatorSet, PlasmaParams
from .quadrature import gauss_legendre

__all__ = [
    "OpticalDataTable",
    "DrudeBelowCutoff",
    "PlasmaBelowCutoff",
    "FitResult",
    "load_nk_table",
    "synthesize_nk_table",
    "eps_imag_axis_from_data",
    "fit_oscillators",
]


@dataclass(frozen=True)
class OpticalDataTable:
    """Rows of (omega [eV], n, k) with strictly increasing omega."""

    omega_ev: tuple[float, ...]
    n: tuple[float, ...]
    k: tuple[float, ...]
    provenance: str = ""

    def __post_init__(self) -> None:
        if not (len(self.omega_ev) == len(self.n) == len(self.k)):
            raise ValueError("omega, n, k must have equal lengths")
        if len(self.omega_ev) == 0:
            raise ValueError("table has no rows")
        for i, w in enumerate(self.omega_ev):
            if w <= 0.0:
                raise ValueError(f"row {i + 1}: omega must be > 0, got {w}")
            if i and w <= self.omega_ev[i - 1]:
                raise ValueError(
                    f"row {i + 1}: omega not strictly increasing "
                    f"({w} after {self.omega_ev[i - 1]})"
                )
        for i, nv in enumerate(self.n):
            if nv <= 0.0:
                raise ValueError(f"row {i + 1}: n must be > 0, got {nv}")
        for i, kv in enumerate(self.k):
            if kv < 0.0:
                raise ValueError(f"row {i + 1}: k must be >= 0, got {kv}")

    def __len__(self) -> int:
        return len(self.omega_ev)

    def eps_re(self) -> np.ndarray:
        n = np.asarray(self.n)
        k = np.asarray(self.k)
        return n * n - k * k

    def eps_im(self) -> np.ndarray:
        return 2.0 * np.asarray(self.n) * np.asarray(self.k)


def _decode(source: str | bytes | IO) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if hasattr(source, "read"):
        data = source.read()
        return data.decode("utf-8") if isinstance(data, bytes) else data
    return source


def _numeric_rows(text: str, n_fields: int, fmt: str) -> list[tuple[int, list[float]]]:
    rows: list[tuple[int, list[float]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != n_fields:
            raise ValueError(
                f"line {lineno}: expected {n_fields} numeric fields for "
                f"format {fmt!r}, got {len(parts)}"
            )
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise ValueError(f"line {lineno}: non-numeric field in {line!r}") from None
        rows.append((lineno, vals))
    if not rows:
        raise ValueError("no data rows found")
    return rows


def load_nk_table(
    source: str | bytes | IO,
    format: str = "three_column",
    provenance: str = "",
) -> OpticalDataTable:
    """Parse plain text into an OpticalDataTable.

    three_column: each row is (omega_eV, n, k).
    two_column_nk: two stacked blocks of (omega_eV, value) rows, first all
    n then all k, on identical frequency grids.  The block boundary is
    the first row whose omega is not larger than its predecessor's.
    Separators are whitespace and/or commas; '#' starts a comment.
    """
    text = _decode(source)
    if format == "three_column":
        rows = _numeric_rows(text, 3, format)
        omegas = tuple(v[0] for _, v in rows)
        ns = tuple(v[1] for _, v in rows)
        ks = tuple(v[2] for _, v in rows)
        table_rows = rows
    elif format == "two_column_nk":
        rows = _numeric_rows(text, 2, format)
        split = None
        for i in range(1, len(rows)):
            if rows[i][1][0] <= rows[i - 1][1][0]:
                split = i
                break
        if split is None:
            raise ValueError(
                "two_column_nk: could not find the k block (no restart of "
                "the frequency grid)"
            )
        n_block, k_block = rows[:split], rows[split:]
        if len(n_block) != len(k_block):
            raise ValueError(
                f"two_column_nk: n block has {len(n_block)} rows but k "
                f"block has {len(k_block)} (line {k_block[0][0]})"
            )
        for (_, nv), (lk, kv) in zip(n_block, k_block):
            if nv[0] != kv[0]:
                raise ValueError(
                    f"line {lk}: k-block frequency {kv[0]} does not match "
                    f"n-block frequency {nv[0]}"
                )
        omegas = tuple(v[0] for _, v in n_block)
        ns = tuple(v[1] for _, v in n_block)
        ks = tuple(v[1] for _, v in k_block)
        table_rows = n_block
    else:
        raise ValueError(f"unknown table format {format!r}")

    # Re-raise invariant violations with the source line number attached.
    for i in range(1, len(omegas)):
        if omegas[i] <= omegas[i - 1]:
            raise ValueError(
                f"line {table_rows[i][0]}: omega not strictly increasing "
                f"({omegas[i]} after {omegas[i - 1]})"
            )
    for i, w in enumerate(omegas):
        if w <= 0.0:
            raise ValueError(f"line {table_rows[i][0]}: omega must be > 0, got {w}")
    for i, nv in enumerate(ns):
        if nv <= 0.0:
            raise ValueError(f"line {table_rows[i][0]}: n must be > 0, got {nv}")
    for i, kv in enumerate(ks):
        if kv < 0.0:
            raise ValueError(f"line {table_rows[i][0]}: k must be >= 0, got {kv}")
    return OpticalDataTable(omegas, ns, ks, provenance=provenance)


def synthesize_nk_table(
    dielectric, omegas_ev: Sequence[float], provenance: str = "synthetic"
) -> OpticalDataTable:
    """Generate (n, k) rows from a dielectric model on the real axis.

    n + ik is the principal square root of eps(omega).  Only meaningful
    for absorptive models (eps'' > 0 keeps n > 0).
    """
    from .materials import chi_drude_real_axis, chi_generalized_real_axis, chi_plasma_real_axis

    ns: list[float] = []
    ks: list[float] = []
    for w in omegas_ev:
        if isinstance(dielectric, DrudeParams):
            chi = chi_drude_real_axis(dielectric, w)
        elif isinstance(dielectric, PlasmaParams):
            chi = chi_plasma_real_axis(dielectric, w)
        elif isinstance(dielectric, OscillatorSet):
            chi = chi_generalized_real_axis(dielectric, w)
        else:
            raise TypeError(f"unsupported dielectric model {type(dielectric).__name__}")
        root = cmath.sqrt(1.0 + chi)
        ns.append(root.real)
        ks.append(root.imag)
    return OpticalDataTable(tuple(float(w) for w in omegas_ev), tuple(ns), tuple(ks), provenance=provenance)


@dataclass(frozen=True)
class DrudeBelowCutoff:
    """Free-carrier absorption assumed below the first tabulated node."""

    params: DrudeParams


@dataclass(frozen=True)
class PlasmaBelowCutoff:
    """Dissipationless free carriers below the first tabulated node.

    All of the spectral weight sits at zero frequency, so the below-cutoff
    contribution to eps(i xi) is exactly wp^2 / xi^2.
    """

    params: PlasmaParams


def _segment_kernel_integral(
    w0: float, w1: float, e0: float, e1: float, xi: float, n_nodes: int
) -> float:
    """Integral of omega * eps''(omega) / (omega^2 + xi^2) over [w0, w1].

    eps'' is interpolated as a power law between the segment endpoints
    when both are positive, linearly otherwise.
    """
    x, wt = gauss_legendre(n_nodes)
    mid, half = 0.5 * (w0 + w1), 0.5 * (w1 - w0)
    om = mid + half * x
    if e0 > 0.0 and e1 > 0.0:
        p = math.log(e1 / e0) / math.log(w1 / w0)
        eps = e0 * (om / w0) ** p
    else:
        eps = e0 + (e1 - e0) * (om - w0) / (w1 - w0)
    return half * float(np.dot(wt, om * eps / (om * om + xi * xi)))


def eps_imag_axis_from_data(
    table: OpticalDataTable,
    xi_ev: float,
    extrapolation: DrudeBelowCutoff | PlasmaBelowCutoff,
) -> float:
    """eps(i xi) = 1 + (2/pi) integral of omega eps''(omega)/(omega^2+xi^2).

    The absorptive spectrum is stitched from three pieces: the chosen
    free-carrier model below the first tabulated node, log-log
    interpolation of the table on its support, and a power-law tail
    fitted to the last decade of the table above it.
    """
    if xi_ev <= 0.0:
        raise ValueError(f"xi must be > 0, got {xi_ev}")
    omegas = np.asarray(table.omega_ev)
    eps_im = np.asarray(table.eps_im())
    w_lo, w_hi = float(omegas[0]), float(omegas[-1])

    # The kernel weighs omega ~ xi and below most heavily, and absorption
    # data above xi is damped by 1/omega^2 and continued by the fitted
    # tail.  Demand 1.5 decades of coverage below xi, half a decade
    # above, and at least 3 decades of total support, unless the data is
    # irrelevant (all-zero absorption) or xi sits far above the support.
    has_absorption = bool(np.any(eps_im > 0.0))
    lo_need = xi_ev / 10.0**1.5
    hi_need = xi_ev * 10.0**0.5
    covered = w_lo <= lo_need and w_hi >= hi_need and w_hi / w_lo >= 1e3
    if has_absorption and xi_ev < 10.0 * w_hi and not covered:
        raise CoverageError(
            f"table support [{w_lo:g}, {w_hi:g}] eV does not cover the "
            f"sensitivity window of xi = {xi_ev:g} eV (need at least "
            f"[{lo_need:g}, {hi_need:g}] within 3+ decades of support)"
        )

    xi2 = xi_ev * xi_ev

    # Below-cutoff model part.
    plasma_term = 0.0
    below = 0.0
    if isinstance(extrapolation, PlasmaBelowCutoff):
        wp = extrapolation.params.plasma_freq_ev
        plasma_term = wp * wp / xi2
    elif isinstance(extrapolation, DrudeBelowCutoff):
        wp = extrapolation.params.plasma_freq_ev
        gamma = extrapolation.params.relaxation_ev
        wp2g = wp * wp * gamma

        def drude_kernel(w: float) -> float:
            return wp2g / ((w * w + gamma * gamma) * (w * w + xi2))

        below = quad(drude_kernel, 0.0, w_lo, epsabs=0.0, epsrel=1e-12, full_output=1)[0]
    else:
        raise TypeError(
            f"unsupported extrapolation {type(extrapolation).__name__}; "
            "expected DrudeBelowCutoff or PlasmaBelowCutoff"
        )

    # Table part, segment by segment (each segment is smooth).
    data_part = 0.0
    if has_absorption:
        for i in range(len(omegas) - 1):
            e0, e1 = float(eps_im[i]), float(eps_im[i + 1])
            if e0 == 0.0 and e1 == 0.0:
                continue
            data_part += _segment_kernel_integral(
                float(omegas[i]), float(omegas[i + 1]), e0, e1, xi_ev, 24
            )

    # Power-law tail above the table, fitted to the last decade.
    tail = 0.0
    if has_absorption and eps_im[-1] > 0.0:
        mask = (omegas >= w_hi / 10.0) & (eps_im > 0.0)
        if int(np.count_nonzero(mask)) >= 2:
            slope, intercept = np.polyfit(np.log(omegas[mask]), np.log(eps_im[mask]), 1)
            p = -float(slope)
            amp = math.exp(float(intercept))
        else:
            p = 3.0
            amp = float(eps_im[-1]) * w_hi**3
        if p <= 0.0:
            raise CoverageError(
                f"fitted high-frequency tail does not decay (exponent {-p:g}); "
                "extend the table"
            )

        def tail_kernel(w: float) -> float:
            return amp * w ** (1.0 - p) / (w * w + xi2)

        tail = quad(tail_kernel, w_hi, np.inf, epsabs=0.0, epsrel=1e-12, full_output=1)[0]

    return 1.0 + plasma_term + (2.0 / math.pi) * (below + data_part + tail)


@dataclass(frozen=True)
class FitResult:
    """Outcome of an oscillator-parameter fit at fixed plasma frequency."""

    oscillator_set: OscillatorSet
    residual_norm: float  # RMS over stacked Re/Im residuals in the window
    window_ev: tuple[float, float]
    iterations: int
    converged: bool
    message: str
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "plasma_freq_ev": self.oscillator_set.plasma_freq_ev,
            "oscillators": [list(o) for o in self.oscillator_set.oscillators],
            "residual_norm": self.residual_norm,
            "window_ev": list(self.window_ev),
            "iterations": self.iterations,
            "converged": self.converged,
            "message": self.message,
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _oscillator_eps(omega: np.ndarray, wp: float, w: np.ndarray, g: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Complex eps(omega) = 1 - wp^2/omega^2 + sum_j f_j / (w_j^2 - omega^2 - i g_j omega)."""
    om = omega[:, None]
    denom = w[None, :] ** 2 - om * om - 1j * g[None, :] * om
    return 1.0 - (wp / omega) ** 2 + (f[None, :] / denom).sum(axis=1)


def _residual_and_jacobian(
    theta: np.ndarray, omega: np.ndarray, target: np.ndarray, wp: float, k: int
):
    w = np.exp(theta[:k])
    g = np.exp(theta[k : 2 * k])
    f = np.exp(theta[2 * k :])
    om = omega[:, None]
    denom = w[None, :] ** 2 - om * om - 1j * g[None, :] * om
    b = 1.0 / denom
    model = 1.0 - (wp / omega) ** 2 + (f[None, :] * b).sum(axis=1)
    resid_c = model - target
    resid = np.concatenate([resid_c.real, resid_c.imag])
    # d model / d log-parameters, complex, shape (m, 3k).
    b2 = b * b
    d_logw = -2.0 * (w * w)[None, :] * f[None, :] * b2
    d_logg = 1j * om * g[None, :] * f[None, :] * b2
    d_logf = f[None, :] * b
    jc = np.concatenate([d_logw, d_logg, d_logf], axis=1)
    jac = np.concatenate([jc.real, jc.imag], axis=0)
    return resid, jac


def fit_oscillators(
    table: OpticalDataTable,
    n_oscillators: int,
    plasma_freq_ev: float,
    window_ev: tuple[float, float | None] = (2.0, None),
    max_iter: int = 300,
) -> FitResult:
    """Fit (w_j, g_j, f_j) to the table over the window at fixed wp.

    Minimizes the sum over window rows of |eps_model - eps_data|^2 with
    both real and imaginary parts.  Positivity of every parameter is
    enforced by optimizing logarithms.  Damped least squares with a
    trust-region acceptance rule: a step is only taken when the true
    residual decreases.  Fully deterministic: initial resonances are
    log-spaced across the window, g_j = w_j / 5, and strengths come from
    a linear pre-solve.
    """
    if n_oscillators < 1:
        raise ValueError(f"need at least one oscillator to fit, got {n_oscillators}")
    if plasma_freq_ev < 0.0:
        raise ValueError(f"plasma frequency must be >= 0, got {plasma_freq_ev}")
    omegas = np.asarray(table.omega_ev)
    lo = float(window_ev[0])
    hi = float(window_ev[1]) if window_ev[1] is not None else float(omegas[-1])
    if not (omegas[0] <= lo < hi <= omegas[-1]):
        raise ValueError(
            f"fit window [{lo:g}, {hi:g}] eV must lie within the table "
            f"support [{omegas[0]:g}, {omegas[-1]:g}]"
        )
    mask = (omegas >= lo) & (omegas <= hi)
    om = omegas[mask]
    k = n_oscillators
    if om.size < 3 * k:
        raise ValueError(
            f"window holds {om.size} rows; need at least {3 * k} to "
            f"determine {3 * k} parameters"
        )
    eps_im_w = table.eps_im()[mask]
    target = table.eps_re()[mask] + 1j * eps_im_w

    # Deterministic initialization: resonances seeded at the strongest
    # local maxima of the absorption data, remainder log-spaced.
    peaks = [
        i
        for i in range(1, om.size - 1)
        if eps_im_w[i] >= eps_im_w[i - 1] and eps_im_w[i] >= eps_im_w[i + 1]
    ]
    peaks.sort(key=lambda i: -eps_im_w[i])
    seeds = sorted(float(om[i]) for i in peaks[:k])
    if len(seeds) < k:
        seeds += list(np.geomspace(lo * 1.5, hi / 1.5, k - len(seeds)))
    w0 = np.array(sorted(seeds))
    g0 = w0 / 5.0

    osc_target = target - (1.0 - (plasma_freq_ev / om) ** 2)
    rhs = np.concatenate([osc_target.real, osc_target.imag])
    scale = max(float(np.max(np.abs(rhs))), 1.0)

    def presolve_strengths(wv: np.ndarray, gv: np.ndarray) -> np.ndarray:
        denom = wv[None, :] ** 2 - om[:, None] ** 2 - 1j * gv[None, :] * om[:, None]
        b = 1.0 / denom
        design = np.concatenate([b.real, b.imag], axis=0)
        sols, *_ = np.linalg.lstsq(design, rhs, rcond=None)
        return np.clip(sols, 1e-8 * scale, None)

    theta = np.concatenate([np.log(w0), np.log(g0), np.log(presolve_strengths(w0, g0))])
    resid, jac = _residual_and_jacobian(theta, om, target, plasma_freq_ev, k)
    cost = float(resid @ resid)
    lam = 1e-3
    converged = False
    message = "reached max_iter"
    iterations = 0
    kicks = 0
    last_step = math.inf

    while iterations < max_iter:
        iterations += 1
        grad = jac.T @ resid
        if float(np.max(np.abs(grad))) < 1e-14 * (1.0 + cost):
            converged = True
            message = "gradient below tolerance"
            break
        a = jac.T @ jac
        diag = np.clip(np.diag(a), 1e-30, None)
        accepted = False
        for _ in range(60):
            try:
                delta = np.linalg.solve(a + lam * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            # Log-space trust region: never move any parameter by more
            # than a factor e^2 in one step, and only keep finite,
            # strictly decreasing trials.
            biggest = float(np.max(np.abs(delta)))
            if biggest > 2.0:
                delta = delta * (2.0 / biggest)
            resid_t, jac_t = _residual_and_jacobian(theta + delta, om, target, plasma_freq_ev, k)
            cost_t = float(resid_t @ resid_t)
            if math.isfinite(cost_t) and cost_t < cost:
                accepted = True
                break
            lam *= 10.0
        if accepted:
            last_step = float(np.max(np.abs(delta)))
            theta = theta + delta
            resid, jac, cost = resid_t, jac_t, cost_t
            lam = max(lam / 3.0, 1e-14)
            if last_step < 1e-13:
                converged = True
                message = "step below tolerance"
                break
            continue
        # Stalled.  A collapsed oscillator (resonance run out of the
        # window, or strength driven to zero) leaves a flat direction the
        # damping cannot fix; reseed it at the worst-residual frequency
        # and keep going.  Deterministic, bounded number of restarts.
        wv = np.exp(theta[:k])
        fv = np.exp(theta[2 * k :])
        dead = [
            j
            for j in range(k)
            if wv[j] < lo / 5.0 or wv[j] > hi * 5.0 or fv[j] < 1e-10 * max(float(np.max(fv)), 1.0)
        ]
        if dead and kicks < 5:
            kicks += 1
            j = dead[0]
            resid_c = np.abs(resid[: om.size] + 1j * resid[om.size :])
            w_new = float(om[int(np.argmax(resid_c))])
            theta[j] = math.log(w_new)
            theta[k + j] = math.log(w_new / 5.0)
            theta[2 * k + j] = math.log(max(float(np.median(fv)), 1e-3))
            resid, jac = _residual_and_jacobian(theta, om, target, plasma_freq_ev, k)
            cost = float(resid @ resid)
            lam = 1e-3
            continue
        if last_step < 1e-8:
            # The iteration had already stopped moving before the stall:
            # a stationary point, not a failure.
            converged = True
            message = "stationary point reached"
            break
        message = "stalled: no decreasing step found"
        break

    w = np.exp(theta[:k])
    g = np.exp(theta[k : 2 * k])
    f = np.exp(theta[2 * k :])
    order = np.argsort(w)
    terms = tuple(
        (float(w[j]), float(g[j]), float(f[j])) for j in order
    )
    warnings: list[str] = []
    for j in range(1, len(terms)):
        if terms[j][0] / terms[j - 1][0] < 1.02:
            warnings.append(
                f"resonances {j} and {j + 1} nearly coincide "
                f"({terms[j - 1][0]:g} vs {terms[j][0]:g} eV)"
            )
    rms = math.sqrt(cost / resid.size)
    if not converged:
        message = f"NOT_CONVERGED: {message}"
    return FitResult(
        oscillator_set=OscillatorSet(plasma_freq_ev=plasma_freq_ev, oscillators=terms),
        residual_norm=rms,
        window_ev=(lo, hi),
        iterations=iterations,
        converged=converged,
        message=message,
        warnings=tuple(warnings),
    )
