"""Casimir pressure and free energy between parallel mirrors.

Both observables are thermal (Matsubara) sums over imaginary frequencies
xi_l = 2 pi k_B T l, with the l = 0 term at half weight.  Each term is an
integral over transverse modes, evaluated in the scaled variable
y = 2 q a / (hbar c), where q is the imaginary-axis longitudinal
wavenumber expressed as an energy:

    P(a, T) = -(k_B T / (8 pi a^3)) Sum'_l Int_{y_l}^inf y^2
              Sum_alpha t_alpha e^-y / (1 - t_alpha e^-y) dy
    F(a, T) = +(k_B T / (8 pi a^2)) Sum'_l Int_{y_l}^inf y
              Sum_alpha ln(1 - t_alpha e^-y) dy

with y_l = 2 xi_l a / (hbar c) and t_alpha the product of the two
mirrors' reflection coefficients for polarization alpha in {TE, TM}.

The l = 0 term is where model choices diverge: the reflection
coefficients there are exact analytic limits dictated by each model's
zero-frequency divergence class (see materials.eps_at_matsubara), never
a numerical evaluation of the permittivity at a small frequency.
Attraction is negative; pressures are reported in Pa and free energies
per unit area in J/m^2.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .constants import (
    EV_PER_NM2_TO_J_PER_M2,
    EV_PER_NM3_TO_PA,
    HBAR_C_EV_NM,
    KB_EV_PER_K,
    matsubara_frequency,
)
from .errors import CasimirError, ConvergenceError
from .materials import MaterialModel, eps_at_matsubara, model_id, mu_at_matsubara
from .quadrature import gauss_legendre, geometric_panels

__all__ = [
    "MatsubaraGrid",
    "MirrorPair",
    "LifshitzOptions",
    "PressureResult",
    "FreeEnergyResult",
    "CompareRow",
    "ComparisonTable",
    "matsubara_frequencies",
    "fresnel_coefficients",
    "zero_frequency_coefficients",
    "pressure",
    "free_energy",
    "pressure_and_free_energy",
    "pressure_ideal_metal",
    "compare_models",
]


@dataclass(frozen=True)
class MatsubaraGrid:
    """Thermal frequencies xi_l = 2 pi k_B T l (eV) for l = 0..l_max."""

    temperature_k: float
    l_max: int
    frequencies_ev: tuple[float, ...]


def matsubara_frequencies(temperature_k: float, l_max: int) -> MatsubaraGrid:
    """Build the thermal frequency ladder; T must be positive.

    T = 0 has no discrete ladder; reach it by lowering T until the
    observable stops changing (the sum goes over to an integral).
    """
    if temperature_k <= 0.0:
        raise ValueError(f"temperature must be > 0 K, got {temperature_k}")
    if l_max < 0:
        raise ValueError(f"l_max must be >= 0, got {l_max}")
    freqs = tuple(matsubara_frequency(temperature_k, l) for l in range(l_max + 1))
    return MatsubaraGrid(temperature_k, l_max, freqs)


@dataclass(frozen=True)
class MirrorPair:
    """Two mirror materials separated by a vacuum gap of `separation_nm`."""

    left: MaterialModel
    right: MaterialModel
    separation_nm: float

    def __post_init__(self) -> None:
        if self.separation_nm <= 0.0:
            raise ValueError(f"separation must be > 0 nm, got {self.separation_nm}")

    @classmethod
    def symmetric(cls, model: MaterialModel, separation_nm: float) -> "MirrorPair":
        return cls(model, model, separation_nm)


@dataclass(frozen=True)
class LifshitzOptions:
    """Numerical controls for the Matsubara sweep.

    quad_tol: relative target for each term's mode integral.
    trunc_tol: the sum stops once the running term stays below
        trunc_tol * |partial sum| for three consecutive l.
    l_max: when set, sum exactly l = 0..l_max instead of using the rule.
    l_max_cap: hard cap; reaching it without convergence is an error.
    y_cutoff: mode integrals are cut y_l + y_cutoff out (integrands fall
        below 1e-16 of their peak well before 60).
    """

    quad_tol: float = 1e-12
    trunc_tol: float = 1e-12
    l_max: int | None = None
    l_max_cap: int = 10**6
    y_cutoff: float = 60.0


@dataclass(frozen=True)
class PressureResult:
    pressure_pa: float
    per_l_pa: tuple[float, ...]
    l0_te_pa: float
    l0_tm_pa: float
    l_max_used: int
    quad_err_est_pa: float
    temperature_k: float
    separation_nm: float


@dataclass(frozen=True)
class FreeEnergyResult:
    free_energy_j_per_m2: float
    per_l_j_per_m2: tuple[float, ...]
    l0_te_j_per_m2: float
    l0_tm_j_per_m2: float
    l_max_used: int
    quad_err_est_j_per_m2: float
    temperature_k: float
    separation_nm: float


# ---------------------------------------------------------------------------
# Reflection coefficients
# ---------------------------------------------------------------------------

def fresnel_coefficients(
    eps: float, mu: float, xi: float, k_t: float
) -> tuple[float, float]:
    """(r_TE, r_TM) at imaginary frequency xi for transverse wavenumber k_t.

    All quantities are energies (eV); k_t = hbar c k.  With
    q = sqrt(k_t^2 + xi^2) and k_m = sqrt(k_t^2 + eps mu xi^2):
    r_TE = (mu q - k_m)/(mu q + k_m), r_TM = (eps q - k_m)/(eps q + k_m).
    """
    if eps <= 0.0:
        raise ValueError(f"eps must be > 0, got {eps}")
    if mu < 1.0:
        raise ValueError(f"mu must be >= 1, got {mu}")
    if xi <= 0.0:
        raise ValueError(f"xi must be > 0, got {xi}")
    if k_t < 0.0:
        raise ValueError(f"k_t must be >= 0, got {k_t}")
    # same radical form for both so eps = mu = 1 gives exactly zero
    q = math.sqrt(k_t * k_t + xi * xi)
    k_m = math.sqrt(k_t * k_t + eps * mu * xi * xi)
    return (mu * q - k_m) / (mu * q + k_m), (eps * q - k_m) / (eps * q + k_m)


def zero_frequency_coefficients(m: MaterialModel, k_t: float) -> tuple[float, float]:
    """Exact static-limit (r_TE, r_TM) for transverse wavenumber k_t > 0.

    The limit depends only on the model's zero-frequency divergence class:

    * first-order divergence (ohmic): r_TM = 1, r_TE = (mu-1)/(mu+1)
      (0 for a nonmagnetic mirror);
    * second-order divergence (lossless free electrons, coefficient wp^2):
      r_TM = 1, r_TE = (mu k_t - s)/(mu k_t + s) with
      s = sqrt(k_t^2 + mu wp^2);
    * finite static permittivity eps0: r_TM = (eps0-1)/(eps0+1),
      r_TE = (mu-1)/(mu+1).
    """
    if k_t <= 0.0:
        raise ValueError(f"k_t must be > 0, got {k_t}")
    cls = eps_at_matsubara(m, 0.0, 0)
    mu0 = mu_at_matsubara(m.permeability, 0.0, 0)
    if cls.kind == "inverse_xi":
        return (mu0 - 1.0) / (mu0 + 1.0), 1.0
    if cls.kind == "inverse_xi_squared":
        s = math.sqrt(k_t * k_t + mu0 * cls.value)
        return (mu0 * k_t - s) / (mu0 * k_t + s), 1.0
    eps0 = cls.value
    return (mu0 - 1.0) / (mu0 + 1.0), (eps0 - 1.0) / (eps0 + 1.0)


def _static_coeff_arrays(m: MaterialModel) -> Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]:
    """Vectorized static-limit coefficients as a function of k_t arrays."""
    cls = eps_at_matsubara(m, 0.0, 0)
    mu0 = mu_at_matsubara(m.permeability, 0.0, 0)
    te_const = (mu0 - 1.0) / (mu0 + 1.0)
    if cls.kind == "inverse_xi":

        def coeffs(k_t: np.ndarray):
            ones = np.ones_like(k_t)
            return te_const * ones, ones

    elif cls.kind == "inverse_xi_squared":
        wp2 = cls.value

        def coeffs(k_t: np.ndarray):
            s = np.sqrt(k_t * k_t + mu0 * wp2)
            return (mu0 * k_t - s) / (mu0 * k_t + s), np.ones_like(k_t)

    else:
        tm_const = (cls.value - 1.0) / (cls.value + 1.0)

        def coeffs(k_t: np.ndarray):
            ones = np.ones_like(k_t)
            return te_const * ones, tm_const * ones

    return coeffs


def _thermal_coeff_arrays(
    m: MaterialModel, xi: float, l: int
) -> Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]:
    """Vectorized (r_TE, r_TM) at xi_l as a function of q arrays, l >= 1."""
    eps = eps_at_matsubara(m, xi, l).value
    mu = mu_at_matsubara(m.permeability, xi, l)
    gap = (eps * mu - 1.0) * xi * xi

    def coeffs(q: np.ndarray):
        k_m = np.sqrt(q * q + gap)
        return (mu * q - k_m) / (mu * q + k_m), (eps * q - k_m) / (eps * q + k_m)

    return coeffs


# ---------------------------------------------------------------------------
# Matsubara sweep
# ---------------------------------------------------------------------------

# Kernel vector layout used throughout the sweep.
_P_TE, _P_TM, _F_TE, _F_TM = 0, 1, 2, 3


def _eval_panel(coeffs_l, coeffs_r, scale, a, b, n) -> np.ndarray:
    """Gauss-Legendre estimate of the four mode-integral kernels on [a, b].

    coeffs_* map q arrays to (r_TE, r_TM); scale converts y to q.
    """
    x, w = gauss_legendre(n)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    y = mid + half * x
    q = y * scale
    te_l, tm_l = coeffs_l(q)
    te_r, tm_r = coeffs_r(q)
    t_te = te_l * te_r
    t_tm = tm_l * tm_r
    decay = np.exp(-y)
    growth = -np.expm1(-y)
    g_te = t_te * decay
    g_tm = t_tm * decay
    # 1 - t e^{-y} written so it stays accurate when t -> 1 and y -> 0
    d_te = (1.0 - t_te) + t_te * growth
    d_tm = (1.0 - t_tm) + t_tm * growth
    y2 = y * y
    log_te = np.where(d_te < 0.5, np.log(d_te), np.log1p(-g_te))
    log_tm = np.where(d_tm < 0.5, np.log(d_tm), np.log1p(-g_tm))
    return half * np.array(
        [
            float(np.dot(w, y2 * g_te / d_te)),
            float(np.dot(w, y2 * g_tm / d_tm)),
            float(np.dot(w, y * log_te)),
            float(np.dot(w, y * log_tm)),
        ]
    )


def _term_integrals(
    pair: MirrorPair, xi: float, l: int, inv_scale: float, opts: LifshitzOptions, floors: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Mode integrals (p_te, p_tm, f_te, f_tm) for one Matsubara index."""
    scale = 1.0 / inv_scale  # q = y * scale, scale = hbar c / (2 a)
    if l == 0:
        coeffs_l = _static_coeff_arrays(pair.left)
        coeffs_r = coeffs_l if pair.right is pair.left or pair.right == pair.left else _static_coeff_arrays(pair.right)
        # Graded panels toward y = 0: the free-energy kernels have an
        # integrable log feature there whenever a static reflection
        # product reaches 1 (any metallic TM term).  The bulk panels go
        # first so the dyadic slivers converge against a realistic floor.
        inner = 2.0**-40
        panels = [(1.0, 6.0), (6.0, 16.0), (16.0, 36.0), (36.0, opts.y_cutoff)]
        panels += list(reversed(geometric_panels(inner, 1.0)[1:]))
        # neglected [0, inner] sliver, bounded by Int y |ln y| and Int y
        skipped = inner * inner * (abs(math.log(inner)) + 1.0)
        y0 = 0.0
    else:
        coeffs_l = _thermal_coeff_arrays(pair.left, xi, l)
        coeffs_r = (
            coeffs_l
            if pair.right is pair.left or pair.right == pair.left
            else _thermal_coeff_arrays(pair.right, xi, l)
        )
        y0 = xi * inv_scale
        panels = [
            (y0, y0 + 5.0),
            (y0 + 5.0, y0 + 15.0),
            (y0 + 15.0, y0 + 35.0),
            (y0 + 35.0, y0 + opts.y_cutoff),
        ]
        skipped = 0.0

    totals = np.zeros(4)
    errs = np.full(4, skipped)
    for pa, pb in panels:
        n = 8 if (l == 0 and pb <= 1.0) else 32
        # Panel convergence is judged against the largest scale in play:
        # the running Matsubara sums or this term's own bulk panels.
        scale_floor = np.maximum(floors, np.abs(totals))
        prev = _eval_panel(coeffs_l, coeffs_r, scale, pa, pb, n)
        while True:
            n *= 2
            cur = _eval_panel(coeffs_l, coeffs_r, scale, pa, pb, n)
            err = np.abs(cur - prev)
            if np.all(err <= opts.quad_tol * np.maximum(np.abs(cur), scale_floor)):
                totals += cur
                errs += err
                break
            if n >= 2048:
                raise ConvergenceError(
                    f"mode integral for Matsubara index l={l} did not "
                    f"converge on panel [{pa:g}, {pb:g}]"
                )
            prev = cur
    return totals, errs


def _sweep(pair: MirrorPair, temperature_k: float, opts: LifshitzOptions):
    """Run the Matsubara sum; returns raw kernel sums and per-l records."""
    if temperature_k <= 0.0:
        raise ValueError(f"temperature must be > 0 K, got {temperature_k}")
    a = pair.separation_nm
    inv_scale = 2.0 * a / HBAR_C_EV_NM  # y = inv_scale * q

    sums = np.zeros(4)
    errs = np.zeros(4)
    per_l: list[np.ndarray] = []
    l0_term = np.zeros(4)
    consecutive = 0
    l = 0
    while True:
        xi = matsubara_frequency(temperature_k, l)
        floors = np.abs(sums)
        term, term_err = _term_integrals(pair, xi, l, inv_scale, opts, floors)
        weight = 0.5 if l == 0 else 1.0
        term = weight * term
        if l == 0:
            l0_term = term.copy()
        sums += term
        errs += weight * term_err
        per_l.append(term)

        if opts.l_max is not None:
            if l >= opts.l_max:
                break
        elif l >= 1:
            p_term = abs(term[_P_TE] + term[_P_TM])
            f_term = abs(term[_F_TE] + term[_F_TM])
            p_sum = abs(sums[_P_TE] + sums[_P_TM])
            f_sum = abs(sums[_F_TE] + sums[_F_TM])
            if p_term <= opts.trunc_tol * p_sum and f_term <= opts.trunc_tol * f_sum:
                consecutive += 1
                if consecutive >= 3:
                    break
            else:
                consecutive = 0
        if l >= opts.l_max_cap:
            raise ConvergenceError(
                f"Matsubara sum hit the cap l_max={opts.l_max_cap} before the "
                f"truncation tolerance {opts.trunc_tol:g} was met"
            )
        l += 1
    return sums, errs, per_l, l0_term, l


def _prefactors(pair: MirrorPair, temperature_k: float) -> tuple[float, float]:
    a = pair.separation_nm
    kbt = KB_EV_PER_K * temperature_k
    pref_p = -(kbt / (8.0 * math.pi * a**3)) * EV_PER_NM3_TO_PA
    pref_f = (kbt / (8.0 * math.pi * a**2)) * EV_PER_NM2_TO_J_PER_M2
    return pref_p, pref_f


def pressure_and_free_energy(
    pair: MirrorPair, temperature_k: float, opts: LifshitzOptions | None = None
) -> tuple[PressureResult, FreeEnergyResult]:
    """Evaluate both observables in one Matsubara sweep."""
    opts = opts or LifshitzOptions()
    sums, errs, per_l, l0_term, l_used = _sweep(pair, temperature_k, opts)
    pref_p, pref_f = _prefactors(pair, temperature_k)

    per_l_p = tuple(float(pref_p * (t[_P_TE] + t[_P_TM])) for t in per_l)
    per_l_f = tuple(float(pref_f * (t[_F_TE] + t[_F_TM])) for t in per_l)
    quad_err_p = float(abs(pref_p) * (errs[_P_TE] + errs[_P_TM]) + abs(per_l_p[-1]))
    quad_err_f = float(abs(pref_f) * (errs[_F_TE] + errs[_F_TM]) + abs(per_l_f[-1]))

    p_res = PressureResult(
        pressure_pa=float(pref_p * (sums[_P_TE] + sums[_P_TM])),
        per_l_pa=per_l_p,
        l0_te_pa=float(pref_p * l0_term[_P_TE]),
        l0_tm_pa=float(pref_p * l0_term[_P_TM]),
        l_max_used=l_used,
        quad_err_est_pa=quad_err_p,
        temperature_k=temperature_k,
        separation_nm=pair.separation_nm,
    )
    f_res = FreeEnergyResult(
        free_energy_j_per_m2=float(pref_f * (sums[_F_TE] + sums[_F_TM])),
        per_l_j_per_m2=per_l_f,
        l0_te_j_per_m2=float(pref_f * l0_term[_F_TE]),
        l0_tm_j_per_m2=float(pref_f * l0_term[_F_TM]),
        l_max_used=l_used,
        quad_err_est_j_per_m2=quad_err_f,
        temperature_k=temperature_k,
        separation_nm=pair.separation_nm,
    )
    return p_res, f_res


def pressure(
    pair: MirrorPair, temperature_k: float, opts: LifshitzOptions | None = None
) -> PressureResult:
    """Casimir pressure in Pa (negative = attraction)."""
    return pressure_and_free_energy(pair, temperature_k, opts)[0]


def free_energy(
    pair: MirrorPair, temperature_k: float, opts: LifshitzOptions | None = None
) -> FreeEnergyResult:
    """Casimir free energy per unit area in J/m^2."""
    return pressure_and_free_energy(pair, temperature_k, opts)[1]


def pressure_ideal_metal(separation_nm: float) -> float:
    """Perfect-reflector zero-temperature pressure -pi^2 hbar c/(240 a^4), Pa."""
    if separation_nm <= 0.0:
        raise ValueError(f"separation must be > 0 nm, got {separation_nm}")
    ev_per_nm3 = -(math.pi**2 / 240.0) * HBAR_C_EV_NM / separation_nm**4
    return ev_per_nm3 * EV_PER_NM3_TO_PA


# ---------------------------------------------------------------------------
# Model comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompareRow:
    separation_nm: float
    model_id: str
    pressure_pa: float
    pressure_over_ideal: float
    l0_te_share: float
    status: str


@dataclass(frozen=True)
class ComparisonTable:
    temperature_k: float
    rows: tuple[CompareRow, ...]

    def csv_lines(self) -> list[str]:
        lines = [f"# temperature_K = {self.temperature_k!r}"]
        lines.append("a_nm,model_id,P_Pa,P_over_P_ideal,l0_TE_share,status")
        for r in self.rows:
            lines.append(
                f"{r.separation_nm!r},{r.model_id},{r.pressure_pa!r},"
                f"{r.pressure_over_ideal!r},{r.l0_te_share!r},{r.status}"
            )
        return lines


def compare_models(
    separations_nm: Sequence[float],
    temperature_k: float,
    models: Sequence[MaterialModel],
    opts: LifshitzOptions | None = None,
    workers: int = 1,
) -> ComparisonTable:
    """Pressure of every model at every separation, with ideal-metal ratios.

    Cells that fail numerically are marked in their row's status instead
    of aborting the table.  Row order (separation outer, model inner) and
    the ascending-l reductions inside each cell are independent of the
    worker count, so output bytes are too.
    """
    if not separations_nm or not models:
        raise ValueError("need at least one separation and one model")
    opts = opts or LifshitzOptions()
    cells = [(float(a), m) for a in separations_nm for m in models]

    def one(cell) -> CompareRow:
        a, m = cell
        ident = model_id(m)
        try:
            res = pressure(MirrorPair.symmetric(m, a), temperature_k, opts)
        except CasimirError as exc:
            return CompareRow(a, ident, math.nan, math.nan, math.nan, f"error: {exc}")
        ideal = pressure_ideal_metal(a)
        share = res.l0_te_pa / res.pressure_pa if res.pressure_pa != 0.0 else 0.0
        return CompareRow(a, ident, res.pressure_pa, res.pressure_pa / ideal, share, "ok")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = tuple(pool.map(one, cells))
    else:
        rows = tuple(one(c) for c in cells)
    return ComparisonTable(temperature_k=temperature_k, rows=rows)
