"""Dielectric and magnetic response models for metallic mirrors.

All models are defined both on the real frequency axis (complex
susceptibility chi(omega)) and on the imaginary axis (real chi(i xi)),
with frequencies measured as photon energies in eV.  The zero-frequency
behavior differs between models and is exposed as an explicit divergence
class rather than a numeric value, so downstream code can take exact
static limits instead of evaluating a divergent permittivity near zero.

Variants:

* Drude: free electrons with ohmic loss, chi = -wp^2 / (omega (omega + i gamma)).
  Diverges as 1/xi on the imaginary axis; gamma = 0 is rejected (use the
  lossless plasma variant, which is a genuinely different model at the
  static point even though the two agree pointwise for every xi > 0).
* Plasma: lossless free electrons, chi = -wp^2 / omega^2.  Diverges as 1/xi^2.
* Generalized: plasma term plus K damped oscillators for bound electrons.
  Shares the plasma divergence class when wp > 0; with wp = 0 the static
  permittivity is finite.

Permeability is real on the imaginary axis, >= 1, and nonincreasing; the
default policy keeps mu(0) at the static Matsubara term only and returns 1
for every nonzero frequency.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DrudeParams",
    "PlasmaParams",
    "OscillatorSet",
    "PermeabilityModel",
    "MaterialModel",
    "MatsubaraEps",
    "chi_drude_real_axis",
    "chi_drude_imag_axis",
    "chi_plasma_real_axis",
    "chi_plasma_imag_axis",
    "chi_generalized_real_axis",
    "chi_generalized_imag_axis",
    "chi_imag_axis",
    "mu_at_matsubara",
    "eps_at_matsubara",
    "model_id",
    "material_to_dict",
    "material_from_dict",
    "material_to_json",
    "material_from_json",
    "gold_drude",
    "gold_plasma",
    "gold_oscillators",
]


@dataclass(frozen=True)
class DrudeParams:
    """Free-electron response with ohmic relaxation.

    plasma_freq_ev: plasma frequency wp (eV), > 0.
    relaxation_ev: relaxation rate gamma (eV), > 0.  Zero is rejected on
        purpose: the gamma -> 0 limit and the lossless plasma model differ
        at the static point, and silently aliasing them would hide exactly
        the distinction this library exists to measure.
    """

    plasma_freq_ev: float
    relaxation_ev: float

    def __post_init__(self) -> None:
        if self.plasma_freq_ev <= 0.0:
            raise ValueError(f"plasma_freq_ev must be > 0, got {self.plasma_freq_ev}")
        if self.relaxation_ev <= 0.0:
            raise ValueError(
                f"relaxation_ev must be > 0, got {self.relaxation_ev}; "
                "for a lossless metal use PlasmaParams"
            )


@dataclass(frozen=True)
class PlasmaParams:
    """Lossless free-electron response, chi = -wp^2/omega^2."""

    plasma_freq_ev: float

    def __post_init__(self) -> None:
        if self.plasma_freq_ev <= 0.0:
            raise ValueError(f"plasma_freq_ev must be > 0, got {self.plasma_freq_ev}")


@dataclass(frozen=True)
class OscillatorSet:
    """Plasma term plus K damped Lorentz oscillators for bound electrons.

    plasma_freq_ev: free-electron plasma frequency wp (eV), >= 0.  wp = 0
        drops the free-electron term entirely, leaving a finite static
        permittivity (K = 0 and wp = 0 is vacuum).
    oscillators: tuple of (resonance_ev, damping_ev, strength_ev2) triples.
        Each term contributes f_j / (w_j^2 - omega^2 - i g_j omega) on the
        real axis.  Strengths carry eV^2 so each term is dimensionless.
    """

    plasma_freq_ev: float
    oscillators: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self) -> None:
        if self.plasma_freq_ev < 0.0:
            raise ValueError(f"plasma_freq_ev must be >= 0, got {self.plasma_freq_ev}")
        normalized = tuple(
            (float(w), float(g), float(f)) for (w, g, f) in self.oscillators
        )
        object.__setattr__(self, "oscillators", normalized)
        for j, (w_j, g_j, f_j) in enumerate(normalized):
            if w_j <= 0.0:
                raise ValueError(f"oscillator {j}: resonance must be > 0, got {w_j}")
            if g_j < 0.0:
                raise ValueError(f"oscillator {j}: damping must be >= 0, got {g_j}")
            if f_j < 0.0:
                raise ValueError(f"oscillator {j}: strength must be >= 0, got {f_j}")

    @property
    def static_permittivity(self) -> float:
        """eps(0) = 1 + sum f_j / w_j^2; only meaningful when wp = 0."""
        return 1.0 + sum(f_j / w_j**2 for (w_j, _, f_j) in self.oscillators)


@dataclass(frozen=True)
class PermeabilityModel:
    """Magnetic permeability on the imaginary axis.

    decay selects how mu relaxes from its static value mu(0) >= 1:
    "constant_at_zero_only" keeps mu(0) at the l = 0 Matsubara term and
    returns exactly 1 for any xi > 0 (magnetic response of real metals is
    dead well below the first Matsubara frequency at laboratory
    temperatures); "debye" relaxes smoothly with cutoff omega_m:
    mu(i xi) = 1 + (mu(0) - 1) / (1 + xi^2 / omega_m^2).
    """

    static_mu: float = 1.0
    decay: str = "constant_at_zero_only"
    debye_cutoff_ev: float | None = None

    def __post_init__(self) -> None:
        if self.static_mu < 1.0:
            raise ValueError(f"static_mu must be >= 1, got {self.static_mu}")
        if self.decay not in ("constant_at_zero_only", "debye"):
            raise ValueError(f"unknown permeability decay policy {self.decay!r}")
        if self.decay == "debye":
            if self.debye_cutoff_ev is None or self.debye_cutoff_ev <= 0.0:
                raise ValueError("debye decay requires debye_cutoff_ev > 0")


DielectricParams = DrudeParams | PlasmaParams | OscillatorSet


@dataclass(frozen=True)
class MaterialModel:
    """A mirror material: dielectric variant plus permeability."""

    dielectric: DielectricParams
    permeability: PermeabilityModel = field(default_factory=PermeabilityModel)

    def __post_init__(self) -> None:
        if not isinstance(self.dielectric, (DrudeParams, PlasmaParams, OscillatorSet)):
            raise TypeError(
                f"dielectric must be DrudeParams, PlasmaParams or OscillatorSet, "
                f"got {type(self.dielectric).__name__}"
            )


# ---------------------------------------------------------------------------
# Susceptibility evaluators
# ---------------------------------------------------------------------------

def chi_drude_real_axis(p: DrudeParams, omega: float) -> complex:
    """Drude susceptibility -wp^2 / (omega (omega + i gamma)) at real omega.

    Im chi > 0 for omega > 0 (passive medium).
    """
    if omega == 0.0:
        raise ValueError("Drude susceptibility is singular at omega = 0")
    return -p.plasma_freq_ev**2 / (omega * complex(omega, p.relaxation_ev))


def chi_drude_imag_axis(p: DrudeParams, xi: float) -> float:
    """Drude susceptibility wp^2 / (xi (xi + gamma)) at omega = i xi, xi > 0."""
    if xi <= 0.0:
        raise ValueError(f"xi must be > 0, got {xi}")
    return p.plasma_freq_ev**2 / (xi * (xi + p.relaxation_ev))


def chi_plasma_real_axis(p: PlasmaParams, omega: float) -> float:
    """Lossless plasma susceptibility -wp^2/omega^2 at real omega != 0."""
    if omega == 0.0:
        raise ValueError("plasma susceptibility is singular at omega = 0")
    return -p.plasma_freq_ev**2 / omega**2


def chi_plasma_imag_axis(p: PlasmaParams, xi: float) -> float:
    """Lossless plasma susceptibility +wp^2/xi^2 at omega = i xi, xi > 0."""
    if xi <= 0.0:
        raise ValueError(f"xi must be > 0, got {xi}")
    return p.plasma_freq_ev**2 / xi**2


def chi_generalized_real_axis(s: OscillatorSet, omega: float) -> complex:
    """Plasma-plus-oscillators susceptibility at real omega.

    -wp^2/omega^2 + sum_j f_j / (w_j^2 - omega^2 - i g_j omega).
    Evaluation exactly at an undamped resonance is a pole and is rejected.
    """
    if omega == 0.0:
        raise ValueError("susceptibility is singular at omega = 0")
    total = complex(-s.plasma_freq_ev**2 / omega**2, 0.0)
    for w_j, g_j, f_j in s.oscillators:
        denom = complex(w_j**2 - omega**2, -g_j * omega)
        if denom == 0:
            raise ValueError(
                f"pole at undamped resonance omega = {omega} eV; "
                "evaluate off-resonance or add damping"
            )
        total += f_j / denom
    return total


def chi_generalized_imag_axis(s: OscillatorSet, xi: float) -> float:
    """Plasma-plus-oscillators susceptibility at omega = i xi, xi > 0.

    wp^2/xi^2 + sum_j f_j / (w_j^2 + xi^2 + g_j xi); positive and strictly
    decreasing in xi.
    """
    if xi <= 0.0:
        raise ValueError(f"xi must be > 0, got {xi}")
    total = s.plasma_freq_ev**2 / xi**2
    for w_j, g_j, f_j in s.oscillators:
        total += f_j / (w_j**2 + xi**2 + g_j * xi)
    return total


def chi_imag_axis(d: DielectricParams, xi: float) -> float:
    """Imaginary-axis susceptibility for any dielectric variant, xi > 0."""
    if isinstance(d, DrudeParams):
        return chi_drude_imag_axis(d, xi)
    if isinstance(d, PlasmaParams):
        return chi_plasma_imag_axis(d, xi)
    return chi_generalized_imag_axis(d, xi)


# ---------------------------------------------------------------------------
# Matsubara-term accessors
# ---------------------------------------------------------------------------

def mu_at_matsubara(m: PermeabilityModel, xi: float, l: int) -> float:
    """Permeability at the l-th Matsubara frequency (total, never raises)."""
    if m.decay == "constant_at_zero_only":
        return m.static_mu if l == 0 else 1.0
    return 1.0 + (m.static_mu - 1.0) / (1.0 + xi**2 / m.debye_cutoff_ev**2)


# Zero-frequency divergence classes.  kind "finite" carries eps(i xi) itself;
# "inverse_xi" carries lim xi*chi = wp^2/gamma; "inverse_xi_squared" carries
# lim xi^2*chi = wp^2.
@dataclass(frozen=True)
class MatsubaraEps:
    kind: str  # "finite" | "inverse_xi" | "inverse_xi_squared"
    value: float

    def __post_init__(self) -> None:
        if self.kind not in ("finite", "inverse_xi", "inverse_xi_squared"):
            raise ValueError(f"unknown MatsubaraEps kind {self.kind!r}")


def eps_at_matsubara(m: MaterialModel, xi: float, l: int) -> MatsubaraEps:
    """Permittivity at Matsubara index l, as a value or a divergence class.

    For l >= 1 returns Finite(1 + chi(i xi_l)).  For l = 0 the permittivity
    of a metal diverges and the return value classifies how: the Drude
    variant as wp^2/(gamma xi), the plasma and generalized variants with
    wp > 0 as wp^2/xi^2, and a generalized set with wp = 0 stays finite at
    its static permittivity.  Static reflection coefficients are then exact
    functions of the class, never of a sampled near-zero permittivity.
    """
    if l < 0:
        raise ValueError(f"Matsubara index must be >= 0, got {l}")
    d = m.dielectric
    if l > 0:
        return MatsubaraEps("finite", 1.0 + chi_imag_axis(d, xi))
    if isinstance(d, DrudeParams):
        return MatsubaraEps("inverse_xi", d.plasma_freq_ev**2 / d.relaxation_ev)
    if isinstance(d, PlasmaParams):
        return MatsubaraEps("inverse_xi_squared", d.plasma_freq_ev**2)
    if d.plasma_freq_ev > 0.0:
        return MatsubaraEps("inverse_xi_squared", d.plasma_freq_ev**2)
    return MatsubaraEps("finite", d.static_permittivity)


# ---------------------------------------------------------------------------
# Identification and serialization
# ---------------------------------------------------------------------------

def model_id(m: MaterialModel) -> str:
    """Compact, deterministic identifier used in CSV output (comma-free)."""
    d = m.dielectric
    if isinstance(d, DrudeParams):
        core = f"drude(wp={d.plasma_freq_ev:g};gamma={d.relaxation_ev:g})"
    elif isinstance(d, PlasmaParams):
        core = f"plasma(wp={d.plasma_freq_ev:g})"
    else:
        core = f"generalized(wp={d.plasma_freq_ev:g};K={len(d.oscillators)})"
    p = m.permeability
    if p.static_mu != 1.0:
        if p.decay == "debye":
            core += f"+mu(0)={p.static_mu:g}[debye:{p.debye_cutoff_ev:g}]"
        else:
            core += f"+mu(0)={p.static_mu:g}"
    return core


def material_to_dict(m: MaterialModel) -> dict:
    d = m.dielectric
    if isinstance(d, DrudeParams):
        diel = {
            "type": "drude",
            "plasma_freq_ev": d.plasma_freq_ev,
            "relaxation_ev": d.relaxation_ev,
        }
    elif isinstance(d, PlasmaParams):
        diel = {"type": "plasma", "plasma_freq_ev": d.plasma_freq_ev}
    else:
        diel = {
            "type": "generalized",
            "plasma_freq_ev": d.plasma_freq_ev,
            "oscillators": [list(osc) for osc in d.oscillators],
        }
    perm: dict = {"static_mu": m.permeability.static_mu, "decay": m.permeability.decay}
    if m.permeability.decay == "debye":
        perm["debye_cutoff_ev"] = m.permeability.debye_cutoff_ev
    return {"dielectric": diel, "permeability": perm}


def _require_number(obj: dict, key: str, path: str) -> float:
    if key not in obj:
        raise ValueError(f"{path}/{key}: missing required field")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"{path}/{key}: expected a number, got {type(v).__name__}")
    return float(v)


def material_from_dict(doc: dict, path: str = "") -> MaterialModel:
    """Parse {"dielectric": {...}, "permeability": {...}} into a MaterialModel.

    Errors carry a JSON-pointer-style path into the document.
    """
    if not isinstance(doc, dict):
        raise ValueError(f"{path or '/'}: expected an object")
    if "dielectric" not in doc:
        raise ValueError(f"{path}/dielectric: missing required field")
    diel = doc["dielectric"]
    if not isinstance(diel, dict):
        raise ValueError(f"{path}/dielectric: expected an object")
    dtype = diel.get("type")
    dpath = f"{path}/dielectric"
    if dtype == "drude":
        gamma = _require_number(diel, "relaxation_ev", dpath)
        if gamma == 0.0:
            raise ValueError(
                f"{dpath}/relaxation_ev: must be > 0; "
                'for a lossless metal use {"type": "plasma"}'
            )
        dielectric: DielectricParams = DrudeParams(
            _require_number(diel, "plasma_freq_ev", dpath), gamma
        )
    elif dtype == "plasma":
        dielectric = PlasmaParams(_require_number(diel, "plasma_freq_ev", dpath))
    elif dtype == "generalized":
        raw = diel.get("oscillators", [])
        if not isinstance(raw, list):
            raise ValueError(f"{dpath}/oscillators: expected a list")
        oscs = []
        for j, row in enumerate(raw):
            if not isinstance(row, (list, tuple)) or len(row) != 3:
                raise ValueError(
                    f"{dpath}/oscillators/{j}: expected [resonance_ev, "
                    "damping_ev, strength_ev2]"
                )
            oscs.append(tuple(float(x) for x in row))
        dielectric = OscillatorSet(
            _require_number(diel, "plasma_freq_ev", dpath), tuple(oscs)
        )
    else:
        raise ValueError(
            f"{dpath}/type: expected one of 'drude', 'plasma', 'generalized', "
            f"got {dtype!r}"
        )
    known = {"type", "plasma_freq_ev", "relaxation_ev", "oscillators"}
    for key in diel:
        if key not in known:
            raise ValueError(f"{dpath}/{key}: unknown key")

    perm_doc = doc.get("permeability", {})
    ppath = f"{path}/permeability"
    if not isinstance(perm_doc, dict):
        raise ValueError(f"{ppath}: expected an object")
    for key in perm_doc:
        if key not in {"static_mu", "decay", "debye_cutoff_ev"}:
            raise ValueError(f"{ppath}/{key}: unknown key")
    permeability = PermeabilityModel(
        static_mu=float(perm_doc.get("static_mu", 1.0)),
        decay=perm_doc.get("decay", "constant_at_zero_only"),
        debye_cutoff_ev=perm_doc.get("debye_cutoff_ev"),
    )
    for key in doc:
        if key not in {"dielectric", "permeability"}:
            raise ValueError(f"{path}/{key}: unknown key")
    return MaterialModel(dielectric, permeability)


def material_to_json(m: MaterialModel) -> str:
    return json.dumps(material_to_dict(m), indent=2, sort_keys=True)


def material_from_json(text: str) -> MaterialModel:
    return material_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Editable gold-like defaults
# ---------------------------------------------------------------------------
# Representative room-temperature values for gold; ship as a convenient
# starting point, not as asserted truth.  Override from config or refit
# against your own optical data.

GOLD_PLASMA_FREQ_EV: float = 9.0
GOLD_RELAXATION_EV: float = 0.035

# (resonance eV, damping eV, strength eV^2) for the bound-electron part.
GOLD_OSCILLATORS: tuple[tuple[float, float, float], ...] = (
    (3.05, 0.75, 7.091),
    (4.15, 1.85, 41.46),
    (5.40, 1.00, 2.700),
    (8.50, 7.00, 154.7),
    (13.5, 6.00, 44.55),
    (21.5, 9.00, 309.6),
)


def gold_drude() -> MaterialModel:
    """Gold-like Drude mirror with literature-typical wp and gamma."""
    return MaterialModel(DrudeParams(GOLD_PLASMA_FREQ_EV, GOLD_RELAXATION_EV))


def gold_plasma() -> MaterialModel:
    """Gold-like lossless-plasma mirror."""
    return MaterialModel(PlasmaParams(GOLD_PLASMA_FREQ_EV))


def gold_oscillators() -> MaterialModel:
    """Gold-like plasma-plus-oscillators mirror (free + bound electrons)."""
    return MaterialModel(OscillatorSet(GOLD_PLASMA_FREQ_EV, GOLD_OSCILLATORS))


def passivity_check(d: DielectricParams, omegas: np.ndarray) -> bool:
    """True when Im chi(omega) >= 0 on every grid point (omega > 0)."""
    for omega in np.asarray(omegas, dtype=float):
        if isinstance(d, DrudeParams):
            im = chi_drude_real_axis(d, float(omega)).imag
        elif isinstance(d, PlasmaParams):
            im = 0.0
        else:
            im = chi_generalized_real_axis(d, float(omega)).imag
        if im < 0.0:
            return False
    return True
