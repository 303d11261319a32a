"""Acceptance gate: nine numbered criteria, one pass/fail line each.

Every criterion states its tolerance inline and prints a single
[ n/9 ] PASS/FAIL line so the whole gate can be read at a glance from
the pytest output.  Expected values marked as oracle values were
computed with an independent integrator.
"""

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from casimir.dispersion import (
    WEAK_LIMIT_TEST_SUITE,
    FrequencyGrid,
    MollifiedDelta,
    kk_residual_report,
    mollified_delta_identity,
    suite_test_function,
    weak_limit_drude,
)
from casimir.errors import InadmissibleModelError
from casimir.lifshitz import (
    LifshitzOptions,
    MirrorPair,
    compare_models,
    free_energy,
    pressure,
    pressure_and_free_energy,
    pressure_ideal_metal,
    zero_frequency_coefficients,
)
from casimir.materials import (
    DrudeParams,
    MaterialModel,
    OscillatorSet,
    PermeabilityModel,
    PlasmaParams,
)
from casimir.optics import fit_oscillators, synthesize_nk_table
from casimir.thermo import nernst_probe

GOLD_DRUDE = MaterialModel(DrudeParams(9.0, 0.035))
GOLD_PLASMA = MaterialModel(PlasmaParams(9.0))
THREE_OSC = OscillatorSet(
    9.0,
    ((3.05, 0.75, 7.091), (4.15, 1.85, 41.46), (8.5, 7.0, 154.7)),
)


@pytest.fixture
def announce(capsys):
    @contextmanager
    def _announce(index: int, label: str):
        t0 = time.perf_counter()
        try:
            yield
        except BaseException:
            with capsys.disabled():
                print(f"[ {index}/9 ] FAIL  {label}")
            raise
        dt = time.perf_counter() - t0
        with capsys.disabled():
            print(f"[ {index}/9 ] PASS  {label} ({dt:.1f} s)")

    return _announce


def test_1_ideal_metal_limit(announce):
    """A huge-plasma-frequency mirror reproduces the perfect-mirror law."""
    with announce(1, "ideal-metal limit within 1% at wp = 1000 eV"):
        t0 = time.perf_counter()
        pair = MirrorPair.symmetric(MaterialModel(PlasmaParams(1000.0)), 1000.0)
        p = pressure(pair, 10.0).pressure_pa
        ideal = pressure_ideal_metal(1000.0)
        assert ideal == pytest.approx(-1.3001e-3, rel=1e-4)
        assert abs(p - ideal) <= 0.01 * abs(ideal)
        assert time.perf_counter() - t0 < 10.0


def test_2_pressure_is_free_energy_gradient(announce):
    """|P + dF/da| / |P| <= 1e-4 on a 3x3 (a, T) grid for both models."""
    with announce(2, "P = -dF/da to 1e-4 on the (a, T) grid"):
        t0 = time.perf_counter()
        worst = 0.0
        for model in (GOLD_DRUDE, GOLD_PLASMA):
            for a in (200.0, 500.0, 1000.0):
                for temp in (77.0, 300.0, 600.0):
                    p_res, _ = pressure_and_free_energy(
                        MirrorPair.symmetric(model, a), temp
                    )
                    h = 1e-3 * a
                    f_hi = free_energy(
                        MirrorPair.symmetric(model, a + h), temp
                    ).free_energy_j_per_m2
                    f_lo = free_energy(
                        MirrorPair.symmetric(model, a - h), temp
                    ).free_energy_j_per_m2
                    # dF/da in J/m^2 per nm; x 1e9 converts to Pa
                    dfda_pa = (f_hi - f_lo) / (2.0 * h) * 1e9
                    resid = abs(p_res.pressure_pa + dfda_pa) / abs(p_res.pressure_pa)
                    worst = max(worst, resid)
        assert worst <= 1e-4
        assert time.perf_counter() - t0 < 120.0


def test_3_kramers_kronig_compliance(announce):
    """Generalized relation: exact for pure plasma, <= 1e-5 for oscillators;
    the standard relation must refuse the pure-plasma model."""
    with announce(3, "KK compliance: plasma exact, 3-oscillator <= 1e-5"):
        grid = FrequencyGrid.log_spaced(0.1, 100.0, 24)
        plasma_report = kk_residual_report(PlasmaParams(9.0), grid, "generalized")
        assert plasma_report.max_abs_residual <= 1e-12
        osc_report = kk_residual_report(THREE_OSC, grid, "generalized")
        assert osc_report.max_rel_residual <= 1e-5
        with pytest.raises(InadmissibleModelError, match="INADMISSIBLE"):
            kk_residual_report(PlasmaParams(9.0), grid, "standard")


def test_4_weak_limit_convergence(announce):
    """Loss-parameter integrals approach pi * wp^2 * phi'(0); the mollified
    combination pairs to ~0 for the whole fixed test-function suite."""
    with announce(4, "weak limits: |I(gamma) - pi| <= 1e-3, suite <= 1e-3"):
        phi = lambda w: w * math.exp(-w * w)
        values = weak_limit_drude(1.0, phi, (1e-2, 1e-3, 1e-4))
        errs = [abs(v - math.pi) for v in values]
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] <= 1e-3
        delta = MollifiedDelta(1e-2, "gaussian")
        for entry in WEAK_LIMIT_TEST_SUITE:
            suite_phi, _, _ = suite_test_function(entry)
            (value,) = mollified_delta_identity(suite_phi, [delta])
            assert abs(value) <= 1e-3, f"suite entry {entry} paired to {value}"


def test_5_loss_discontinuity(announce):
    """Vanishing ohmic loss does not reach the lossless result: the pressure
    ladder settles while staying >= 1% away, and the gap is the static TE term."""
    with announce(5, "gamma -> 0 pressure gap >= 1%, explained by l = 0 TE"):
        t0 = time.perf_counter()
        a, temp = 1000.0, 300.0
        ladder = [1e-3, 1e-4, 1e-5, 1e-6]
        results = [
            pressure(
                MirrorPair.symmetric(MaterialModel(DrudeParams(9.0, g)), a), temp
            )
            for g in ladder
        ]
        last_change = abs(
            results[-1].pressure_pa - results[-2].pressure_pa
        ) / abs(results[-1].pressure_pa)
        assert last_change <= 1e-3
        plasma = pressure(MirrorPair.symmetric(GOLD_PLASMA, a), temp)
        gap = plasma.pressure_pa - results[-1].pressure_pa
        assert abs(gap) >= 0.01 * abs(plasma.pressure_pa)
        te_gap = plasma.l0_te_pa - results[-1].l0_te_pa
        assert results[-1].l0_te_pa == 0.0
        assert abs(te_gap) >= 0.99 * abs(gap)
        assert time.perf_counter() - t0 < 60.0


def test_6_low_temperature_entropy(announce):
    """Entropy extrapolation: lossless plasma reaches S(0) = 0, ohmic and
    magnetic-ohmic mirrors plateau, with the stated signs and stability."""
    with announce(6, "third-law probe: plasma ok, Drude and magnetic Drude not"):
        t0 = time.perf_counter()
        ladder = list(np.geomspace(300.0, 2.42, 10)) + [2.2, 2.0]
        opts = LifshitzOptions(quad_tol=1e-10, trunc_tol=1e-10)

        def probe(model: MaterialModel):
            pair = MirrorPair.symmetric(model, 1000.0)
            return nernst_probe(pair, ladder, tol=1e-3, opts=opts, workers=4)

        cls_plasma, _ = probe(GOLD_PLASMA)
        assert cls_plasma.satisfies

        cls_drude, curve = probe(GOLD_DRUDE)
        assert not cls_drude.satisfies
        assert cls_drude.plateau_j_per_m2_k < 0.0
        s_lo, s_next = curve.s_values[-1], curve.s_values[-2]
        assert abs(s_lo - s_next) <= 0.05 * abs(s_lo)

        magnetic = MaterialModel(
            DrudeParams(9.0, 0.035),
            PermeabilityModel(static_mu=110.0),
        )
        cls_mag, _ = probe(magnetic)
        assert not cls_mag.satisfies
        assert cls_mag.plateau_j_per_m2_k > 0.0
        assert time.perf_counter() - t0 < 300.0


def test_7_static_reflection_exactness(announce):
    """Zero-frequency reflection coefficients match closed forms to 1e-12."""
    with announce(7, "static reflection coefficients exact to 1e-12"):
        for k_t in (0.05, 0.5, 2.0):  # transverse wavenumber in eV units
            r_te, r_tm = zero_frequency_coefficients(GOLD_DRUDE, k_t)
            assert abs(r_te - 0.0) <= 1e-12
            assert abs(r_tm - 1.0) <= 1e-12

            magnetic = MaterialModel(
                DrudeParams(9.0, 0.035),
                PermeabilityModel(static_mu=110.0),
            )
            r_te, r_tm = zero_frequency_coefficients(magnetic, k_t)
            assert abs(r_te - 109.0 / 111.0) <= 1e-12
            assert abs(r_tm - 1.0) <= 1e-12

            r_te, r_tm = zero_frequency_coefficients(GOLD_PLASMA, k_t)
            k_p = math.sqrt(k_t * k_t + 81.0)
            assert abs(r_te - (k_t - k_p) / (k_t + k_p)) <= 1e-12
            assert abs(r_tm - 1.0) <= 1e-12


def test_8_oscillator_fit_round_trip(announce):
    """Three synthetic resonances recovered to 1% and the fitted model is
    itself causal under the generalized relation."""
    with announce(8, "3-oscillator fit: params to 1%, residual <= 1e-8"):
        t0 = time.perf_counter()
        table = synthesize_nk_table(THREE_OSC, np.geomspace(2.0, 40.0, 200))
        fit = fit_oscillators(table, 3, plasma_freq_ev=9.0)
        assert fit.converged
        assert fit.residual_norm <= 1e-8
        for got, truth in zip(fit.oscillator_set.oscillators, THREE_OSC.oscillators):
            for g, t in zip(got, truth):
                assert abs(g - t) <= 0.01 * abs(t)
        grid = FrequencyGrid.log_spaced(0.1, 100.0, 24)
        report = kk_residual_report(fit.oscillator_set, grid, "generalized")
        assert report.max_rel_residual <= 1e-5
        assert time.perf_counter() - t0 < 30.0


def test_9_worker_count_determinism(announce, tmp_path):
    """Every parallelizable artifact is byte-identical at 1 and 4 workers."""
    with announce(9, "outputs byte-identical for workers in {1, 4}"):
        opts = LifshitzOptions(quad_tol=1e-10, trunc_tol=1e-10)
        tables = [
            compare_models(
                (500.0, 1000.0), 300.0, (GOLD_DRUDE, GOLD_PLASMA), opts, workers=w
            ).csv_lines()
            for w in (1, 4)
        ]
        assert tables[0] == tables[1]

        grid = FrequencyGrid.log_spaced(0.1, 100.0, 24)
        reports = [
            kk_residual_report(THREE_OSC, grid, "generalized", workers=w).csv_lines()
            for w in (1, 4)
        ]
        assert reports[0] == reports[1]

        coarse = [12.0, 10.0, 8.0, 6.0, 4.0, 3.0, 2.0]
        loose = LifshitzOptions(quad_tol=1e-8, trunc_tol=1e-8)
        curves = []
        for w in (1, 4):
            cls, curve = nernst_probe(
                MirrorPair.symmetric(GOLD_DRUDE, 2000.0),
                coarse,
                opts=loose,
                workers=w,
            )
            curves.append(curve.csv_lines(cls))
        assert curves[0] == curves[1]

        from casimir.cli import main

        argv = ["pressure", "--model", "gold-drude", "--a", "200:1000:3", "--T", "300"]
        out1, out4 = tmp_path / "w1", tmp_path / "w4"
        assert main(argv + ["--out", str(out1), "--workers", "1"]) == 0
        assert main(argv + ["--out", str(out4), "--workers", "4"]) == 0
        assert (out1 / "pressure.csv").read_bytes() == (out4 / "pressure.csv").read_bytes()
