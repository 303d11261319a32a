"""Entropy estimation and the low-temperature classification probe."""

import numpy as np
import pytest

from casimir.errors import AmbiguousClassificationError
from casimir.lifshitz import LifshitzOptions, MirrorPair
from casimir.materials import gold_drude, gold_plasma
from casimir.thermo import (
    EntropyCurve,
    NernstClassification,
    default_temperature_ladder,
    entropy,
    nernst_probe,
)

# Reference entropies from the independent transverse-wavenumber
# integrator (plain central difference, h = 0.02); agreement is expected
# at the finite-difference level, not at quadrature precision.
ORACLE_S = {
    ("drude", 300.0): -1.850944133451548e-13,
    ("plasma", 300.0): 1.1234142526257093e-13,
    ("drude", 2.0): -1.7486455303227906e-13,
}

LOOSE = LifshitzOptions(quad_tol=1e-10, trunc_tol=1e-10)


class TestEntropy:
    def test_drude_room_temperature(self):
        est = entropy(MirrorPair.symmetric(gold_drude(), 1000.0), 300.0, opts=LOOSE)
        assert est.s_j_per_m2_k == pytest.approx(ORACLE_S[("drude", 300.0)], rel=1e-3)
        assert est.s_j_per_m2_k < 0.0
        assert est.temperature_k == 300.0
        assert est.fd_step == 0.025

    def test_plasma_room_temperature_is_positive(self):
        est = entropy(MirrorPair.symmetric(gold_plasma(), 1000.0), 300.0, opts=LOOSE)
        assert est.s_j_per_m2_k == pytest.approx(ORACLE_S[("plasma", 300.0)], rel=1e-3)
        assert est.s_j_per_m2_k > 0.0

    def test_drude_low_temperature(self):
        est = entropy(MirrorPair.symmetric(gold_drude(), 1000.0), 2.0, opts=LOOSE)
        assert est.s_j_per_m2_k == pytest.approx(ORACLE_S[("drude", 2.0)], rel=1e-3)

    def test_error_estimate_is_small(self):
        est = entropy(MirrorPair.symmetric(gold_drude(), 1000.0), 300.0, opts=LOOSE)
        assert est.err_est < 1e-3 * abs(est.s_j_per_m2_k)

    def test_validation(self):
        pair = MirrorPair.symmetric(gold_drude(), 1000.0)
        with pytest.raises(ValueError, match="temperature"):
            entropy(pair, 0.0)
        with pytest.raises(ValueError, match="rel_step"):
            entropy(pair, 300.0, rel_step=0.7)


class TestLadder:
    def test_default_shape(self):
        ladder = default_temperature_ladder()
        assert len(ladder) == 12
        assert ladder[0] == 300.0
        assert ladder[-1] == pytest.approx(2.0)
        assert all(b < a for a, b in zip(ladder, ladder[1:]))

    def test_probe_ladder_validation(self):
        pair = MirrorPair.symmetric(gold_plasma(), 1000.0)
        with pytest.raises(ValueError, match="at least 6 points"):
            nernst_probe(pair, [300.0, 100.0, 30.0, 10.0, 2.0])
        with pytest.raises(ValueError, match="strictly decreasing"):
            nernst_probe(pair, [300.0, 100.0, 100.0, 30.0, 10.0, 2.0])
        with pytest.raises(ValueError, match="reach 2 K"):
            nernst_probe(pair, [300.0, 200.0, 100.0, 50.0, 20.0, 10.0])


# A coarse ladder at a wide gap keeps these probes cheap; the fine
# ladders live in the acceptance tests.
COARSE_LADDER = [12.0, 10.0, 8.0, 6.0, 4.0, 3.0, 2.0]


@pytest.fixture(scope="module")
def drude_probe():
    pair = MirrorPair.symmetric(gold_drude(), 2000.0)
    return nernst_probe(
        pair, COARSE_LADDER, opts=LifshitzOptions(quad_tol=1e-8, trunc_tol=1e-8)
    )


class TestClassification:
    LADDER = COARSE_LADDER

    def test_ohmic_mirror_violates(self, drude_probe):
        cls, curve = drude_probe
        assert not cls.satisfies
        assert cls.plateau_j_per_m2_k < 0.0
        assert cls.fit_residual < abs(cls.plateau_j_per_m2_k)
        assert "violates" in cls.summary()
        assert curve.s_extrapolated_0 == cls.plateau_j_per_m2_k

    def test_curve_csv(self, drude_probe):
        cls, curve = drude_probe
        lines = curve.csv_lines(cls)
        assert lines[0] == "T_K,S,fd_step,err_est"
        assert len(lines) == 1 + len(self.LADDER) + 1
        assert lines[-1].startswith("# classification: violates third law")
        assert all(len(line.split(",")) == 4 for line in lines[1:-1])

    def test_csv_without_classification(self, drude_probe):
        _, curve = drude_probe
        assert len(curve.csv_lines()) == 1 + len(self.LADDER)

    def test_near_threshold_is_ambiguous(self, drude_probe):
        cls, _ = drude_probe
        pair = MirrorPair.symmetric(gold_drude(), 2000.0)
        # pick the tolerance so the threshold lands exactly on the fitted
        # plateau: the margin collapses below the fit residual
        tol = abs(cls.plateau_j_per_m2_k) / abs(cls.s_reference_j_per_m2_k)
        with pytest.raises(AmbiguousClassificationError, match="margin"):
            nernst_probe(
                pair,
                self.LADDER,
                tol=tol,
                opts=LifshitzOptions(quad_tol=1e-8, trunc_tol=1e-8),
            )

    def test_summary_text_when_satisfying(self):
        cls = NernstClassification(
            satisfies=True,
            plateau_j_per_m2_k=None,
            s_reference_j_per_m2_k=1e-13,
            reference_temperature_k=300.0,
            threshold_j_per_m2_k=1e-16,
            fit_residual=1e-18,
        )
        assert cls.summary().startswith("classification: satisfies third law")
