import math

import numpy as np
import pytest

from ewraman.core import (
    NormConvention,
    PotentialConfig,
    RecoilKind,
    RecoilModel,
    ValidationError,
)
from ewraman.semiclassical import predicted_fringe_momenta
from ewraman.stationary import (
    OverlapConfig,
    OverlapEngine,
    StationaryState,
    WindowTooSmallError,
    averaged_spectrum,
    classical_boundaries,
    eigenfunction,
    overlap_spectrum,
)
from ewraman.analysis import extract_fringes

CFG = PotentialConfig(1.0, 0.125, 0.2)
P0 = 2.0


@pytest.fixture(scope="module")
def engine():
    return OverlapEngine(P0, CFG, OverlapConfig.auto(P0, CFG))


class TestEigenfunction:
    def test_decays_into_barrier(self):
        st = StationaryState(P0, CFG.v1, CFG.kappa)
        z = np.linspace(-30.0, -12.0, 40)
        vals = np.abs(eigenfunction(st, z))
        assert vals.max() < 1e-6
        # monotone decay deeper in (within floating-point floor)
        nonzero = vals[vals > 0]
        assert np.all(np.diff(np.log(nonzero + 1e-320)) > -1e9)

    def test_asymptotic_amplitude_is_two(self):
        st = StationaryState(P0, CFG.v1, CFG.kappa)
        z = np.linspace(45.0, 60.0, 4000)
        psi = eigenfunction(st, z)
        assert np.abs(psi).max() == pytest.approx(2.0, rel=1e-4)

    def test_asymptotic_wavelength(self):
        # standing wave sin(p0 z + delta): zero crossings spaced pi/p0
        st = StationaryState(P0, CFG.v1, CFG.kappa)
        z = np.linspace(45.0, 60.0, 20000)
        psi = eigenfunction(st, z)
        crossings = z[:-1][np.diff(np.sign(psi)) != 0]
        assert np.mean(np.diff(crossings)) == pytest.approx(
            math.pi / P0, rel=1e-4
        )

    def test_asymptotic_phase_matches(self):
        # the closed-form phase used by the tail correction fits the tail
        st = StationaryState(1.3, CFG.v2, CFG.kappa)
        z = np.linspace(50.0, 58.0, 3000)
        psi = eigenfunction(st, z)
        model = 2.0 * np.sin(1.3 * z + st.asymptotic_phase)
        assert np.max(np.abs(psi - model)) < 1e-3

    def test_real_and_finite(self):
        st = StationaryState(P0, CFG.v1, CFG.kappa)
        vals = eigenfunction(st, np.linspace(-40.0, 60.0, 500))
        assert np.all(np.isfinite(vals))
        assert vals.dtype == np.float64


class TestClassicalBoundaries:
    def test_zero_recoil(self):
        p_min, lo, hi = classical_boundaries(P0, CFG, 0.0)
        assert p_min == pytest.approx(2.0 * math.sqrt(0.2), rel=1e-12)
        assert lo == hi == P0

    def test_unit_recoil(self):
        p_min, lo, hi = classical_boundaries(P0, CFG, 1.0)
        assert p_min == pytest.approx(
            2.0 * math.sqrt(0.2) * math.sqrt(1.0 - 0.25 / 0.8), rel=1e-12
        )
        assert (lo, hi) == (1.0, 3.0)

    def test_even_in_k(self):
        a = classical_boundaries(P0, CFG, 0.6)
        b = classical_boundaries(P0, CFG, -0.6)
        assert a == b

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            classical_boundaries(P0, CFG, 1.5)
        shallow = PotentialConfig(1.0, 0.125, 0.9)
        with pytest.raises(ValueError):
            # sqrt argument negative: k^2/(1-beta) > p0^2
            classical_boundaries(0.5, shallow, 0.4)


class TestOverlapConfig:
    def test_auto_satisfies_invariants(self):
        oc = OverlapConfig.auto(P0, CFG)
        assert not oc.validate(P0, CFG)

    def test_violations_reported(self):
        oc = OverlapConfig.auto(P0, CFG)
        bad = OverlapConfig(-5.0, 10.0, 400, oc.p_grid)
        msgs = bad.validate(P0, CFG)
        assert len(msgs) >= 2  # window both too shallow and too short


class TestSpectra:
    def test_fringes_form_in_two_path_band(self, engine):
        dist = engine.spectrum(0.0).normalized()
        p_min, _, _ = classical_boundaries(P0, CFG, 0.0)
        rep = extract_fringes(dist, (p_min, P0))
        assert len(rep.minima) >= 3
        # peak near the lower classical limit (caustic)
        peak_p = dist.p_grid[int(np.argmax(dist.density))]
        assert peak_p < p_min + 0.25 * (P0 - p_min)

    def test_recoil_sign_symmetry(self, engine):
        for k in (0.25, 0.6, 1.0):
            a = engine.spectrum(k).density
            b = engine.spectrum(-k).density
            assert np.max(np.abs(a - b)) <= 1e-10 * a.max()

    def test_forbidden_region_suppressed(self, engine):
        dist = engine.spectrum(0.0)
        tail = dist.density[dist.p_grid >= 3.0]
        assert tail.max() <= 1e-6 * dist.density.max()

    def test_triangles_are_fringeless(self, engine):
        # between the lines p0 -+ k only one classical path exists
        k = 0.8
        dist = engine.spectrum(k).normalized()
        _, lo, hi = classical_boundaries(P0, CFG, k)
        inset = 3.0 * CFG.kappa
        rep = extract_fringes(dist, (lo + inset, hi - inset))
        prominent = [
            m for m, v in zip(rep.minima, rep.minima_values)
            if v < dist.density.max() * 0.999
        ]
        assert len(rep.minima) == 0 or len(prominent) == 0

    def test_fringe_count_matches_semiclassics(self, engine):
        dist = engine.spectrum(0.0).normalized()
        p_min, _, _ = classical_boundaries(P0, CFG, 0.0)
        rep = extract_fringes(dist, (p_min, P0))
        predicted = predicted_fringe_momenta(P0, CFG, 0.0)
        assert abs(len(rep.minima) - len(predicted)) <= 1

    def test_mass_balance(self, engine):
        k = 0.5
        dist = engine.spectrum(k).normalized()
        p_min, _, _ = classical_boundaries(P0, CFG, k)
        lo = p_min - 3.0 * CFG.kappa
        hi = P0 + abs(k) + 3.0 * CFG.kappa
        mask = (dist.p_grid >= lo) & (dist.p_grid <= hi)
        inside = np.trapezoid(dist.density[mask], dist.p_grid[mask])
        assert inside >= 0.99

    def test_averaged_reduces_to_k0_for_point_recoil(self, engine):
        none = engine.averaged(recoil=RecoilModel(RecoilKind.NONE), k_nodes=1)
        k0 = engine.spectrum(0.0).normalized()
        assert np.max(np.abs(none.density - k0.density)) < 1e-12 * k0.density.max()

    def test_averaged_minima_near_k0_minima(self, engine):
        avg = engine.averaged()
        k0 = engine.spectrum(0.0).normalized()
        p_min, _, _ = classical_boundaries(P0, CFG, 0.0)
        rep_avg = extract_fringes(avg, (p_min, P0))
        rep_k0 = extract_fringes(k0, (p_min, P0))
        spacing = rep_k0.mean_spacing
        for m in rep_avg.minima:
            assert np.min(np.abs(rep_k0.minima - m)) < 0.5 * spacing

    def test_k_node_convergence_from_default(self, engine):
        a = engine.averaged(k_nodes=41)
        b = engine.averaged(k_nodes=81)
        assert np.max(np.abs(a.density - b.density)) < 1e-4

    def test_dipole_averaging_also_keeps_fringes(self, engine):
        avg = engine.averaged(recoil=RecoilModel(RecoilKind.DIPOLE))
        p_min, _, _ = classical_boundaries(P0, CFG, 0.0)
        rep = extract_fringes(avg, (p_min, P0))
        assert len(rep.minima) >= 3


class TestNumericsRobustness:
    def test_window_growth_changes_little(self, engine):
        base = engine.averaged()
        grown = OverlapEngine(
            P0, CFG, OverlapConfig.auto(P0, CFG, refine=1.5)
        ).averaged()
        assert np.max(np.abs(base.density - grown.density)) < 1e-5

    def test_z_grid_doubling_changes_little(self, engine):
        oc = engine.oc
        doubled = OverlapEngine(
            P0, CFG,
            OverlapConfig(oc.z_min, oc.z_max, 2 * oc.n_z, oc.p_grid,
                          oc.recoil, oc.k_nodes),
        ).averaged()
        base = engine.averaged()
        assert np.max(np.abs(base.density - doubled.density)) < 1e-3

    def test_window_too_small_raises(self):
        # legal per the coarse invariants but too short for the tail bound:
        # force z_max barely past the invariant edge with a huge p window
        oc = OverlapConfig.auto(P0, CFG)
        squeezed = OverlapConfig(
            oc.z_min, oc.z_max * 0.62, int(oc.n_z * 0.7), oc.p_grid,
            oc.recoil, oc.k_nodes,
        )
        if squeezed.validate(P0, CFG):
            pytest.skip("window invariants already catch this configuration")
        with pytest.raises(WindowTooSmallError):
            OverlapEngine(P0, CFG, squeezed).spectrum(0.0)


def test_functional_wrappers():
    oc = OverlapConfig.auto(P0, CFG, p_grid=np.linspace(0.9, 3.1, 160))
    d1 = overlap_spectrum(P0, CFG, 0.0, oc)
    assert d1.norm_convention is NormConvention.RAW
    d2 = averaged_spectrum(P0, CFG, oc)
    assert d2.norm_convention is NormConvention.UNIT_INTEGRAL
    assert d2.integral() == pytest.approx(1.0, abs=1e-9)


def test_engine_rejects_bad_config():
    oc = OverlapConfig.auto(P0, CFG)
    bad = OverlapConfig(oc.z_min, oc.z_max, oc.n_z,
                        np.linspace(3.0, 0.5, 100))
    with pytest.raises(ValidationError):
        OverlapEngine(P0, CFG, bad)
