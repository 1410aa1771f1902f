import math

import numpy as np
import pytest

from ewraman.analysis import (
    FringeReport,
    GridMismatchError,
    compare_routes,
    extract_fringes,
    smooth_density,
)
from ewraman.core import MomentumDistribution, NormConvention


def cosine_fixture(period=0.25, n=900, phase=0.0):
    p = np.linspace(1.0, 3.0, n)
    dens = 1.0 + 0.6 * np.cos(2.0 * math.pi * (p - phase) / period)
    return MomentumDistribution(p, dens)


class TestExtractFringes:
    def test_cosine_spacing_recovered(self):
        period = 0.25
        dist = cosine_fixture(period)
        rep = extract_fringes(dist)
        step = float(np.diff(dist.p_grid).mean())
        assert rep.mean_spacing == pytest.approx(period, abs=step)

    def test_cosine_visibility(self):
        rep = extract_fringes(cosine_fixture())
        assert rep.visibility == pytest.approx(0.6, abs=1e-3)

    def test_extrema_interleave(self):
        rep = extract_fringes(cosine_fixture())
        merged = np.sort(np.concatenate([rep.minima, rep.maxima]))
        kinds = [
            ("min" if m in rep.minima else "max") for m in merged
        ]
        assert all(a != b for a, b in zip(kinds, kinds[1:]))

    def test_monotone_density_gives_empty_report(self):
        p = np.linspace(0.0, 1.0, 200)
        rep = extract_fringes(MomentumDistribution(p, np.exp(3.0 * p)))
        assert rep.is_empty()
        assert len(rep.minima) == 0 and len(rep.maxima) == 0
        assert math.isnan(rep.mean_spacing) and math.isnan(rep.visibility)

    def test_rescaling_invariance(self):
        dist = cosine_fixture()
        rep_a = extract_fringes(dist)
        rep_b = extract_fringes(
            MomentumDistribution(dist.p_grid, 137.0 * dist.density)
        )
        assert np.allclose(rep_a.minima, rep_b.minima, atol=0.0)
        assert rep_a.visibility == pytest.approx(rep_b.visibility, rel=1e-14)

    def test_low_prominence_ripple_discarded(self):
        p = np.linspace(0.0, 1.0, 1000)
        dens = np.exp(-((p - 0.5) ** 2) * 40.0) + 1e-5 * np.cos(200.0 * p)
        rep = extract_fringes(MomentumDistribution(p, dens + 2e-5))
        assert len(rep.maxima) == 1  # just the hump

    def test_quadratic_refinement_beats_grid(self):
        # coarse grid: the refined maximum should land closer than half a step
        period = 0.5
        dist = cosine_fixture(period, n=60, phase=0.123)
        rep = extract_fringes(dist)
        step = float(np.diff(dist.p_grid).mean())
        true_maxima = [0.123 + period * n for n in range(2, 6)]
        for m in rep.maxima:
            assert min(abs(m - t) for t in true_maxima) < 0.5 * step

    def test_region_restriction(self):
        dist = cosine_fixture()
        rep = extract_fringes(dist, (1.4, 2.2))
        assert np.all(rep.minima >= 1.4) and np.all(rep.minima <= 2.2)
        with pytest.raises(ValueError):
            extract_fringes(dist, (2.9999, 3.0))

    def test_report_shape(self):
        rep = extract_fringes(cosine_fixture())
        assert isinstance(rep, FringeReport)
        assert rep.n_fringes == len(rep.minima)
        assert 0.0 <= rep.visibility <= 1.0


class TestSmoothing:
    def test_smoothing_preserves_minima_positions(self):
        dist = cosine_fixture(0.25)
        rep_raw = extract_fringes(dist)
        rep_smooth = extract_fringes(smooth_density(dist, 1.0))
        step = float(np.diff(dist.p_grid).mean())
        for a, b in zip(rep_raw.minima, rep_smooth.minima):
            assert abs(a - b) < step


class TestCompareRoutes:
    def unit(self, p, dens, meta=None):
        raw = MomentumDistribution(p, dens, meta=meta or {})
        return raw.normalized()

    def test_identical_distributions(self):
        a = self.unit(*self._fixture())
        l1, shift = compare_routes(a, a)
        assert l1 == pytest.approx(0.0, abs=1e-14)
        assert shift == pytest.approx(0.0, abs=1e-12)

    def _fixture(self):
        p = np.linspace(1.0, 3.0, 800)
        dens = 1.0 + 0.5 * np.cos(2.0 * math.pi * p / 0.3)
        return p, dens

    def test_one_grid_step_shift_detected(self):
        p, dens = self._fixture()
        step = p[1] - p[0]
        a = self.unit(p, dens)
        b = self.unit(p, 1.0 + 0.5 * np.cos(2.0 * math.pi * (p - step) / 0.3))
        l1, shift = compare_routes(a, b)
        assert shift == pytest.approx(step, abs=0.3 * step)

    def test_requires_unit_normalization(self):
        p, dens = self._fixture()
        with pytest.raises(ValueError):
            compare_routes(MomentumDistribution(p, dens), self.unit(p, dens))

    def test_grid_mismatch(self):
        p, dens = self._fixture()
        a = self.unit(p, dens)
        short = slice(0, 500)
        b = self.unit(p[short], dens[short])
        with pytest.raises(GridMismatchError):
            compare_routes(a, b)

    def test_resampling_idempotent_on_aligned_grids(self):
        p, dens = self._fixture()
        a = self.unit(p, dens)
        b = self.unit(p, dens.copy())
        l1, _ = compare_routes(a, b)
        assert l1 < 1e-10
