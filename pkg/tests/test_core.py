import math

import numpy as np
import pytest

from ewraman.core import (
    IncidentState,
    MomentumDistribution,
    NormConvention,
    PotentialConfig,
    RecoilKind,
    RecoilModel,
    ValidationError,
    recoil_nodes,
    recoil_weight,
)


def test_potential_config_invariants():
    cfg = PotentialConfig(1.0, 0.125, 0.2)
    assert cfg.v2 == pytest.approx(0.2, abs=0.0)
    with pytest.raises(ValidationError):
        PotentialConfig(1.0, 0.125, 1.3)
    with pytest.raises(ValidationError):
        PotentialConfig(-1.0, 0.125, 0.2)
    # all violations reported at once
    try:
        PotentialConfig(-1.0, -2.0, 1.5)
    except ValidationError as exc:
        assert len(exc.violations) == 3


def test_turning_point():
    cfg = PotentialConfig(1.0, 0.125, 0.2)
    st = IncidentState(2.0)
    z_t = st.turning_point(cfg)
    assert cfg.potential(z_t, state=1) == pytest.approx(st.energy, rel=1e-12)


def test_recoil_weight_isotropic_constant():
    model = RecoilModel(RecoilKind.ISOTROPIC)
    assert recoil_weight(model, 0.3) == pytest.approx(0.5, abs=0.0)
    assert recoil_weight(model, -0.99) == pytest.approx(0.5, abs=0.0)
    assert recoil_weight(model, 1.5) == 0.0


def test_recoil_weight_dipole_values():
    model = RecoilModel(RecoilKind.DIPOLE)
    # 3/16 * (3 - 0) at k = 0
    assert recoil_weight(model, 0.0) == pytest.approx(9.0 / 16.0, abs=1e-15)
    # analytic integral over [-1, 1] is exactly 1
    k = np.linspace(-1.0, 1.0, 20001)
    total = np.trapezoid(recoil_weight(model, k), k)
    assert total == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("kind", [RecoilKind.ISOTROPIC, RecoilKind.DIPOLE])
def test_recoil_weight_even(kind):
    model = RecoilModel(kind)
    k = np.linspace(0.0, 1.0, 101)
    assert np.array_equal(recoil_weight(model, k), recoil_weight(model, -k))


def test_recoil_weight_zero_outside_support():
    for kind in (RecoilKind.ISOTROPIC, RecoilKind.DIPOLE):
        w = recoil_weight(RecoilModel(kind), np.array([-2.0, 1.0001, 7.0]))
        assert np.all(w == 0.0)


def test_recoil_nodes_none_single_node():
    nodes, weights = recoil_nodes(RecoilModel(RecoilKind.NONE), 1)
    assert nodes.tolist() == [0.0]
    assert weights.tolist() == [1.0]
    # any odd n still collapses to the point mass
    nodes, weights = recoil_nodes(RecoilModel(RecoilKind.NONE), 21)
    assert nodes.tolist() == [0.0]


def test_recoil_nodes_three_point_symmetry():
    nodes, weights = recoil_nodes(RecoilModel(RecoilKind.ISOTROPIC), 3)
    assert nodes[1] == 0.0
    assert nodes[0] == pytest.approx(-nodes[2], abs=0.0)
    assert weights[0] == pytest.approx(weights[2], abs=0.0)
    assert weights.sum() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("kind", [RecoilKind.ISOTROPIC, RecoilKind.DIPOLE])
@pytest.mark.parametrize("n", [3, 9, 41])
def test_recoil_nodes_normalized(kind, n):
    nodes, weights = recoil_nodes(RecoilModel(kind), n)
    assert weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(nodes) > 0)
    assert 0.0 in nodes
    # symmetric under k -> -k
    assert np.allclose(nodes, -nodes[::-1], atol=0.0)
    assert np.allclose(weights, weights[::-1], rtol=1e-15)


def test_recoil_nodes_rejects_even_n():
    with pytest.raises(ValueError):
        recoil_nodes(RecoilModel(), 8)
    with pytest.raises(ValueError):
        recoil_nodes(RecoilModel(), 0)


def test_momentum_distribution_validation():
    p = np.linspace(0.0, 1.0, 11)
    with pytest.raises(ValidationError):
        MomentumDistribution(p, -np.ones_like(p))
    with pytest.raises(ValidationError):
        MomentumDistribution(p[::-1], np.ones_like(p))
    with pytest.raises(ValidationError):
        MomentumDistribution(p, np.ones(5))


def test_momentum_distribution_normalization():
    p = np.linspace(0.0, 2.0, 101)
    d = np.exp(-((p - 1.0) ** 2) * 30.0)
    dist = MomentumDistribution(p, d).normalized()
    assert dist.norm_convention is NormConvention.UNIT_INTEGRAL
    assert dist.integral() == pytest.approx(1.0, abs=1e-12)
    # declared unit-integral must actually integrate to 1
    with pytest.raises(ValidationError):
        MomentumDistribution(p, d, NormConvention.UNIT_INTEGRAL)


def test_units_are_natural():
    from ewraman.core import UNITS

    assert UNITS.hbar == 1.0 and UNITS.mass == 1.0 and UNITS.k0 == 1.0
    assert "momentum" in UNITS.describe()
