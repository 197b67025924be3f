import numpy as np
import pytest
from hypothesis import given, strategies as st

from palletsim.model import (
    EURO_FULL, EURO_HALF, ConfigError, Order, Pallet, SkuClass, build_catalog,
    draw_sku_class, pallet_height,
)

SPLIT = (0.80, 0.15, 0.05)


def test_pallet_formats():
    assert (EURO_FULL.length_mm, EURO_FULL.width_mm) == (1200, 800)
    assert (EURO_HALF.length_mm, EURO_HALF.width_mm) == (800, 600)


@pytest.mark.parametrize("collars,height", [(1, 200), (6, 1200), (3, 600)])
def test_pallet_height(collars, height):
    assert pallet_height(collars) == height


@pytest.mark.parametrize("bad", [0, 7, -1, 2.5])
def test_pallet_height_rejects_out_of_range(bad):
    with pytest.raises(ValueError):
        pallet_height(bad)


def test_pallet_height_strictly_increasing():
    h = [pallet_height(c) for c in range(1, 7)]
    assert all(a < b for a, b in zip(h, h[1:]))


def test_pallet_validates_collars_and_times():
    p = Pallet(0, 1, SkuClass.A, EURO_FULL, 4, 10.0)
    assert p.height_mm == 800
    with pytest.raises(ValueError):
        Pallet(0, 1, SkuClass.A, EURO_FULL, 0, 10.0)
    with pytest.raises(ValueError):
        Pallet(0, 1, SkuClass.A, EURO_FULL, 2, 10.0, stored_time=5.0)


def test_order_line_quantity_positive():
    assert Order(0, 0, 0.0, [(1, 2), (3, 1)]).n_pallets == 3
    with pytest.raises(ValueError):
        Order(0, 0, 0.0, [(1, 0)])


@pytest.mark.parametrize("u,cls", [(0.0, SkuClass.A), (0.90, SkuClass.B), (0.99, SkuClass.C),
                                   (0.80, SkuClass.B), (0.95, SkuClass.C)])
def test_draw_sku_class(u, cls):
    assert draw_sku_class(u, SPLIT) is cls


@pytest.mark.parametrize("u", [-0.1, 1.0, 1.5])
def test_draw_sku_class_domain(u):
    with pytest.raises(ValueError):
        draw_sku_class(u, SPLIT)


def test_class_frequencies_over_a_million_draws():
    u = np.random.default_rng(3).random(1_000_000)
    counts = {c: 0 for c in SkuClass}
    # vectorised equivalent of draw_sku_class, spot-checked against it below
    edges = np.round(np.cumsum(SPLIT), 12)
    codes = np.searchsorted(edges, u, side="right")
    for k, c in enumerate(SkuClass):
        counts[c] = np.count_nonzero(codes == k)
    for x in u[:2000]:
        assert draw_sku_class(float(x), SPLIT) is list(SkuClass)[np.searchsorted(edges, x, side="right")]
    freq = np.array([counts[c] for c in SkuClass]) / u.size
    assert np.all(np.abs(freq - SPLIT) < 0.005)


def test_catalog_pareto_example():
    cat = build_catalog(100, (0.20, 0.30, 0.50), SPLIT)
    a = cat.members(SkuClass.A)
    assert len(a) == 20
    assert cat.weights[a].sum() == pytest.approx(0.80, abs=1e-12)


def test_catalog_symmetric_weights():
    cat = build_catalog(3, (1 / 3, 1 / 3, 1 / 3), (1 / 3, 1 / 3, 1 / 3))
    assert np.allclose(cat.weights, 1 / 3)


def test_catalog_zero_skus_with_demand_is_error():
    with pytest.raises(ConfigError):
        build_catalog(10, (0.5, 0.5, 0.0), SPLIT)


def test_catalog_rng_is_deterministic():
    a = build_catalog(120, rng=np.random.default_rng(5))
    b = build_catalog(120, rng=np.random.default_rng(5))
    assert a == b
    assert np.array_equal(a.classes, b.classes)


@given(st.integers(40, 400), st.floats(0.05, 0.6), st.floats(0.05, 0.3))
def test_catalog_weights_sum_to_one(n, sa, sb):
    shares = (sa, sb, 1 - sa - sb)
    cat = build_catalog(n, shares, SPLIT)
    assert abs(cat.weights.sum() - 1.0) < 1e-9
    # every class keeps its share of volume
    for k, c in enumerate(SkuClass):
        assert cat.weights[cat.members(c)].sum() == pytest.approx(SPLIT[k], abs=1e-9)


def test_catalog_rejects_class_left_without_skus():
    # 3 SKUs at 50/25/25 rounds up to 2 + 1, leaving C empty while it has demand
    with pytest.raises(ConfigError):
        build_catalog(3, (0.5, 0.25, 0.25), SPLIT)
