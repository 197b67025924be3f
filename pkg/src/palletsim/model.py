"""Domain types shared by the layout, slotting and simulation modules.

Units: lengths in millimetres, times in seconds, unless a name says otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

COLLAR_HEIGHT_MM = 200
MAX_COLLARS = 6


class ConfigError(ValueError):
    """Invalid configuration: bad fractions, impossible geometry, unknown keys."""


class SkuClass(str, Enum):
    A = "A"
    B = "B"
    C = "C"


CLASSES = (SkuClass.A, SkuClass.B, SkuClass.C)


class PalletKind(str, Enum):
    EURO_FULL = "EuroFull"
    EURO_HALF = "EuroHalf"


@dataclass(frozen=True)
class PalletFormat:
    kind: PalletKind
    length_mm: int
    width_mm: int


EURO_FULL = PalletFormat(PalletKind.EURO_FULL, 1200, 800)
EURO_HALF = PalletFormat(PalletKind.EURO_HALF, 800, 600)
FORMATS = {PalletKind.EURO_FULL: EURO_FULL, PalletKind.EURO_HALF: EURO_HALF}


def pallet_height(collars: int) -> int:
    """Load height in mm of a pallet carrying ``collars`` stacked collars."""
    if isinstance(collars, bool) or int(collars) != collars:
        raise ValueError(f"collar count must be an integer, got {collars!r}")
    if not 1 <= collars <= MAX_COLLARS:
        raise ValueError(f"collar count {collars} outside 1..{MAX_COLLARS}")
    return int(collars) * COLLAR_HEIGHT_MM


@dataclass(slots=True)
class Pallet:
    id: int
    sku: int
    sku_class: SkuClass
    format: PalletFormat
    collars: int
    arrival_time: float
    stored_time: Optional[float] = None
    slot: Optional[int] = None

    def __post_init__(self):
        pallet_height(self.collars)
        if self.stored_time is not None and self.stored_time < self.arrival_time:
            raise ValueError("stored_time precedes arrival_time")

    @property
    def height_mm(self) -> int:
        return self.collars * COLLAR_HEIGHT_MM


@dataclass(slots=True)
class Order:
    id: int
    wave_index: int
    release_time: float
    lines: list  # list of (sku, quantity)
    completion_time: Optional[float] = None

    def __post_init__(self):
        for sku, qty in self.lines:
            if qty < 1:
                raise ValueError(f"order {self.id}: line for sku {sku} has quantity {qty}")

    @property
    def n_pallets(self) -> int:
        return sum(q for _, q in self.lines)


@dataclass(frozen=True)
class Sku:
    id: int
    sku_class: SkuClass
    demand_weight: float


def _check_split(split: Sequence[float], name: str = "split") -> tuple:
    split = tuple(float(s) for s in split)
    if len(split) != 3:
        raise ConfigError(f"{name} needs three fractions (A, B, C), got {len(split)}")
    if any(s < 0 for s in split):
        raise ConfigError(f"{name} has a negative fraction: {split}")
    if abs(sum(split) - 1.0) > 1e-9:
        raise ConfigError(f"{name} must sum to 1, got {sum(split)!r}")
    return split


@dataclass(frozen=True)
class SkuCatalog:
    skus: tuple
    class_split: tuple = (0.80, 0.15, 0.05)
    # derived lookup arrays, filled in __post_init__
    weights: np.ndarray = field(init=False, repr=False, compare=False)
    classes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "class_split", _check_split(self.class_split, "class_split"))
        ids = [s.id for s in self.skus]
        if ids != list(range(len(ids))):
            raise ValueError("sku ids must be 0..n-1 in order")
        object.__setattr__(self, "weights", np.array([s.demand_weight for s in self.skus]))
        code = {SkuClass.A: 0, SkuClass.B: 1, SkuClass.C: 2}
        object.__setattr__(self, "classes", np.array([code[s.sku_class] for s in self.skus]))

    def __len__(self):
        return len(self.skus)

    def members(self, sku_class: SkuClass) -> list:
        return [s.id for s in self.skus if s.sku_class == sku_class]


def draw_sku_class(u: float, split: Sequence[float] = (0.80, 0.15, 0.05)) -> SkuClass:
    """Map a uniform sample to a demand class by inverse CDF over ``split``."""
    if not 0.0 <= u < 1.0:
        raise ValueError(f"uniform sample {u!r} outside [0, 1)")
    a, b, _ = split
    if u < a:
        return SkuClass.A
    # rounded so that 0.80 + 0.15 lands on 0.95, not 0.9500000000000001
    if u < round(a + b, 12):
        return SkuClass.B
    return SkuClass.C


def build_catalog(
    n_skus: int = 120,
    class_share_of_skus: Sequence[float] = (0.20, 0.30, 0.50),
    demand_share_of_volume: Sequence[float] = (0.80, 0.15, 0.05),
    rng: Optional[np.random.Generator] = None,
) -> SkuCatalog:
    """Build a catalogue where each class carries its share of demand volume.

    Class A gets ceil(n * share_A) SKUs, B gets ceil(n * share_B), C the
    remainder. Weights are equal inside a class. ``rng`` shuffles which SKU
    ids land in which class; without it ids are assigned A, B, C in order.
    """
    sku_share = _check_split(class_share_of_skus, "class_share_of_skus")
    vol_share = _check_split(demand_share_of_volume, "demand_share_of_volume")
    if n_skus < 3:
        raise ConfigError(f"n_skus must be at least 3, got {n_skus}")
    # round() guards against 0.3 * 100 == 30.000000000000004
    n_a = math.ceil(round(n_skus * sku_share[0], 9))
    n_b = math.ceil(round(n_skus * sku_share[1], 9))
    n_c = n_skus - n_a - n_b
    if n_c < 0:
        raise ConfigError(f"class shares {sku_share} overflow {n_skus} SKUs")
    counts = (n_a, n_b, n_c)
    for cls, n, vol in zip(CLASSES, counts, vol_share):
        if n == 0 and vol > 0:
            raise ConfigError(f"class {cls.value} has no SKUs but demand share {vol}")

    labels = [c for c, n in zip(CLASSES, counts) for _ in range(n)]
    if rng is not None:
        order = rng.permutation(n_skus)
        labels = [labels[i] for i in order]
    per_sku = {c: (v / n if n else 0.0) for c, n, v in zip(CLASSES, counts, vol_share)}
    skus = tuple(Sku(i, c, per_sku[c]) for i, c in enumerate(labels))
    return SkuCatalog(skus=skus, class_split=vol_share)
