"""Overlap evaluation and synthetic phantoms.

The Dice similarity coefficient 2|A n B| / (|A| + |B|) measures spatial
agreement between two binary masks. Batch reports aggregate per-case values
into min / max / mean / sample standard deviation rows, percentages rendered
with two decimals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .volume import Mask, Volume, load_volume, mask_from_volume


def _as_binary(mask) -> np.ndarray:
    data = mask.data if isinstance(mask, Mask) else np.asarray(mask)
    return data != 0


def dice(a, b) -> float:
    """Dice coefficient of two masks; both empty counts as perfect agreement."""
    da, db = _as_binary(a), _as_binary(b)
    if da.shape != db.shape:
        raise ValueError(f"mask dims differ: {da.shape} vs {db.shape}")
    size_a = int(np.count_nonzero(da))
    size_b = int(np.count_nonzero(db))
    if size_a + size_b == 0:
        return 1.0
    overlap = int(np.count_nonzero(da & db))
    return 2.0 * overlap / (size_a + size_b)


@dataclass(frozen=True)
class Aggregates:
    min: float
    max: float
    mu: float
    sigma: float


def rater_stats(dsc_values) -> Aggregates:
    """min / max / mean / sample standard deviation (n-1); sigma of a single
    value is 0 by convention."""
    values = np.asarray(list(dsc_values), dtype=float)
    if values.size == 0:
        raise ValueError("empty value list")
    sigma = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return Aggregates(min=float(values.min()), max=float(values.max()),
                      mu=float(values.mean()), sigma=sigma)


@dataclass
class DiceReport:
    case_ids: list = field(default_factory=list)
    dsc_values: list = field(default_factory=list)
    errors: list = field(default_factory=list)   # (case_id, message)
    min: float = 0.0
    max: float = 0.0
    mu: float = 0.0
    sigma: float = 0.0

    @classmethod
    def from_cases(cls, case_ids, dsc_values, errors=()):
        report = cls(case_ids=list(case_ids), dsc_values=[float(v) for v in dsc_values],
                     errors=list(errors))
        if report.dsc_values:
            agg = rater_stats(report.dsc_values)
            report.min, report.max, report.mu, report.sigma = agg.min, agg.max, agg.mu, agg.sigma
        return report

    def to_records(self) -> list[dict]:
        """One record per case plus one aggregate record."""
        records = [{"case_id": cid, "dsc": val}
                   for cid, val in zip(self.case_ids, self.dsc_values)]
        records += [{"case_id": cid, "error": msg} for cid, msg in self.errors]
        records.append({"min": self.min, "max": self.max, "mu": self.mu, "sigma": self.sigma})
        return records

    def format_table(self) -> str:
        """Line-oriented report: per-case rows, then min/max/mu+-sigma rows."""
        lines = []
        for cid, val in zip(self.case_ids, self.dsc_values):
            lines.append(f"{cid}\t{val * 100:.2f}%")
        for cid, msg in self.errors:
            lines.append(f"{cid}\tERROR: {msg}")
        if self.dsc_values:
            lines.append(f"min\t{self.min * 100:.2f}%")
            lines.append(f"max\t{self.max * 100:.2f}%")
            lines.append(f"mu +- sigma\t{self.mu * 100:.2f} +- {self.sigma * 100:.2f}%")
        return "\n".join(lines) + "\n"


def _load_mask_file(path) -> Mask:
    return mask_from_volume(load_volume(path))


def compare_batch(pairs) -> DiceReport:
    """Dice per (path, path) pair; unreadable or mismatched cases become error
    entries and the batch continues."""
    case_ids, values, errors = [], [], []
    for i, (path_a, path_b) in enumerate(pairs):
        case_id = f"case{i + 1:02d}"
        try:
            mask_a = _load_mask_file(path_a)
            mask_b = _load_mask_file(path_b)
            values.append(dice(mask_a, mask_b))
            case_ids.append(case_id)
        except Exception as exc:
            errors.append((case_id, f"{path_a} vs {path_b}: {exc}"))
    return DiceReport.from_cases(case_ids, values, errors)


# ---------------------------------------------------------------------------
# Phantoms


@dataclass(frozen=True)
class PhantomSpec:
    dims: tuple[int, int, int] = (64, 64, 64)
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    shape: str = "ball"                       # "ball" or "ellipsoid"
    center_mm: tuple[float, float, float] | None = None   # None: volume center
    radius_mm: float = 15.0                   # ball
    semi_axes_mm: tuple[float, float, float] = (15.0, 15.0, 15.0)  # ellipsoid
    inside_value: float = 200.0
    outside_value: float = 50.0
    noise_sigma: float = 0.0

    def validate(self) -> None:
        if any(d < 1 for d in self.dims):
            raise ValueError("dims must be >= 1")
        if any(s <= 0 for s in self.spacing):
            raise ValueError("spacing must be > 0")
        if self.shape not in ("ball", "ellipsoid"):
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.shape == "ball" and self.radius_mm <= 0:
            raise ValueError("radius must be > 0")
        if self.shape == "ellipsoid" and any(a <= 0 for a in self.semi_axes_mm):
            raise ValueError("semi-axes must be > 0")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")

    def resolved_center(self) -> np.ndarray:
        if self.center_mm is not None:
            return np.asarray(self.center_mm, dtype=float)
        return (np.asarray(self.dims) - 1) * np.asarray(self.spacing) / 2.0


def generate_phantom(spec: PhantomSpec, rng_seed: int = 0) -> tuple[Volume, Mask]:
    """Noisy two-valued volume plus its exact indicator mask (voxel-center test)."""
    spec.validate()
    center = spec.resolved_center()
    spacing = np.asarray(spec.spacing)
    grids = np.indices(spec.dims).astype(float)
    coords = grids * spacing[:, None, None, None]
    offsets = coords - center[:, None, None, None]
    if spec.shape == "ball":
        inside = (offsets ** 2).sum(axis=0) <= spec.radius_mm ** 2
    else:
        axes = np.asarray(spec.semi_axes_mm)
        inside = ((offsets / axes[:, None, None, None]) ** 2).sum(axis=0) <= 1.0
    data = np.where(inside, spec.inside_value, spec.outside_value)
    if spec.noise_sigma > 0:
        rng = np.random.default_rng(rng_seed)
        data = data + rng.normal(0.0, spec.noise_sigma, size=data.shape)
    volume = Volume(dims=tuple(spec.dims), spacing=tuple(spec.spacing), origin=(0.0, 0.0, 0.0),
                    data=data.astype(np.float32), element_kind="f32")
    mask = Mask(dims=tuple(spec.dims), spacing=tuple(spec.spacing), origin=(0.0, 0.0, 0.0),
                data=inside.astype(np.uint8))
    return volume, mask


def analytic_ball_volume_mm3(radius_mm: float) -> float:
    return 4.0 / 3.0 * math.pi * radius_mm ** 3
