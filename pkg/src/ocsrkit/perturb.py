"""Seeded image degradations for building perturbed benchmark variants.

The default suite, ``perturb-v1``, applies seven operators in a fixed order:

1. ``gaussian_noise``   additive noise, sigma up to 25 grey levels
2. ``gaussian_blur``    blur, sigma up to 2 px
3. ``salt_pepper``      up to 5% of pixels forced to black or white
4. ``contrast``         contrast loss up to 50% plus a brightness shift up to 40 levels
5. ``rotation``         rotation up to 5 degrees about the centre
6. ``resample``         downscale to as little as 25% and back up
7. ``morphology``       line thinning or thickening by up to 1.5 px

Each operator draws its random numbers from its own stream, derived from
the global seed, the record id and the operator's position. Draws never
depend on strength, so a higher strength applies the same random pattern
more forcefully. This keeps outputs comparable across strengths.
An operator at strength 0 is skipped entirely, which makes an all-zero
spec an exact identity.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from PIL import Image
from scipy import ndimage

from .depict import RasterImage

SUITE_VERSION = "perturb-v1"
OPERATOR_ORDER = (
    "gaussian_noise",
    "gaussian_blur",
    "salt_pepper",
    "contrast",
    "rotation",
    "resample",
    "morphology",
)
PRESETS = ("clef_p", "uob_p", "uspto_p", "staker_p")


@dataclass(frozen=True)
class OperatorSpec:
    name: str
    strength: float

    def __post_init__(self):
        if self.name not in _OPERATORS:
            raise ValueError(f"unknown perturbation operator {self.name!r}")
        if not 0.0 <= self.strength <= 1.0:
            raise ValueError(f"strength for {self.name} must lie in [0, 1]")


@dataclass(frozen=True)
class PerturbSpec:
    """An ordered operator list plus the seed every per-record seed derives from."""

    operators: tuple[OperatorSpec, ...]
    seed: int = 0
    name: str = "custom"
    version: str = SUITE_VERSION

    @classmethod
    def suite(cls, strength: float = 0.5, seed: int = 0, name: str = "custom") -> "PerturbSpec":
        """The full ``perturb-v1`` operator list at a uniform strength."""
        return cls(tuple(OperatorSpec(op, strength) for op in OPERATOR_ORDER), seed, name)

    @classmethod
    def preset(cls, name: str, seed: int = 0, strength: float = 0.5) -> "PerturbSpec":
        if name not in PRESETS:
            raise ValueError(f"unknown preset {name!r}; expected one of {list(PRESETS)}")
        return cls.suite(strength, seed, name)

    def with_strength(self, op: str, strength: float) -> "PerturbSpec":
        if all(o.name != op for o in self.operators):
            raise ValueError(f"operator {op!r} is not part of this spec")
        ops = tuple(OperatorSpec(o.name, strength) if o.name == op else o for o in self.operators)
        return replace(self, operators=ops)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "version": self.version,
            "seed": self.seed,
            "operators": [{"name": o.name, "strength": o.strength} for o in self.operators],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "PerturbSpec":
        ops = tuple(OperatorSpec(o["name"], float(o["strength"])) for o in doc["operators"])
        return cls(ops, int(doc.get("seed", 0)), doc.get("name", "custom"), doc.get("version", SUITE_VERSION))

    @classmethod
    def from_json(cls, text: str) -> "PerturbSpec":
        return cls.from_dict(json.loads(text))


def record_seed(seed: int, record_id: str) -> int:
    """64-bit per-record seed: SHA-256 of the global seed and the record id."""
    digest = hashlib.sha256(f"{seed}\x1f{record_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


# --------------------------------------------------------------------------
# operators: (float image in [0, 255], strength, rng) -> float image


def _noise(x: np.ndarray, s: float, rng: np.random.Generator) -> np.ndarray:
    return x + rng.standard_normal(x.shape) * (25.0 * s)


def _blur(x: np.ndarray, s: float, rng: np.random.Generator) -> np.ndarray:
    sigma = 2.0 * s
    if x.ndim == 3:
        return ndimage.gaussian_filter(x, sigma=(sigma, sigma, 0), mode="nearest")
    return ndimage.gaussian_filter(x, sigma=sigma, mode="nearest")


def _salt_pepper(x: np.ndarray, s: float, rng: np.random.Generator) -> np.ndarray:
    u = rng.random(x.shape[:2])
    frac = 0.05 * s
    out = x.copy()
    out[u < frac / 2] = 0.0
    out[u > 1.0 - frac / 2] = 255.0
    return out


def _contrast(x: np.ndarray, s: float, rng: np.random.Generator) -> np.ndarray:
    amount, shift = rng.uniform(0.5, 1.0), rng.uniform(-1.0, 1.0)
    gain = 1.0 - 0.5 * s * amount
    return (x - 127.5) * gain + 127.5 + 40.0 * s * shift


def _rotation(x: np.ndarray, s: float, rng: np.random.Generator) -> np.ndarray:
    u = rng.uniform(0.5, 1.0) * (1.0 if rng.random() < 0.5 else -1.0)
    angle = 5.0 * s * u
    axes = (1, 0)
    return ndimage.rotate(x, angle, axes=axes, reshape=False, order=1, mode="constant", cval=255.0)


def _resample(x: np.ndarray, s: float, rng: np.random.Generator) -> np.ndarray:
    h, w = x.shape[:2]
    factor = 1.0 - 0.75 * s
    small = (max(int(round(w * factor)), 4), max(int(round(h * factor)), 4))
    img = Image.fromarray(np.clip(np.round(x), 0, 255).astype(np.uint8))
    img = img.resize(small, Image.BILINEAR).resize((w, h), Image.BILINEAR)
    return np.asarray(img, dtype=np.float64)


def _morph_step(x: np.ndarray, thicken: bool) -> np.ndarray:
    size = (3, 3, 1) if x.ndim == 3 else (3, 3)
    # dark ink on white: a minimum filter spreads ink, a maximum filter erodes it
    return ndimage.minimum_filter(x, size=size) if thicken else ndimage.maximum_filter(x, size=size)


def _morphology(x: np.ndarray, s: float, rng: np.random.Generator) -> np.ndarray:
    thicken = bool(rng.random() < 0.5)
    radius = 1.5 * s
    whole = int(np.floor(radius))
    frac = radius - whole
    lo = x
    for _ in range(whole):
        lo = _morph_step(lo, thicken)
    if frac == 0.0:
        return lo
    hi = _morph_step(lo, thicken)
    return (1.0 - frac) * lo + frac * hi


_OPERATORS: dict[str, Callable[[np.ndarray, float, np.random.Generator], np.ndarray]] = {
    "gaussian_noise": _noise,
    "gaussian_blur": _blur,
    "salt_pepper": _salt_pepper,
    "contrast": _contrast,
    "rotation": _rotation,
    "resample": _resample,
    "morphology": _morphology,
}


def perturb(img: RasterImage, spec: PerturbSpec, record_id: str) -> RasterImage:
    """Apply ``spec`` to ``img``; output has the same size, mode and provenance."""
    if all(op.strength == 0.0 for op in spec.operators):
        return RasterImage(img.pixels.copy(), img.provenance)
    base = record_seed(spec.seed, record_id)
    x = img.pixels.astype(np.float64)
    for position, op in enumerate(spec.operators):
        if op.strength == 0.0:
            continue
        rng = np.random.default_rng(np.random.SeedSequence(base, spawn_key=(position,)))
        x = np.clip(_OPERATORS[op.name](x, op.strength, rng), 0.0, 255.0)
    pixels = np.round(x).astype(np.uint8)
    return RasterImage(pixels, img.provenance)


__all__ = [
    "OPERATOR_ORDER",
    "OperatorSpec",
    "PRESETS",
    "PerturbSpec",
    "SUITE_VERSION",
    "perturb",
    "record_seed",
]
