"""Spherical illumination rigs: continuous gradients or a discrete LED dome.

Condition intensities over the direction sphere: gradient K in {x, y, z}
has intensity (w_K + 1) / 2, its complement 1 minus that, and C is 1.
Directions are expressed in the photometric camera frame (the dome is
rigid relative to the photometric camera), which is what makes the
discretisation bias pose dependent.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from ..meshkit import primitives

_AXIS = {"X": 0, "Y": 1, "Z": 2}


def condition_gain(condition, dirs):
    """Illumination intensity of one gradient condition at unit directions."""
    dirs = np.asarray(dirs, dtype=np.float64)
    if condition == "C":
        return np.ones(dirs.shape[:-1])
    base = condition[0]
    if base not in _AXIS:
        raise ValidationError(f"unknown condition {condition!r}")
    g = (dirs[..., _AXIS[base]] + 1.0) / 2.0
    return 1.0 - g if condition.endswith("B") else g


def led_dome_directions(count=41):
    """Deterministic LED layout from an icosahedral geodesic subdivision.

    A once-subdivided icosphere has 42 vertices; the bottom-most one is
    dropped (a physical dome has a floor opening), leaving 41 unit
    directions ordered by construction index.
    """
    sphere = primitives.icosphere(1)
    dirs = sphere.vertices / np.linalg.norm(sphere.vertices, axis=1, keepdims=True)
    if count > len(dirs):
        raise ValidationError(f"LED layout supports at most {len(dirs)} directions")
    drop = int(np.argmin(dirs[:, 1]))
    keep = [i for i in range(len(dirs)) if i != drop][:count]
    return dirs[keep]


@dataclass
class LightRig:
    """Either an ideal continuous-gradient sphere or a discrete LED dome."""

    mode: str = "continuous"                      # 'continuous' | 'discrete'
    led_directions: np.ndarray = None
    dome_radius: float = 0.9                      # 1.8 m diameter dome

    def __post_init__(self):
        if self.mode not in ("continuous", "discrete"):
            raise ValidationError(f"unknown rig mode {self.mode!r}")
        if self.mode == "discrete":
            if self.led_directions is None:
                self.led_directions = led_dome_directions(41)
            self.led_directions = np.asarray(self.led_directions, dtype=np.float64)
            norms = np.linalg.norm(self.led_directions, axis=1)
            if np.abs(norms - 1.0).max() > 1e-9:
                raise ValidationError("LED directions must be unit length")

    @staticmethod
    def continuous():
        return LightRig(mode="continuous")

    @staticmethod
    def led41():
        return LightRig(mode="discrete", led_directions=led_dome_directions(41))

    # -- shading gains (all in the camera frame) ----------------------------

    def lambertian_gain(self, condition, normals):
        """Cosine-weighted illumination integral, normalized so C gives 1
        for the continuous rig.

        Continuous closed form: the integral of w over the hemisphere
        around n is (2 pi / 3) n, so gradient K yields n_K / 3 + 1/2.
        """
        n = np.asarray(normals, dtype=np.float64)
        if self.mode == "continuous":
            if condition == "C":
                return np.ones(n.shape[:-1])
            base = condition[0]
            g = n[..., _AXIS[base]] / 3.0 + 0.5
            return 1.0 - g if condition.endswith("B") else g
        cos = n @ self.led_directions.T
        np.clip(cos, 0.0, None, out=cos)
        gains = condition_gain(condition, self.led_directions)
        solid_angle = 4.0 / len(self.led_directions)  # 4 pi / K, over pi
        return (cos * gains).sum(axis=-1) * solid_angle

    def specular_gain(self, condition, reflections, roughness):
        """Lobe-averaged illumination around mirror directions, normalized
        so C gives 1.

        Continuous rigs evaluate the condition at the reflection direction
        (ideal mirror); discrete rigs average the LEDs with Beckmann
        weights about the reflection.
        """
        r = np.asarray(reflections, dtype=np.float64)
        if self.mode == "continuous":
            return condition_gain(condition, r)
        cos = np.clip(r @ self.led_directions.T, -1.0, 1.0)
        m2 = max(roughness, 1e-3) ** 2
        w = np.exp((cos - 1.0) / m2)  # exp(-theta^2/(2 m^2))-like lobe about r
        gains = condition_gain(condition, self.led_directions)
        denom = w.sum(axis=-1)
        denom[denom <= 0] = 1.0
        return (w * gains).sum(axis=-1) / denom
