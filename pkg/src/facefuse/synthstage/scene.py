"""Synthetic scenes: analytic surfaces, materials, camera rigs."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError


def bump_field(dirs, frequency):
    """Smooth pole-free displacement pattern on the unit sphere."""
    d = np.asarray(dirs, dtype=np.float64)
    return (np.sin(frequency * d[..., 0])
            * np.sin(frequency * d[..., 1])
            * np.sin(frequency * d[..., 2]))


@dataclass
class Sphere:
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    radius: float = 1.0

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=np.float64)

    def implicit(self, pts):
        """Signed value, zero on the surface, positive outside."""
        return np.linalg.norm(pts - self.center, axis=-1) - self.radius

    def radial_bounds(self):
        return self.radius, self.radius

    def raycast(self, origins, dirs):
        """First intersection along rays; returns (t, hit mask)."""
        oc = origins - self.center
        b = np.einsum("...c,...c->...", oc, dirs)
        c = np.einsum("...c,...c->...", oc, oc) - self.radius ** 2
        disc = b * b - c
        hit = disc >= 0
        t = np.full(b.shape, np.inf)
        sq = np.sqrt(np.maximum(disc, 0.0))
        t0 = -b - sq
        t1 = -b + sq
        tt = np.where(t0 > 1e-9, t0, t1)
        good = hit & (tt > 1e-9)
        t[good] = tt[good]
        return t, good

    def normals(self, pts):
        d = pts - self.center
        return d / np.linalg.norm(d, axis=-1, keepdims=True)


@dataclass
class BumpySphere(Sphere):
    amplitude: float = 0.02   # fraction of the radius
    frequency: float = 8.0

    def target_radius(self, dirs):
        return self.radius * (1.0 + self.amplitude * bump_field(dirs, self.frequency))

    def implicit(self, pts):
        d = pts - self.center
        r = np.linalg.norm(d, axis=-1)
        safe = np.maximum(r, 1e-12)
        return r - self.target_radius(d / safe[..., None])

    def radial_bounds(self):
        return (self.radius * (1.0 - abs(self.amplitude)),
                self.radius * (1.0 + abs(self.amplitude)))

    def raycast(self, origins, dirs, samples=48, bisections=60):
        lo, hi = self.radial_bounds()
        outer = Sphere(self.center, hi * (1.0 + 1e-9))
        t_enter, hit = outer.raycast(origins, dirs)
        t = np.full(t_enter.shape, np.inf)
        if not hit.any():
            return t, hit
        o = origins if origins.ndim > 1 else np.broadcast_to(origins, dirs.shape)
        o = o[hit]
        d = dirs[hit]
        te = t_enter[hit]
        # march from the outer-sphere entry until the implicit goes negative
        oc = o - self.center
        bq = np.einsum("pc,pc->p", oc, d)
        perp_sq = np.einsum("pc,pc->p", oc, oc) - bq ** 2
        span = 2.0 * np.sqrt(np.maximum(hi * hi - perp_sq, 0.0))
        ts = te[:, None] + np.linspace(0.0, 1.0, samples)[None, :] * span[:, None]
        vals = self.implicit(o[:, None, :] + ts[..., None] * d[:, None, :])
        neg = vals < 0
        first = neg.argmax(axis=1)
        found = neg.any(axis=1)
        lo_t = np.where(first > 0, np.take_along_axis(ts, np.maximum(first - 1, 0)[:, None], 1)[:, 0], te)
        hi_t = np.take_along_axis(ts, first[:, None], 1)[:, 0]
        for _ in range(bisections):
            mid = 0.5 * (lo_t + hi_t)
            v = self.implicit(o + mid[:, None] * d)
            above = v > 0
            lo_t = np.where(above, mid, lo_t)
            hi_t = np.where(above, hi_t, mid)
        res = np.where(found, 0.5 * (lo_t + hi_t), np.inf)
        t[hit] = res
        hit2 = hit.copy()
        hit2[hit] = found
        return t, hit2

    def normals(self, pts, h=1e-6):
        grad = np.zeros_like(pts)
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            grad[..., k] = (self.implicit(pts + e) - self.implicit(pts - e)) / (2 * h)
        return grad / np.linalg.norm(grad, axis=-1, keepdims=True)


@dataclass
class MeshSurface:
    """Triangle-mesh surface; rendered by rasterization with smooth normals."""

    mesh: object

    def __post_init__(self):
        self._vnormals = self.mesh.vertex_normals()


@dataclass
class Material:
    diffuse: object = field(default_factory=lambda: np.array([0.6, 0.45, 0.38]))
    specular_albedo: float = 0.3
    roughness: float = 0.3
    ior: float = 1.45

    def __post_init__(self):
        if self.roughness <= 0:
            raise ValidationError("roughness must be positive")
        if self.specular_albedo < 0:
            raise ValidationError("albedos must be non-negative")

    def diffuse_at(self, pts):
        """Diffuse albedo at world points; pts is (..., 3)."""
        if callable(self.diffuse):
            return np.asarray(self.diffuse(pts), dtype=np.float64)
        rgb = np.asarray(self.diffuse, dtype=np.float64)
        return np.broadcast_to(rgb, pts.shape[:-1] + (3,)).copy()


@dataclass
class Scene:
    surface: object
    material: Material = field(default_factory=Material)
    cameras: list = field(default_factory=list)


# -- procedural albedos --------------------------------------------------------


def checker_albedo(scale=4.0, color_a=(0.75, 0.3, 0.2), color_b=(0.2, 0.45, 0.7)):
    a = np.asarray(color_a, dtype=np.float64)
    b = np.asarray(color_b, dtype=np.float64)

    def fn(pts):
        q = np.floor(np.asarray(pts) * scale).sum(axis=-1).astype(np.int64) % 2
        return np.where(q[..., None] == 0, a, b)

    return fn


def soft_checker_albedo(scale=5.0, softness=0.35,
                        color_a=(0.75, 0.35, 0.25), color_b=(0.25, 0.45, 0.7)):
    """Checker-like pattern with tanh-smoothed transitions; strong enough
    texture for optical flow without hard radiance discontinuities."""
    a = np.asarray(color_a, dtype=np.float64)
    b = np.asarray(color_b, dtype=np.float64)

    def fn(pts):
        p = np.asarray(pts, dtype=np.float64)
        s = (np.sin(np.pi * scale * p[..., 0])
             * np.sin(np.pi * scale * p[..., 1])
             * np.sin(np.pi * scale * p[..., 2]))
        t = 0.5 * (1.0 + np.tanh(s / softness))
        return a * t[..., None] + b * (1.0 - t[..., None])

    return fn


def smooth_albedo(base=(0.55, 0.42, 0.36), variation=0.12):
    base = np.asarray(base, dtype=np.float64)

    def fn(pts):
        p = np.asarray(pts, dtype=np.float64)
        mod = 1.0 + variation * np.stack(
            [np.sin(1.1 * p[..., 0] + 0.3),
             np.sin(0.9 * p[..., 1] + 1.1),
             np.sin(1.3 * p[..., 2] + 2.0)],
            axis=-1,
        )
        return np.clip(base * mod, 0.0, 1.0)

    return fn
