"""Pinhole camera: intrinsics plus a rigid world-to-camera transform.

Convention: the camera frame is right-handed with x to the right, y up
and the view direction along -z, so points in front of the camera have
negative z and the unit view vector from a surface toward the camera is
(0, 0, 1) in camera space.  Pixel centers sit at integer coordinates;
row indices grow downward.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError


@dataclass
class Camera:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    R: np.ndarray = field(default_factory=lambda: np.eye(3))  # world -> camera
    t: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.R = np.asarray(self.R, dtype=np.float64).reshape(3, 3)
        self.t = np.asarray(self.t, dtype=np.float64).reshape(3)
        err = np.abs(self.R @ self.R.T - np.eye(3)).max()
        if err > 1e-9:
            raise ValidationError(f"camera rotation not orthonormal (err {err:.2e})")
        if np.linalg.det(self.R) < 0:
            raise ValidationError("camera rotation has determinant -1")

    # -- transforms ----------------------------------------------------------

    def world_to_camera(self, points):
        return np.asarray(points, dtype=np.float64) @ self.R.T + self.t

    def camera_to_world_rotation(self):
        return self.R.T

    def position(self):
        """Camera center in world coordinates."""
        return -self.R.T @ self.t

    def project_camera(self, pts_cam):
        """Camera-space points -> (u, v, depth); depth = distance along -z."""
        pts_cam = np.asarray(pts_cam, dtype=np.float64)
        depth = -pts_cam[..., 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            u = self.cx + self.fx * pts_cam[..., 0] / depth
            v = self.cy - self.fy * pts_cam[..., 1] / depth
        return u, v, depth

    def project(self, points_world):
        return self.project_camera(self.world_to_camera(points_world))

    # -- constructors ----------------------------------------------------------

    @staticmethod
    def look_at(position, target, up=(0.0, 1.0, 0.0), fov_deg=40.0,
                width=512, height=512):
        """Camera at ``position`` looking at ``target``.

        ``fov_deg`` is the full vertical field of view.
        """
        position = np.asarray(position, dtype=np.float64)
        z = position - np.asarray(target, dtype=np.float64)
        nz = np.linalg.norm(z)
        if nz == 0:
            raise ValidationError("camera position coincides with target")
        z = z / nz
        x = np.cross(np.asarray(up, dtype=np.float64), z)
        nx = np.linalg.norm(x)
        if nx < 1e-12:
            raise ValidationError("up vector parallel to view direction")
        x = x / nx
        y = np.cross(z, x)
        R = np.stack([x, y, z])
        f = 0.5 * height / np.tan(np.radians(fov_deg) / 2.0)
        return Camera(fx=f, fy=f, cx=(width - 1) / 2.0, cy=(height - 1) / 2.0,
                      width=width, height=height, R=R, t=-R @ position)


def save_camera(cam, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"fx {cam.fx:.12g}\n")
        fh.write(f"fy {cam.fy:.12g}\n")
        fh.write(f"cx {cam.cx:.12g}\n")
        fh.write(f"cy {cam.cy:.12g}\n")
        fh.write(f"width {cam.width}\n")
        fh.write(f"height {cam.height}\n")
        fh.write("R " + " ".join(f"{x:.17g}" for x in cam.R.ravel()) + "\n")
        fh.write("t " + " ".join(f"{x:.17g}" for x in cam.t) + "\n")


def load_camera(path):
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                values[parts[0]] = [float(x) for x in parts[1:]]
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from None
    missing = {"fx", "fy", "cx", "cy", "width", "height", "R", "t"} - set(values)
    if missing:
        raise ValidationError(f"{path}: missing camera keys {sorted(missing)}")
    if len(values["R"]) != 9 or len(values["t"]) != 3:
        raise ValidationError(f"{path}: R needs 9 values and t needs 3")
    return Camera(
        fx=values["fx"][0], fy=values["fy"][0],
        cx=values["cx"][0], cy=values["cy"][0],
        width=int(values["width"][0]), height=int(values["height"][0]),
        R=np.array(values["R"]).reshape(3, 3), t=np.array(values["t"]),
    )
