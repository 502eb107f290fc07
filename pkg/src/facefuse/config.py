"""Pipeline configuration: one INI-style file with sections."""

import configparser
import os
from dataclasses import dataclass

from .errors import ValidationError


@dataclass
class PipelineConfig:
    data_dir: str
    output_dir: str
    patches: int = 100
    overlap: float = 0.3
    lam: float = 1e-6
    lambda_screen: float = None      # None = auto from mesh
    sigma_low: float = None          # None = auto from image width
    iterations: int = 1
    normal_source: str = "specular"
    preview: bool = True
    threads: int = 1
    seed_vertex: int = 0

    def validate(self, check_paths=True):
        if self.patches < 1:
            raise ValidationError("patches must be >= 1")
        if self.overlap < 0:
            raise ValidationError("overlap sigma must be >= 0")
        if self.lam <= 0:
            raise ValidationError("lambda must be > 0")
        if self.iterations < 0:
            raise ValidationError("iterations must be >= 0")
        if self.normal_source not in ("diffuse", "specular"):
            raise ValidationError("normal_source must be 'diffuse' or 'specular'")
        if check_paths:
            if not os.path.isdir(self.data_dir):
                raise ValidationError(f"data directory not found: {self.data_dir}")
            for name in ("base_mesh.ply", "scene.json", "photometric_views.txt"):
                p = os.path.join(self.data_dir, name)
                if not os.path.exists(p):
                    raise ValidationError(f"missing dataset file: {p}")
        return self


def load_config(path):
    if not os.path.exists(path):
        raise ValidationError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    parser.read(path)

    def get(section, key, cast, default):
        if parser.has_option(section, key):
            raw = parser.get(section, key).strip()
            if raw == "":
                return default
            if cast is bool:
                return raw.lower() in ("1", "true", "yes", "on")
            return cast(raw)
        return default

    try:
        cfg = PipelineConfig(
            data_dir=parser.get("input", "data_dir"),
            output_dir=parser.get("output", "dir"),
            patches=get("stages", "patches", int, 100),
            overlap=get("stages", "overlap", float, 0.3),
            lam=get("stages", "lambda", float, 1e-6),
            lambda_screen=get("stages", "lambda_screen", float, None),
            sigma_low=get("stages", "sigma_low", float, None),
            iterations=get("stages", "iterations", int, 1),
            normal_source=get("stages", "normal_source", str, "specular"),
            preview=get("stages", "preview", bool, True),
            threads=get("runtime", "threads", int, 1),
            seed_vertex=get("stages", "seed_vertex", int, 0),
        )
    except (configparser.Error, ValueError) as exc:
        raise ValidationError(f"{path}: {exc}") from None
    return cfg
