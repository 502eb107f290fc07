"""Overlapping geodesic patch segmentation of a base mesh.

Seeds come from farthest-point sampling; patches are the geodesic
Voronoi cells of the seeds; each patch then grows overlaps onto its
neighbors, with the growth threshold for the pair (m, n) set to
``sigma`` times the seed-to-seed distance measured inside the union of
the two patches.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError
from ..meshkit import geodesic_distances

DEFAULT_PATCH_COUNT = 100
DEFAULT_OVERLAP_RATIO = 0.3


@dataclass
class Segmentation:
    """Patch labels, seeds, dual adjacency and per-pair overlap sets.

    Labels are 0-based in [0, M).  ``overlaps[(m, n)]`` lists the
    vertices of patch n claimed by patch m's growth (a subset of P_n).
    """

    seeds: np.ndarray
    patch_of: np.ndarray
    adjacency: set = field(default_factory=set)
    overlaps: dict = field(default_factory=dict)
    sigma: float = 0.0

    def __post_init__(self):
        self.patch_of = np.asarray(self.patch_of, dtype=np.int64)
        if self.seeds is not None:
            self.seeds = np.asarray(self.seeds, dtype=np.int64)

    @property
    def n_patches(self):
        return int(self.patch_of.max()) + 1 if self.patch_of.size else 0

    def patch_vertices(self, m):
        return np.nonzero(self.patch_of == m)[0]

    def grown_patch(self, m):
        """Q_m: the patch plus all overlaps it claimed from neighbors."""
        parts = [self.patch_vertices(m)]
        for (a, b), verts in self.overlaps.items():
            if a == m:
                parts.append(np.asarray(verts, dtype=np.int64))
        return np.unique(np.concatenate(parts)) if parts else np.array([], np.int64)

    def neighbors(self, m):
        return sorted({b for (a, b) in self.adjacency if a == m}
                      | {a for (a, b) in self.adjacency if b == m})

    def validate(self, mesh=None):
        m = self.n_patches
        counts = np.bincount(self.patch_of, minlength=m)
        if (counts == 0).any():
            raise ValidationError("segmentation has empty patches")
        if self.seeds is not None:
            for idx, s in enumerate(self.seeds):
                if self.patch_of[s] != idx:
                    raise ValidationError(f"seed {int(s)} not inside its own patch {idx}")
        for (a, b), verts in self.overlaps.items():
            if (self.patch_of[np.asarray(verts, dtype=np.int64)] != b).any():
                raise ValidationError(f"overlap ({a},{b}) leaves patch {b}")
        if mesh is not None:
            e = mesh.edges()
            cross = self.patch_of[e[:, 0]] != self.patch_of[e[:, 1]]
            pairs = {tuple(sorted((int(self.patch_of[i]), int(self.patch_of[j]))))
                     for i, j in e[cross]}
            if pairs != self.adjacency:
                raise ValidationError("adjacency does not match mesh edges")


def farthest_point_sample(mesh, count, seed=0):
    """Iteratively pick vertices maximizing distance to those already picked.

    The running distance map is maintained by the min-update rule: after
    adding a sample s, D(i) <- min(D(i), dist(i, s)).
    """
    n = mesh.n_vertices
    if not (1 <= count <= n):
        raise ValidationError(f"sample count {count} outside [1, {n}]")
    if not (0 <= seed < n):
        raise ValidationError(f"seed vertex {seed} out of range")
    seeds = [int(seed)]
    dist = geodesic_distances(mesh, [seed])
    if np.isinf(dist).any():
        far = int(np.nonzero(np.isinf(dist))[0][0])
        raise ValidationError(
            f"mesh is disconnected: vertex {far} unreachable from seed {seed}"
        )
    for _ in range(count - 1):
        nxt = int(np.argmax(dist))
        seeds.append(nxt)
        dist = np.minimum(dist, geodesic_distances(mesh, [nxt]))
    return np.asarray(seeds, dtype=np.int64)


def voronoi_segment(mesh, seeds):
    """Label each vertex by its geodesically nearest seed (ties: lowest index)."""
    seeds = np.asarray(seeds, dtype=np.int64)
    if len(np.unique(seeds)) != len(seeds):
        raise ValidationError("duplicate seed vertices")
    all_dists = np.stack([geodesic_distances(mesh, [s]) for s in seeds])
    labels = np.argmin(all_dists, axis=0).astype(np.int64)
    adjacency = set()
    e = mesh.edges()
    if len(e):
        cross = labels[e[:, 0]] != labels[e[:, 1]]
        adjacency = {tuple(sorted((int(labels[i]), int(labels[j]))))
                     for i, j in e[cross]}
    return Segmentation(seeds=seeds, patch_of=labels, adjacency=adjacency)


def grow_overlaps(mesh, seg, sigma):
    """Add overlap sets O_mn for every ordered adjacent pair, threshold
    d_mn = sigma * restricted seed distance."""
    if sigma < 0:
        raise ValidationError("sigma must be >= 0")
    overlaps = {}
    patches = {m: seg.patch_vertices(m) for m in range(seg.n_patches)}
    for (a, b) in sorted(seg.adjacency):
        for m, n in ((a, b), (b, a)):
            union = np.concatenate([patches[m], patches[n]])
            seed_dist = geodesic_distances(mesh, [seg.seeds[m]], restriction=union)[seg.seeds[n]]
            if not np.isfinite(seed_dist):
                overlaps[(m, n)] = np.array([], dtype=np.int64)
                continue
            d_mn = sigma * seed_dist
            if d_mn <= 0:
                # every P_n vertex sits at positive distance from P_m
                overlaps[(m, n)] = np.array([], dtype=np.int64)
                continue
            reach = geodesic_distances(mesh, patches[m], restriction=union)
            overlaps[(m, n)] = np.sort(patches[n][reach[patches[n]] <= d_mn])
    return Segmentation(seeds=seg.seeds, patch_of=seg.patch_of.copy(),
                        adjacency=set(seg.adjacency), overlaps=overlaps, sigma=sigma)


def segment_mesh(mesh, count=DEFAULT_PATCH_COUNT, sigma=DEFAULT_OVERLAP_RATIO, seed=0):
    """Full pipeline: farthest-point seeds, Voronoi labels, grown overlaps."""
    seeds = farthest_point_sample(mesh, count, seed)
    seg = voronoi_segment(mesh, seeds)
    return grow_overlaps(mesh, seg, sigma)


# -- serialization -------------------------------------------------------------


def save_segmentation(seg, path):
    """Text format: header line "M sigma", one line of per-vertex labels,
    one line per ordered overlap pair "m n v1 v2 ...".  Comment lines
    starting with '#' carry the seeds."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{seg.n_patches} {seg.sigma:.12g}\n")
        if seg.seeds is not None:
            fh.write("# seeds " + " ".join(str(int(s)) for s in seg.seeds) + "\n")
        fh.write(" ".join(str(int(x)) for x in seg.patch_of) + "\n")
        for (m, n) in sorted(seg.overlaps):
            verts = " ".join(str(int(v)) for v in seg.overlaps[(m, n)])
            fh.write(f"{m} {n} {verts}".rstrip() + "\n")


def load_segmentation(path, mesh=None):
    seeds = None
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    body = []
    for ln in lines:
        if ln.startswith("# seeds"):
            seeds = np.array([int(x) for x in ln.split()[2:]], dtype=np.int64)
        elif ln.strip() and not ln.startswith("#"):
            body.append(ln)
    if not body:
        raise ValidationError(f"{path}: empty segmentation file")
    head = body[0].split()
    m_count, sigma = int(head[0]), float(head[1])
    patch_of = np.array([int(x) for x in body[1].split()], dtype=np.int64)
    if patch_of.size and int(patch_of.max()) >= m_count:
        raise ValidationError(f"{path}: label exceeds patch count {m_count}")
    overlaps = {}
    for ln in body[2:]:
        parts = [int(x) for x in ln.split()]
        overlaps[(parts[0], parts[1])] = np.array(parts[2:], dtype=np.int64)
    adjacency = {tuple(sorted(k)) for k in overlaps}
    if mesh is not None:
        e = mesh.edges()
        cross = patch_of[e[:, 0]] != patch_of[e[:, 1]]
        adjacency = {tuple(sorted((int(patch_of[i]), int(patch_of[j]))))
                     for i, j in e[cross]}
    return Segmentation(seeds=seeds, patch_of=patch_of, adjacency=adjacency,
                        overlaps=overlaps, sigma=sigma)


__all__ = [
    "Segmentation",
    "DEFAULT_PATCH_COUNT", "DEFAULT_OVERLAP_RATIO",
    "farthest_point_sample", "voronoi_segment", "grow_overlaps", "segment_mesh",
    "save_segmentation", "load_segmentation",
]
