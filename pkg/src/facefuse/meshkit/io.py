"""Mesh file IO: ASCII OBJ and binary little-endian PLY.

OBJ carries positions, faces and optional per-vertex colors via the
extended ``v x y z r g b`` form.  PLY carries ``x y z`` plus optional
``nx ny nz`` (attribute "normal"), ``red green blue`` uchar (attribute
"color", stored in [0, 1]), any other float property ``p`` (attribute
"scalar:p") and float triplets ``p_x p_y p_z`` (attribute "vector:p").
"""

import numpy as np

from ..errors import MeshFormatError
from .mesh import TriangleMesh


def load_mesh(path):
    """Load an OBJ or PLY mesh; the format is chosen by file extension."""
    p = str(path)
    if p.lower().endswith(".obj"):
        return load_obj(p)
    if p.lower().endswith(".ply"):
        return load_ply(p)
    raise MeshFormatError(f"{p}: unsupported mesh extension (use .obj or .ply)")


def save_mesh(mesh, path):
    p = str(path)
    if p.lower().endswith(".obj"):
        return save_obj(mesh, p)
    if p.lower().endswith(".ply"):
        return save_ply(mesh, p)
    raise MeshFormatError(f"{p}: unsupported mesh extension (use .obj or .ply)")


# -- OBJ ---------------------------------------------------------------------


def load_obj(path):
    vertices = []
    colors = []
    faces = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            tag = parts[0]
            if tag == "v":
                if len(parts) not in (4, 7):
                    raise MeshFormatError(
                        f"{path}:{lineno}: vertex line needs 3 or 6 floats"
                    )
                try:
                    vals = [float(x) for x in parts[1:]]
                except ValueError as exc:
                    raise MeshFormatError(f"{path}:{lineno}: {exc}") from None
                vertices.append(vals[:3])
                if len(vals) == 6:
                    colors.append(vals[3:])
            elif tag == "f":
                if len(parts) < 4:
                    raise MeshFormatError(f"{path}:{lineno}: face needs 3 indices")
                idx = []
                for tok in parts[1:]:
                    head = tok.split("/")[0]
                    try:
                        i = int(head)
                    except ValueError:
                        raise MeshFormatError(
                            f"{path}:{lineno}: bad face index {tok!r}"
                        ) from None
                    if i == 0:
                        raise MeshFormatError(f"{path}:{lineno}: OBJ indices are 1-based")
                    idx.append(i - 1 if i > 0 else len(vertices) + i)
                # fan-triangulate polygons
                for k in range(1, len(idx) - 1):
                    faces.append([idx[0], idx[k], idx[k + 1]])
            # other tags (vn, vt, o, g, s, usemtl, ...) are ignored
    attrs = {}
    if colors:
        if len(colors) != len(vertices):
            raise MeshFormatError(f"{path}: only some vertices carry colors")
        attrs["color"] = np.array(colors)
    return TriangleMesh(vertices, faces, attrs)


def save_obj(mesh, path):
    color = mesh.attributes.get("color")
    with open(path, "w", encoding="utf-8") as fh:
        for i, v in enumerate(mesh.vertices):
            if color is not None:
                c = color[i]
                fh.write(
                    f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g} {c[0]:.9g} {c[1]:.9g} {c[2]:.9g}\n"
                )
            else:
                fh.write(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        for f in mesh.faces:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")


# -- PLY ---------------------------------------------------------------------

_PLY_TYPES = {
    "float": ("<f4", 4), "float32": ("<f4", 4),
    "double": ("<f8", 8), "float64": ("<f8", 8),
    "uchar": ("u1", 1), "uint8": ("u1", 1),
    "char": ("i1", 1), "int8": ("i1", 1),
    "short": ("<i2", 2), "int16": ("<i2", 2),
    "ushort": ("<u2", 2), "uint16": ("<u2", 2),
    "int": ("<i4", 4), "int32": ("<i4", 4),
    "uint": ("<u4", 4), "uint32": ("<u4", 4),
}


def load_ply(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"ply"):
        raise MeshFormatError(f"{path}: missing 'ply' magic")
    end = data.find(b"end_header\n")
    if end < 0:
        raise MeshFormatError(f"{path}: no end_header")
    header = data[:end].decode("ascii", errors="replace").splitlines()
    body = data[end + len(b"end_header\n"):]

    n_vertex = n_face = 0
    vertex_props = []  # (name, dtype string)
    current = None
    fmt_seen = None
    for lineno, line in enumerate(header[1:], start=2):
        parts = line.split()
        if not parts or parts[0] == "comment":
            continue
        if parts[0] == "format":
            fmt_seen = parts[1]
            if parts[1] != "binary_little_endian":
                raise MeshFormatError(
                    f"{path}:{lineno}: only binary_little_endian PLY is supported"
                )
        elif parts[0] == "element":
            current = parts[1]
            if current == "vertex":
                n_vertex = int(parts[2])
            elif current == "face":
                n_face = int(parts[2])
            else:
                raise MeshFormatError(f"{path}:{lineno}: unsupported element {current!r}")
        elif parts[0] == "property":
            if current == "vertex":
                if parts[1] == "list":
                    raise MeshFormatError(f"{path}:{lineno}: list property on vertices")
                if parts[1] not in _PLY_TYPES:
                    raise MeshFormatError(f"{path}:{lineno}: unknown type {parts[1]!r}")
                vertex_props.append((parts[2], _PLY_TYPES[parts[1]][0]))
            elif current == "face":
                if parts[1] != "list" or parts[4] != "vertex_indices":
                    raise MeshFormatError(
                        f"{path}:{lineno}: faces must be 'property list ... vertex_indices'"
                    )
    if fmt_seen is None:
        raise MeshFormatError(f"{path}: missing format line")

    vdtype = np.dtype([(name, dt) for name, dt in vertex_props])
    vbytes = vdtype.itemsize * n_vertex
    if len(body) < vbytes:
        raise MeshFormatError(f"{path}: vertex block truncated at byte {len(body)}")
    vtable = np.frombuffer(body[:vbytes], dtype=vdtype, count=n_vertex)
    offset = vbytes

    # faces: uchar count followed by count int32 indices; triangles only
    fdtype = np.dtype([("n", "u1"), ("idx", "<i4", (3,))])
    fbytes = fdtype.itemsize * n_face
    if len(body) < offset + fbytes:
        raise MeshFormatError(f"{path}: face block truncated at byte {len(body)}")
    ftable = np.frombuffer(body[offset:offset + fbytes], dtype=fdtype, count=n_face)
    if n_face and not (ftable["n"] == 3).all():
        bad = int(np.nonzero(ftable["n"] != 3)[0][0])
        raise MeshFormatError(f"{path}: face {bad} has {int(ftable['n'][bad])} vertices")

    names = [n for n, _ in vertex_props]
    for req in ("x", "y", "z"):
        if req not in names:
            raise MeshFormatError(f"{path}: vertex property {req!r} missing")
    verts = np.stack([vtable["x"], vtable["y"], vtable["z"]], axis=1).astype(np.float64)

    attrs = {}
    used = {"x", "y", "z"}
    if all(k in names for k in ("nx", "ny", "nz")):
        n = np.stack([vtable["nx"], vtable["ny"], vtable["nz"]], 1).astype(np.float64)
        lens = np.linalg.norm(n, axis=1, keepdims=True)
        lens[lens == 0] = 1.0
        attrs["normal"] = n / lens
        used |= {"nx", "ny", "nz"}
    if all(k in names for k in ("red", "green", "blue")):
        c = np.stack([vtable["red"], vtable["green"], vtable["blue"]], 1)
        attrs["color"] = c.astype(np.float64) / 255.0
        used |= {"red", "green", "blue"}
    rest = [n for n in names if n not in used]
    grouped = set()
    for name in rest:
        if name.endswith("_x"):
            base = name[:-2]
            if f"{base}_y" in rest and f"{base}_z" in rest:
                attrs[f"vector:{base}"] = np.stack(
                    [vtable[f"{base}_x"], vtable[f"{base}_y"], vtable[f"{base}_z"]], 1
                ).astype(np.float64)
                grouped |= {f"{base}_x", f"{base}_y", f"{base}_z"}
    for name in rest:
        if name not in grouped:
            attrs[f"scalar:{name}"] = np.asarray(vtable[name], dtype=np.float64)

    faces = ftable["idx"].astype(np.int64) if n_face else np.zeros((0, 3), np.int64)
    return TriangleMesh(verts, faces, attrs)


def save_ply(mesh, path):
    props = [("x", "<f4"), ("y", "<f4"), ("z", "<f4")]
    header_props = ["property float x", "property float y", "property float z"]
    cols = [mesh.vertices[:, 0], mesh.vertices[:, 1], mesh.vertices[:, 2]]

    normal = mesh.attributes.get("normal")
    if normal is not None:
        for k, ax in enumerate("xyz"):
            props.append((f"n{ax}", "<f4"))
            header_props.append(f"property float n{ax}")
            cols.append(normal[:, k])
    color = mesh.attributes.get("color")
    if color is not None:
        c8 = np.clip(np.round(color * 255.0), 0, 255).astype(np.uint8)
        for k, ch in enumerate(("red", "green", "blue")):
            props.append((ch, "u1"))
            header_props.append(f"property uchar {ch}")
            cols.append(c8[:, k])
    for name in sorted(mesh.attributes):
        if name.startswith("scalar:"):
            base = name.split(":", 1)[1]
            props.append((base, "<f4"))
            header_props.append(f"property float {base}")
            cols.append(mesh.attributes[name])
        elif name.startswith("vector:"):
            base = name.split(":", 1)[1]
            for k, ax in enumerate("xyz"):
                props.append((f"{base}_{ax}", "<f4"))
                header_props.append(f"property float {base}_{ax}")
                cols.append(mesh.attributes[name][:, k])

    vtable = np.zeros(mesh.n_vertices, dtype=np.dtype(props))
    for (name, _), col in zip(props, cols):
        vtable[name] = col

    ftable = np.zeros(mesh.n_faces, dtype=np.dtype([("n", "u1"), ("idx", "<i4", (3,))]))
    ftable["n"] = 3
    ftable["idx"] = mesh.faces.astype(np.int32)

    header = "\n".join(
        ["ply", "format binary_little_endian 1.0",
         f"element vertex {mesh.n_vertices}"]
        + header_props
        + [f"element face {mesh.n_faces}",
           "property list uchar int vertex_indices",
           "end_header", ""]
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(vtable.tobytes())
        fh.write(ftable.tobytes())
