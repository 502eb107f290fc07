"""Exception hierarchy shared by all facefuse modules.

The CLI maps these onto exit codes: validation problems exit 2,
numerical failures exit 3, file/parse problems exit 4.
"""


class FacefuseError(Exception):
    """Base class for all facefuse errors."""


class ValidationError(FacefuseError):
    """Bad arguments, inconsistent inputs, violated preconditions."""


class ShapeError(ValidationError):
    """Array dimensions that do not match what an operation requires."""


class MeshStructureError(ValidationError):
    """Structurally invalid mesh (bad indices, non-manifold edges, ...)."""


class DegenerateGeometryError(ValidationError):
    """Zero-area triangle or similar geometric degeneracy."""


class MeshFormatError(FacefuseError):
    """Unparseable mesh file; carries file position context in the message."""


class ImageFormatError(FacefuseError):
    """Unparseable or unsupported image file."""


class NumericalError(FacefuseError):
    """A solve failed to reach the required residual or is rank deficient."""


class AlignmentError(NumericalError):
    """Optical-flow alignment diverged."""
