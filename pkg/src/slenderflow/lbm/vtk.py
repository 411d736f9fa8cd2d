"""Legacy-VTK structured-points snapshot export (binary, little-endian).

One file per snapshot holding the SI velocity vector field and the SI
density scalar field at cell centers.  Note: the legacy VTK standard nominally
prescribes big-endian payloads; this project pins little-endian as its
interchange convention, which common readers accept via an explicit toggle.
"""

from __future__ import annotations

import numpy as np

from ..errors import OutputError
from .lattice import LatticeDomain

__all__ = ["write_structured_points"]


def write_structured_points(path: str, domain: LatticeDomain) -> None:
    """Write the domain's macroscopic fields as a structured-points file.

    Ordering follows the legacy convention: x varies fastest.  Obstacle
    cells carry zero velocity and zero density (their PDFs are dropped).
    """
    nx, ny, nz = domain.shape
    dx = domain.scales.dx
    rho_lat, u_lat = domain.macroscopics()
    u_si = (u_lat * (dx / domain.scales.dt)).astype("<f4")
    rho_si = (rho_lat * domain.scales.rho0).astype("<f4")

    header = (
        "# vtk DataFile Version 3.0\n"
        "slenderflow flow field snapshot\n"
        "BINARY\n"
        "DATASET STRUCTURED_POINTS\n"
        f"DIMENSIONS {nx} {ny} {nz}\n"
        f"ORIGIN {0.5 * dx:.9g} {0.5 * dx:.9g} {0.5 * dx:.9g}\n"
        f"SPACING {dx:.9g} {dx:.9g} {dx:.9g}\n"
        f"POINT_DATA {nx * ny * nz}\n"
    )
    try:
        with open(path, "wb") as fh:
            fh.write(header.encode("ascii"))
            fh.write(b"VECTORS velocity float\n")
            fh.write(np.ascontiguousarray(u_si.transpose(2, 1, 0, 3)).tobytes())
            fh.write(b"\nSCALARS density float 1\nLOOKUP_TABLE default\n")
            fh.write(np.ascontiguousarray(rho_si.transpose(2, 1, 0)).tobytes())
            fh.write(b"\n")
    except OSError as exc:
        raise OutputError(f"could not write VTK snapshot {path}: {exc}") from exc
