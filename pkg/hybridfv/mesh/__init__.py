"""Polyhedral meshes.

Contains:
- Mesh, Cell, Face: cell/face topology and geometry
- build_box_mesh, refine_random: axis-aligned generation and nonmatching refinement
- validate, mesh_quality: invariant checks and h_D / theta_D
- read_mesh, write_mesh: plain-text serialization
"""

from hybridfv.mesh.generators import build_box_mesh, generate_mesh, refine_random
from hybridfv.mesh.geometry import NO_CELL, Cell, Face, Mesh
from hybridfv.mesh.io import read_mesh, write_mesh
from hybridfv.mesh.quality import MeshQuality, MeshReport, mesh_quality, validate

__all__ = [
    "NO_CELL",
    "Cell",
    "Face",
    "Mesh",
    "MeshQuality",
    "MeshReport",
    "build_box_mesh",
    "generate_mesh",
    "mesh_quality",
    "read_mesh",
    "refine_random",
    "validate",
    "write_mesh",
]
