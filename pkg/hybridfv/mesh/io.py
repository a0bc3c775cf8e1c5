"""Plain-text polyhedral mesh format.

Layout (``#`` starts a comment, blank lines are ignored)::

    dim n_cells n_faces
    x_K(d floats) m(K) h_K                              # n_cells lines
    x_sigma(d floats) m(sigma) cellA [cellB] n_A(d floats) d_A [d_B]   # n_faces lines

Boundary faces have 2d + 3 tokens and interior faces 2d + 5. ``n_A`` is the
unit normal outward from ``cellA``.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from hybridfv.exceptions import MeshError
from hybridfv.mesh.geometry import NO_CELL, Mesh

logger = logging.getLogger(__name__)

# repr-exact float formatting
FLOAT_FORMAT = ".17g"


def write_mesh(mesh: Mesh, path: str | Path) -> None:
    """Write a mesh in the plain-text format.

    Args:
        mesh: Mesh to write
        path: Destination file; parent directories are created

    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    def fmt(values: np.ndarray) -> str:
        return " ".join(format(float(v), FLOAT_FORMAT) for v in values)

    lines = [f"# hybridfv mesh, generator={mesh.metadata.get('generator', 'unknown')}"]
    lines.append(f"{mesh.dim} {mesh.n_cells} {mesh.n_faces}")
    lines.append("# cells: x_K m(K) h_K")
    for k in range(mesh.n_cells):
        lines.append(
            f"{fmt(mesh.cell_centers[k])} "
            f"{format(float(mesh.cell_volumes[k]), FLOAT_FORMAT)} "
            f"{format(float(mesh.cell_diameters[k]), FLOAT_FORMAT)}"
        )
    lines.append("# faces: x_sigma m(sigma) cellA [cellB] n_A d_A [d_B]")
    for f in range(mesh.n_faces):
        first, second = (int(c) for c in mesh.face_cells[f])
        area = format(float(mesh.face_areas[f]), FLOAT_FORMAT)
        normal = fmt(mesh.face_normals[f])
        d_a = format(float(mesh.face_distances[f, 0]), FLOAT_FORMAT)
        center = fmt(mesh.face_centers[f])
        if second == NO_CELL:
            lines.append(f"{center} {area} {first} {normal} {d_a}")
        else:
            d_b = format(float(mesh.face_distances[f, 1]), FLOAT_FORMAT)
            lines.append(f"{center} {area} {first} {second} {normal} {d_a} {d_b}")

    path.write_text("\n".join(lines) + "\n")
    logger.debug("Wrote mesh with %d cells to %s", mesh.n_cells, path)


def read_mesh(path: str | Path) -> Mesh:
    """Read a mesh written in the plain-text format.

    Args:
        path: File to read

    Returns:
        Mesh without box lattice; metadata records the source path

    Raises:
        MeshError: On malformed content, a face referencing a missing cell,
            or a non-positive measure

    """
    path = Path(path)
    records: list[tuple[int, list[str]]] = []
    for number, raw in enumerate(path.read_text().splitlines(), start=1):
        content = raw.split("#", 1)[0].split()
        if content:
            records.append((number, content))
    if not records:
        msg = f"{path}: empty mesh file"
        raise MeshError(msg)

    header_line, header = records[0]
    if len(header) != 3:
        msg = f"{path}:{header_line}: header must be 'dim n_cells n_faces'"
        raise MeshError(msg)
    dim, n_cells, n_faces = (_parse_int(tok, path, header_line) for tok in header)
    if dim not in (2, 3) or n_cells < 1 or n_faces < 1:
        msg = f"{path}:{header_line}: invalid header {' '.join(header)}"
        raise MeshError(msg)
    if len(records) - 1 != n_cells + n_faces:
        msg = (
            f"{path}: expected {n_cells} cell and {n_faces} face lines, "
            f"found {len(records) - 1}"
        )
        raise MeshError(msg)

    cell_centers = np.empty((n_cells, dim))
    cell_volumes = np.empty(n_cells)
    cell_diameters = np.empty(n_cells)
    for k, (line, tokens) in enumerate(records[1 : 1 + n_cells]):
        if len(tokens) != dim + 2:
            msg = f"{path}:{line}: cell line needs {dim + 2} values, got {len(tokens)}"
            raise MeshError(msg)
        values = [_parse_float(tok, path, line) for tok in tokens]
        cell_centers[k] = values[:dim]
        cell_volumes[k], cell_diameters[k] = values[dim], values[dim + 1]

    face_centers = np.empty((n_faces, dim))
    face_areas = np.empty(n_faces)
    face_cells = np.full((n_faces, 2), NO_CELL, dtype=int)
    face_normals = np.empty((n_faces, dim))
    face_distances = np.zeros((n_faces, 2))
    for f, (line, tokens) in enumerate(records[1 + n_cells :]):
        if len(tokens) == 2 * dim + 3:
            n_incident = 1
        elif len(tokens) == 2 * dim + 5:
            n_incident = 2
        else:
            msg = (
                f"{path}:{line}: face line needs {2 * dim + 3} (boundary) or "
                f"{2 * dim + 5} (interior) values, got {len(tokens)}"
            )
            raise MeshError(msg)
        face_centers[f] = [_parse_float(tok, path, line) for tok in tokens[:dim]]
        face_areas[f] = _parse_float(tokens[dim], path, line)
        cursor = dim + 1
        for side in range(n_incident):
            cell = _parse_int(tokens[cursor + side], path, line)
            if not 0 <= cell < n_cells:
                msg = f"{path}:{line}: face {f} references missing cell {cell}"
                raise MeshError(msg)
            face_cells[f, side] = cell
        cursor += n_incident
        face_normals[f] = [
            _parse_float(tok, path, line) for tok in tokens[cursor : cursor + dim]
        ]
        cursor += dim
        face_distances[f, :n_incident] = [
            _parse_float(tok, path, line) for tok in tokens[cursor:]
        ]

    if np.any(face_cells[:, 0] == face_cells[:, 1]):
        msg = f"{path}: a face lists the same cell twice"
        raise MeshError(msg)
    touched = np.zeros(n_cells, dtype=bool)
    touched[face_cells[:, 0]] = True
    touched[face_cells[face_cells[:, 1] != NO_CELL, 1]] = True
    if not touched.all():
        msg = f"{path}: cell {int(np.flatnonzero(~touched)[0])} has no faces"
        raise MeshError(msg)
    for name, values in (
        ("cell measure", cell_volumes),
        ("cell diameter", cell_diameters),
        ("face measure", face_areas),
    ):
        if np.any(values <= 0):
            index = int(np.flatnonzero(values <= 0)[0])
            msg = f"{path}: non-positive {name} at index {index}"
            raise MeshError(msg)

    mesh = Mesh(
        dim=dim,
        cell_centers=cell_centers,
        cell_volumes=cell_volumes,
        cell_diameters=cell_diameters,
        face_centers=face_centers,
        face_areas=face_areas,
        face_cells=face_cells,
        face_normals=face_normals,
        face_distances=face_distances,
        metadata={"generator": "file", "path": str(path)},
    )
    logger.info("Read mesh from %s: %d cells, %d faces", path, n_cells, n_faces)
    return mesh


def _parse_float(token: str, path: Path, line: int) -> float:
    try:
        return float(token)
    except ValueError:
        msg = f"{path}:{line}: expected a number, got {token!r}"
        raise MeshError(msg) from None


def _parse_int(token: str, path: Path, line: int) -> int:
    try:
        return int(token)
    except ValueError:
        msg = f"{path}:{line}: expected an integer, got {token!r}"
        raise MeshError(msg) from None
