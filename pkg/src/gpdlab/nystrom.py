"""Nystrom discretizations corroborating the symbol scans.

Two independent discrete oracles:

* the planar double-layer operator I/2 + K on a polygon boundary,
  assembled on a mesh graded (exponent 3) toward the vertices, with the
  singular values taken in the inner product weighted by the inverse
  distance to the vertex set (the discrete stand-in for the conical
  metric);
* the half-line model operator c + Mellin convolution at a single cone,
  discretized on a log-uniform mesh whose window grows with the level,
  used for adversarial kernels whose symbol hits zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import svdvals

from .conical import LayerDomain
from .mellin import MellinKernel

GRADING_EXPONENT = 3
MIN_PANELS_PER_HALF_EDGE = 4


class MeshError(ValueError):
    pass


@dataclass
class PolygonMesh:
    nodes: np.ndarray  # (n, 2)
    weights: np.ndarray  # arclength panel weights
    normals: np.ndarray  # inward normals at nodes
    edge_of: np.ndarray  # edge index per node
    vertex_distance: np.ndarray  # distance to the vertex set


def _polygon_coords(domain: LayerDomain):
    if domain.dimension != 2:
        raise MeshError("polygon meshes are planar only")
    coords = []
    for v in domain.vertices:
        if v.coords is None:
            raise MeshError(f"vertex {v.id!r} has no coordinates")
        coords.append(np.asarray(v.coords, dtype=float))
    if len(coords) < 3:
        raise MeshError("a polygon needs at least three vertices")
    return np.array(coords)


def polygon_mesh(domain: LayerDomain, panels_per_half_edge: int) -> PolygonMesh:
    """Composite midpoint mesh, graded toward both endpoints of each edge."""
    if panels_per_half_edge < MIN_PANELS_PER_HALF_EDGE:
        raise MeshError(
            f"mesh too coarse: need at least {2 * MIN_PANELS_PER_HALF_EDGE} points per edge"
        )
    coords = _polygon_coords(domain)
    nodes, weights, normals, edge_of = [], [], [], []
    n_edges = len(coords)
    grading = np.arange(panels_per_half_edge + 1) / panels_per_half_edge
    breaks = grading**GRADING_EXPONENT  # in [0, 1], clustered at 0
    for e in range(n_edges):
        p, q = coords[e], coords[(e + 1) % n_edges]
        length = float(np.linalg.norm(q - p))
        direction = (q - p) / length
        inward = np.array([-direction[1], direction[0]])  # interior on the left (ccw)
        half = 0.5 * length
        cuts = np.concatenate([breaks * half, length - breaks[::-1][1:] * half])
        mids = 0.5 * (cuts[:-1] + cuts[1:])
        for s, w in zip(mids, np.diff(cuts)):
            nodes.append(p + s * direction)
            weights.append(w)
            normals.append(inward)
            edge_of.append(e)
    nodes = np.array(nodes)
    dists = np.min(
        np.linalg.norm(nodes[:, None, :] - coords[None, :, :], axis=2), axis=1
    )
    return PolygonMesh(
        nodes=nodes,
        weights=np.array(weights),
        normals=np.array(normals),
        edge_of=np.array(edge_of),
        vertex_distance=dists,
    )


def double_layer_matrix(mesh: PolygonMesh) -> np.ndarray:
    """Nystrom matrix of the double-layer operator with inward normals.

    Same-edge blocks vanish exactly on straight edges (collinear points)
    and are set to zero.
    """
    x = mesh.nodes
    diff = x[:, None, :] - x[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(r2, 1.0)
    dot = np.einsum("ijk,jk->ij", diff, mesh.normals)
    kmat = dot / (2.0 * math.pi * r2)
    same_edge = mesh.edge_of[:, None] == mesh.edge_of[None, :]
    kmat[same_edge] = 0.0
    return kmat * mesh.weights[None, :]


def weighted_sigma_min(a: np.ndarray, mesh: PolygonMesh) -> float:
    """sigma_min in the inner product with density (panel weight) / r."""
    w = mesh.weights / mesh.vertex_distance
    d = np.sqrt(w)
    m = (d[:, None] * a) / d[None, :]
    return float(svdvals(m)[-1])


def gauss_row_sum_defect(mesh: PolygonMesh) -> float:
    """Deviation of sum_j K[i, j] from 1/2 at the node nearest each edge
    midpoint (the closed-curve Gauss identity; a mesh sanity oracle)."""
    kmat = double_layer_matrix(mesh)
    sums = kmat.sum(axis=1)
    worst = 0.0
    for e in np.unique(mesh.edge_of):
        sel = np.flatnonzero(mesh.edge_of == e)
        mid = sel[np.argmax(mesh.vertex_distance[sel])]
        worst = max(worst, abs(float(sums[mid]) - 0.5))
    return worst


@dataclass
class TraceRow:
    level: int
    dof: int
    sigma_min: float


@dataclass
class SigmaTrace:
    rows: list

    def sigmas(self) -> list:
        return [r.sigma_min for r in self.rows]

    def stabilized(self, rel: float = 0.10) -> bool:
        """Final two levels agree within the given relative tolerance."""
        if len(self.rows) < 2:
            return False
        a, b = self.rows[-2].sigma_min, self.rows[-1].sigma_min
        return abs(a - b) <= rel * max(abs(a), abs(b))

    def decay_factor(self) -> float:
        """First-to-last ratio; large when sigma_min collapses with level."""
        first, last = self.rows[0].sigma_min, self.rows[-1].sigma_min
        return math.inf if last == 0.0 else first / last

    def as_csv(self) -> str:
        lines = ["level,dof,sigma_min"]
        lines += [f"{r.level},{r.dof},{r.sigma_min!r}" for r in self.rows]
        return "\n".join(lines) + "\n"


MAX_NYSTROM_LEVELS = 8


def nystrom_oracle(domain: LayerDomain, levels: int, base_panels: int = 4) -> SigmaTrace:
    """sigma_min trace of I/2 + K on nested graded polygon meshes.

    Stabilization of the two finest levels corroborates a positive
    symbol-scan verdict at desk scale (it is evidence, not proof).
    """
    if levels < 1 or levels > MAX_NYSTROM_LEVELS:
        raise MeshError(f"levels must be between 1 and {MAX_NYSTROM_LEVELS}")
    rows = []
    for level in range(1, levels + 1):
        mesh = polygon_mesh(domain, base_panels * 2 ** (level - 1))
        a = 0.5 * np.eye(len(mesh.nodes)) + double_layer_matrix(mesh)
        rows.append(TraceRow(level, len(mesh.nodes), weighted_sigma_min(a, mesh)))
    return SigmaTrace(rows)


# ---------------------------------------------------------------------------
# half-line model operator (single cone, log-uniform mesh)


def model_operator_trace(
    kernel: MellinKernel,
    c: complex,
    weight: float,
    levels: int,
    window0: float = 5.0,
    growth: float = 3.0,
    step: float = 0.4,
) -> SigmaTrace:
    """sigma_min trace of the discretized model operator c + convolution.

    The Mellin convolution at one cone becomes, in the logarithmic
    coordinate, convolution by the conjugated kernel; the mesh is
    uniform there and the truncation window grows by ``growth`` per
    level.  For kernels whose symbol stays away from -c the trace
    stabilizes; a symbol zero makes it sink toward zero as the window
    grows.
    """
    g = kernel.conjugated(weight)
    k = kernel.size
    rows = []
    for level in range(1, levels + 1):
        window = window0 * growth ** (level - 1)
        n = max(8, int(round(window / step)))
        us = (np.arange(n) + 0.5) * step - window
        diffs = (np.arange(-(n - 1), n)) * step
        gvals = np.array([g(u) for u in diffs])  # (2n-1, k, k)
        idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) + (n - 1)
        big = np.zeros((n * k, n * k), dtype=np.complex128)
        for p in range(k):
            for q in range(k):
                big[p::k, q::k] = gvals[idx, p, q] * step
        big += c * np.eye(n * k)
        rows.append(TraceRow(level, n * k, float(svdvals(big)[-1])))
    return SigmaTrace(rows)
