"""Four-plate coupler layout and its rectangular panel mesh.

Coordinate frame
----------------
The gap is centred on ``z = 0``. The primary plates 1 and 2 lie in the plane
``z = -gap/2``, the secondary plates 3 and 4 in ``z = +gap/2``. Plates 1/3 sit
at negative ``x`` and face each other, plates 2/4 at positive ``x``. The two
coplanar plates on each side are separated edge to edge by ``side_spacing``.

When the slab is enabled, the dielectric occupies the box spanning exactly
the gap in ``z`` and covering both plate footprints plus ``slab_margin`` in
``x`` and ``y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import MeshBudgetExceeded, NonPositiveDimension

DEFAULT_PANEL_BUDGET = 20_000

# owner tags: 1..4 are conductors; interface faces use INTERFACE_OWNER and a face id
INTERFACE_OWNER = 0
FACE_NAMES = ("z-", "z+", "x-", "x+", "y-", "y+")


@dataclass(frozen=True)
class CouplerGeometry:
    plate_side: float
    gap: float
    side_spacing: float
    slab_margin: float = 0.0
    slab_enabled: bool = True

    def __post_init__(self):
        for name in ("plate_side", "gap", "side_spacing"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise NonPositiveDimension(f"{name} must be > 0, got {value!r}")
        if not (math.isfinite(self.slab_margin) and self.slab_margin >= 0):
            raise NonPositiveDimension(f"slab_margin must be >= 0, got {self.slab_margin!r}")

    @property
    def plate_area(self) -> float:
        return self.plate_side * self.plate_side

    def with_gap(self, gap: float) -> "CouplerGeometry":
        return replace(self, gap=gap)

    def plate_bounds(self):
        """``(x0, x1, y0, y1, z)`` for plates 1..4, in that order."""
        a, s, d = self.plate_side, self.side_spacing, self.gap
        xl = (-(s / 2 + a), -s / 2)
        xr = (s / 2, s / 2 + a)
        y = (-a / 2, a / 2)
        return [
            (*xl, *y, -d / 2),
            (*xr, *y, -d / 2),
            (*xl, *y, d / 2),
            (*xr, *y, d / 2),
        ]


def standard_geometry(plate_side: float, gap: float, **overrides) -> CouplerGeometry:
    """Square-plate coupler with the default spacing and slab margin.

    ``side_spacing`` defaults to one plate width and the slab extends a tenth
    of a plate width past the plate footprint.
    """
    for name, value in (("plate_side", plate_side), ("gap", gap)):
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise NonPositiveDimension(f"{name} must be > 0, got {value!r}")
    params = dict(
        plate_side=float(plate_side),
        gap=float(gap),
        side_spacing=float(plate_side),
        slab_margin=0.1 * float(plate_side),
        slab_enabled=True,
    )
    params.update({k: v for k, v in overrides.items() if v is not None})
    return CouplerGeometry(**params)


@dataclass(frozen=True)
class PanelMesh:
    """Flat rectangular panels, stored column-wise.

    Each panel ``i`` is the rectangle ``centroid + s*u + t*v`` with
    ``|s| <= half_u``, ``|t| <= half_v``. Conductor panels come first.
    ``slab_side`` is true for conductor panels whose normal side touches the
    slab interior; interface normals point out of the slab.
    """

    centroid: np.ndarray
    u: np.ndarray
    v: np.ndarray
    normal: np.ndarray
    half_u: np.ndarray
    half_v: np.ndarray
    owner: np.ndarray
    face: np.ndarray
    slab_side: np.ndarray
    geometry: CouplerGeometry
    refinement: int
    eps_outside: float | None = None
    eps_inside: float | None = None

    def __post_init__(self):
        for name in ("centroid", "u", "v", "normal", "half_u", "half_v", "owner", "face",
                     "slab_side"):
            arr = np.ascontiguousarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self):
        return self.centroid.shape[0]

    @property
    def area(self) -> np.ndarray:
        return 4.0 * self.half_u * self.half_v

    @property
    def n_conductor(self) -> int:
        return int(np.count_nonzero(self.owner > 0))

    @property
    def n_interface(self) -> int:
        return len(self) - self.n_conductor

    @property
    def is_conductor(self) -> np.ndarray:
        return self.owner > 0

    @property
    def eps_pair(self) -> np.ndarray:
        """``(eps_outside, eps_inside)`` per interface panel, NaN until media are bound."""
        out = np.full((self.n_interface, 2), np.nan)
        if self.eps_outside is not None:
            out[:, 0] = self.eps_outside
            out[:, 1] = self.eps_inside
        return out

    def bind_media(self, eps_inside: float, eps_outside: float) -> "PanelMesh":
        return replace(self, eps_inside=float(eps_inside), eps_outside=float(eps_outside))

    def conductor_only(self) -> "PanelMesh":
        keep = self.owner > 0
        return replace(
            self,
            centroid=self.centroid[keep],
            u=self.u[keep],
            v=self.v[keep],
            normal=self.normal[keep],
            half_u=self.half_u[keep],
            half_v=self.half_v[keep],
            owner=self.owner[keep],
            face=self.face[keep],
            slab_side=self.slab_side[keep],
        )


def _subdivide(p: float, q: float, h: float, count: int | None = None) -> list[float]:
    k = count if count is not None else max(1, math.ceil((q - p) / h - 1e-9))
    return [p + (q - p) * i / k for i in range(k + 1)]


def _edges(breaks, counts, h):
    """Cell edges over consecutive breakpoints; ``None`` counts follow ``h``."""
    out = [breaks[0]]
    for p, q, cnt in zip(breaks[:-1], breaks[1:], counts):
        out.extend(_subdivide(p, q, h, cnt)[1:])
    return np.array(out)


_AXES = {
    "z": (np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.array([0, 0, 1.0])),
    "x": (np.array([0, 1.0, 0]), np.array([0, 0, 1.0]), np.array([1.0, 0, 0])),
    "y": (np.array([1.0, 0, 0]), np.array([0, 0, 1.0]), np.array([0, 1.0, 0])),
}


def mesh(geom: CouplerGeometry, refinement: int, max_panels: int = DEFAULT_PANEL_BUDGET) -> PanelMesh:
    """Panel the four plates (``n x n`` each) and, if enabled, the slab boundary."""
    n = int(refinement)
    if n < 1 or n != refinement:
        raise ValueError(f"refinement must be a positive integer, got {refinement!r}")
    a, s, d, m = geom.plate_side, geom.side_spacing, geom.gap, geom.slab_margin
    h = a / n

    rows = []  # (cx, cy, cz, axis, sign, hu, hv, owner, face)

    plate_edges = _subdivide(-a / 2, a / 2, h, n)
    for idx, (x0, x1, y0, y1, z) in enumerate(geom.plate_bounds(), start=1):
        sign = 1.0 if z < 0 else -1.0
        xs = _subdivide(x0, x1, h, n)
        for i in range(n):
            for j in range(n):
                rows.append((
                    0.5 * (xs[i] + xs[i + 1]), 0.5 * (plate_edges[j] + plate_edges[j + 1]), z,
                    "z", sign, 0.5 * (xs[i + 1] - xs[i]), 0.5 * (plate_edges[j + 1] - plate_edges[j]),
                    idx, -1,
                ))

    if geom.slab_enabled:
        xb = [-(s / 2 + a), -s / 2, s / 2, s / 2 + a]
        yb = [-a / 2, a / 2]
        xcounts, ycounts = [n, None, n], [n]
        if m > 0:
            xb = [xb[0] - m] + xb + [xb[-1] + m]
            yb = [yb[0] - m] + yb + [yb[-1] + m]
            xcounts = [None] + xcounts + [None]
            ycounts = [None] + ycounts + [None]
        xe = _edges(xb, xcounts, h)
        ye = _edges(yb, ycounts, h)
        ze = _edges([-d / 2, d / 2], [None], h)

        xc, hx = 0.5 * (xe[1:] + xe[:-1]), 0.5 * np.diff(xe)
        yc, hy = 0.5 * (ye[1:] + ye[:-1]), 0.5 * np.diff(ye)
        zc, hz = 0.5 * (ze[1:] + ze[:-1]), 0.5 * np.diff(ze)
        in_plate_x = (np.abs(xc) > s / 2) & (np.abs(xc) < s / 2 + a)
        in_plate_y = np.abs(yc) < a / 2

        for face_id, (z, sign) in enumerate(((-d / 2, -1.0), (d / 2, 1.0))):
            for i in range(len(xc)):
                for j in range(len(yc)):
                    if in_plate_x[i] and in_plate_y[j]:
                        continue
                    rows.append((xc[i], yc[j], z, "z", sign, hx[i], hy[j], INTERFACE_OWNER, face_id))
        for face_id, (x, sign) in zip((2, 3), ((xe[0], -1.0), (xe[-1], 1.0))):
            for j in range(len(yc)):
                for k in range(len(zc)):
                    rows.append((x, yc[j], zc[k], "x", sign, hy[j], hz[k], INTERFACE_OWNER, face_id))
        for face_id, (y, sign) in zip((4, 5), ((ye[0], -1.0), (ye[-1], 1.0))):
            for i in range(len(xc)):
                for k in range(len(zc)):
                    rows.append((xc[i], y, zc[k], "y", sign, hx[i], hz[k], INTERFACE_OWNER, face_id))

    if len(rows) > max_panels:
        raise MeshBudgetExceeded(f"{len(rows)} panels exceed the budget of {max_panels}")

    count = len(rows)
    centroid = np.empty((count, 3))
    u = np.empty((count, 3))
    v = np.empty((count, 3))
    normal = np.empty((count, 3))
    half_u = np.empty(count)
    half_v = np.empty(count)
    owner = np.empty(count, dtype=np.int64)
    face = np.empty(count, dtype=np.int64)
    # every plate's gap-facing side touches the slab when it exists
    slab_side = (np.arange(count) < 4 * n * n) & geom.slab_enabled
    for i, (cx, cy, cz, axis, sign, hu, hv, own, fid) in enumerate(rows):
        eu, ev, en = _AXES[axis]
        centroid[i] = (cx, cy, cz)
        u[i], v[i], normal[i] = eu, ev, sign * en
        half_u[i], half_v[i] = hu, hv
        owner[i], face[i] = own, fid

    return PanelMesh(
        centroid=centroid, u=u, v=v, normal=normal, half_u=half_u, half_v=half_v,
        owner=owner, face=face, slab_side=slab_side, geometry=geom, refinement=n,
    )
