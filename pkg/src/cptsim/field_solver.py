"""Method-of-moments capacitance extraction for the four-plate coupler.

Unknowns are piecewise-constant surface charge densities, one per panel,
radiating in vacuum. Conductor panels carry the total (free plus bound)
charge of the zero-thickness plate; interface panels carry the bound charge
on the slab boundary. Collocation at panel centroids gives

* conductor rows: potential equals the prescribed plate voltage;
* interface rows: ``sigma_b - 2*eps0*lam*E_n = 0`` with
  ``lam = (eps_in - eps_out) / (eps_in + eps_out)`` and ``E_n`` the principal
  value of the normal field (normal pointing out of the slab), which is the
  discrete form of ``eps_out*E_n(out) = eps_in*E_n(in)``.

The free charge on a plate panel follows from Gauss's law on both faces,
``q_free = (eps_+ + eps_-)/2 * sigma + eps0*(eps_+ - eps_-)*E_n``, where ``+``
is the normal side of the panel. Exciting each plate at 1 V with the others
grounded yields one column of the Maxwell matrix.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import LinearOperator, gmres

from . import kernels
from .analytic import EPS0
from .errors import (
    CPTError,
    DegenerateCoupler,
    NonConvergedSolve,
    SignConventionViolation,
    SingularSystem,
)
from .geometry import CouplerGeometry, PanelMesh, mesh as build_mesh
from .materials import BUILTIN_MATERIALS, Material

log = logging.getLogger(__name__)

DEFAULT_FAR_FACTOR = 3.0
DENSE_PANEL_LIMIT = 6000
PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
NETWORK_KEYS = ("c12", "c13", "c14", "c23", "c24", "c34")
AMBIENT = BUILTIN_MATERIALS[0]  # air


@dataclass(frozen=True)
class Network:
    """The six two-terminal capacitances between plates, in farads."""

    c12: float
    c13: float
    c14: float
    c23: float
    c24: float
    c34: float

    def as_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in NETWORK_KEYS}

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, k) for k in NETWORK_KEYS)

    @classmethod
    def from_facing(cls, c13: float, c24: float) -> "Network":
        return cls(0.0, c13, 0.0, 0.0, c24, 0.0)


@dataclass(frozen=True)
class PiModel:
    c_p: float
    c_s: float
    c_m: float
    k_c: float


@dataclass(frozen=True)
class CapMatrix:
    maxwell: np.ndarray
    network: Network
    raw: np.ndarray = field(repr=False)
    asymmetry: float = 0.0
    n_panels: int = 0
    solver: str = "dense"

    @property
    def self_capacitance(self) -> np.ndarray:
        return self_capacitances(self.maxwell)

    def to_json(self) -> dict:
        return {
            "maxwell": [float(x) for x in self.maxwell.ravel()],
            "network": self.network.as_dict(),
            "asymmetry": self.asymmetry,
        }


def self_capacitances(maxwell: np.ndarray) -> np.ndarray:
    """Capacitance of each plate to infinity (row sums); diagnostic only."""
    return np.asarray(maxwell).sum(axis=1)


def to_network(maxwell, tol: float = 1e-3) -> Network:
    """Map a Maxwell matrix to the six pairwise capacitances ``C_ij = -M_ij``.

    Off-diagonal entries that are positive by no more than ``tol`` times the
    largest entry are treated as roundoff and clamped to zero.
    """
    m = np.asarray(maxwell, dtype=float)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 Maxwell matrix, got shape {m.shape}")
    scale = np.abs(m).max()
    if scale == 0:
        return Network(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    if np.any(np.diag(m) < -tol * scale):
        raise SignConventionViolation("Maxwell matrix has a negative diagonal entry")
    values = []
    for i, j in PAIRS:
        mij = 0.5 * (m[i, j] + m[j, i])
        if mij > tol * scale:
            raise SignConventionViolation(
                f"off-diagonal entry ({i + 1},{j + 1}) = {mij:.6g} is positive"
            )
        values.append(max(0.0, -mij))
    return Network(*values)


def reduce_pi(net: Network) -> PiModel:
    """Reduce the six-capacitance coupler to its two-port Pi equivalent.

    The coplanar leakage capacitances appear directly across the ports, so
    ``c12`` adds to ``c_p`` and ``c34`` to ``c_s``.
    """
    c12, c13, c14, c23, c24, c34 = net.as_tuple()
    total = c13 + c14 + c23 + c24
    if not total > 0:
        raise DegenerateCoupler("C13 + C14 + C23 + C24 must be > 0")
    c_p = c12 + (c13 + c14) * (c23 + c24) / total
    c_s = c34 + (c13 + c23) * (c14 + c24) / total
    c_m = (c13 * c24 - c14 * c23) / total
    denom = math.sqrt(c_p * c_s)
    k_c = abs(c_m) / denom if denom > 0 else 0.0
    return PiModel(c_p, c_s, c_m, k_c)


# ---------------------------------------------------------------- solver


def _check_mesh(mesh: PanelMesh):
    area = mesh.area
    if len(mesh) == 0 or mesh.n_conductor == 0:
        raise SingularSystem("mesh has no conductor panels")
    if not np.all(np.isfinite(mesh.centroid)) or np.any(~(area > 0)):
        raise SingularSystem("mesh has degenerate panels (zero area or non-finite)")
    owners = set(np.unique(mesh.owner[mesh.owner > 0]).tolist())
    if owners != {1, 2, 3, 4}:
        raise SingularSystem(f"expected panels on conductors 1-4, found {sorted(owners)}")


class _SystemOperator:
    """Row-blocked, matrix-free application of the collocation system."""

    def __init__(self, mesh, lam, far_factor, backend, block=512):
        self.mesh = mesh
        self.lam = lam
        self.far_factor = far_factor
        self.backend = backend
        self.block = block
        self.cond = np.flatnonzero(mesh.owner > 0)
        self.intf = np.flatnonzero(mesh.owner <= 0)

    def rows(self, idx):
        m = self.mesh
        if m.owner[idx[0]] > 0:
            return kernels.potential_block(m.centroid[idx], m, self.far_factor, self.backend)
        blk = -2.0 * self.lam * kernels.field_block(
            m.centroid[idx], m.normal[idx], m, self.far_factor, self.backend)
        blk[np.arange(len(idx)), idx] += 1.0
        return blk

    def matmat(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty((len(self.mesh),) + x.shape[1:])
        for group in (self.cond, self.intf):
            for start in range(0, len(group), self.block):
                idx = group[start:start + self.block]
                out[idx] = self.rows(idx) @ x
        return out

    def diagonal(self):
        # self potential of a rectangle at its centroid; interface self field is zero
        m = self.mesh
        hu, hv = m.half_u, m.half_v
        diag = np.ones(len(m))
        diag[self.cond] = (hu * np.arcsinh(hv / hu) + hv * np.arcsinh(hu / hv))[self.cond] / np.pi
        return diag


def _solve_dense(op: _SystemOperator, rhs: np.ndarray) -> np.ndarray:
    n = len(op.mesh)
    a = np.empty((n, n))
    for group in (op.cond, op.intf):
        for start in range(0, len(group), op.block):
            idx = group[start:start + op.block]
            a[idx] = op.rows(idx)
    try:
        lu = scipy.linalg.lu_factor(a, check_finite=True)
        if np.any(np.diag(lu[0]) == 0):
            raise SingularSystem("collocation matrix is singular")
        sol = scipy.linalg.lu_solve(lu, rhs)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularSystem(str(exc)) from exc
    return sol


def _solve_iterative(op: _SystemOperator, rhs: np.ndarray, rtol: float, maxiter: int) -> np.ndarray:
    n = len(op.mesh)
    lin = LinearOperator((n, n), matvec=op.matmat, dtype=float)
    inv_diag = 1.0 / op.diagonal()
    precond = LinearOperator((n, n), matvec=lambda x: inv_diag * x, dtype=float)
    sol = np.empty_like(rhs)
    for k in range(rhs.shape[1]):
        x, info = gmres(lin, rhs[:, k], M=precond, rtol=rtol, atol=0.0,
                        restart=min(n, 200), maxiter=maxiter)
        if info != 0:
            raise NonConvergedSolve(f"GMRES did not converge for plate {k + 1} (info={info})")
        sol[:, k] = x
    return sol


def extract(
    mesh: PanelMesh,
    medium: Material,
    ambient: Material | None = None,
    *,
    far_factor: float = DEFAULT_FAR_FACTOR,
    dense_limit: int = DENSE_PANEL_LIMIT,
    backend: str | None = None,
    rtol: float = 1e-10,
    maxiter: int = 50,
) -> CapMatrix:
    """Extract the 4x4 Maxwell capacitance matrix of a panelled coupler.

    Parameters
    ----------
    mesh : PanelMesh
        Output of :func:`cptsim.geometry.mesh`.
    medium : Material
        Dielectric filling the slab, or all of space when the slab is off.
    ambient : Material, optional
        Medium surrounding the slab; defaults to air.
    dense_limit : int
        Above this panel count the system is solved matrix-free with GMRES.
    """
    _check_mesh(mesh)
    ambient = ambient if ambient is not None else AMBIENT
    eps_in = medium.eps_r
    eps_out = ambient.eps_r
    if not mesh.geometry.slab_enabled or mesh.n_interface == 0 or eps_in == eps_out:
        # no dielectric contrast: bound charge vanishes identically
        mesh = mesh.conductor_only()
        eps_out = eps_in
    mesh = mesh.bind_media(eps_in, eps_out)

    lam = (eps_in - eps_out) / (eps_in + eps_out)
    op = _SystemOperator(mesh, lam, far_factor, backend)
    n = len(mesh)
    rhs = np.zeros((n, 4))
    for k in range(4):
        rhs[mesh.owner == k + 1, k] = 1.0

    if n <= dense_limit:
        solver = "dense"
        sigma = _solve_dense(op, rhs)
    else:
        solver = "iterative"
        log.info("using matrix-free GMRES for %d panels", n)
        sigma = _solve_iterative(op, rhs, rtol, maxiter)
    if not np.all(np.isfinite(sigma)):
        raise SingularSystem("non-finite charge densities")

    cond = op.cond
    eps_plus = np.where(mesh.slab_side[cond], eps_in, eps_out)[:, None]
    free = 0.5 * (eps_plus + eps_out) * sigma[cond]
    if eps_in != eps_out:
        en = np.empty((len(cond), 4))
        for start in range(0, len(cond), op.block):
            idx = cond[start:start + op.block]
            en[start:start + op.block] = kernels.field_block(
                mesh.centroid[idx], mesh.normal[idx], mesh, far_factor, backend) @ sigma
        free += (eps_plus - eps_out) * en

    area = mesh.area[cond]
    owner = mesh.owner[cond]
    raw = np.empty((4, 4))
    for i in range(4):
        sel = owner == i + 1
        raw[i] = EPS0 * (area[sel, None] * free[sel]).sum(axis=0)

    scale = np.abs(raw).max()
    asym = float(np.abs(raw - raw.T).max() / scale) if scale > 0 else 0.0
    maxwell = 0.5 * (raw + raw.T)
    return CapMatrix(maxwell=maxwell, network=to_network(maxwell), raw=raw,
                     asymmetry=asym, n_panels=n, solver=solver)


def extract_geometry(geom: CouplerGeometry, medium: Material, refinement: int,
                     ambient: Material | None = None, **kwargs) -> CapMatrix:
    max_panels = kwargs.pop("max_panels", None)
    m = build_mesh(geom, refinement) if max_panels is None else build_mesh(geom, refinement, max_panels)
    return extract(m, medium, ambient, **kwargs)


@dataclass(frozen=True)
class CouplingPoint:
    distance: float
    pi: PiModel | None
    cap: CapMatrix | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def coupling_sweep(
    geometry: CouplerGeometry,
    distances: Sequence[float],
    medium: Material,
    refinement: int,
    ambient: Material | None = None,
    **kwargs,
) -> list[CouplingPoint]:
    """Extract and reduce the coupler at each gap distance.

    ``geometry`` supplies everything but the gap. A row whose extraction fails
    is kept with its error message.
    """
    ds = [float(d) for d in distances]
    if not ds or any(d <= 0 for d in ds):
        raise ValueError("distances must be non-empty and positive")
    if any(b < a for a, b in zip(ds, ds[1:])):
        raise ValueError("distances must be ascending")
    rows = []
    for d in ds:
        try:
            cap = extract_geometry(geometry.with_gap(d), medium, refinement, ambient, **kwargs)
            rows.append(CouplingPoint(d, reduce_pi(cap.network), cap))
        except (CPTError, np.linalg.LinAlgError) as exc:
            log.warning("extraction failed at d=%g m: %s", d, exc)
            rows.append(CouplingPoint(d, None, None, f"{type(exc).__name__}: {exc}"))
    return rows
