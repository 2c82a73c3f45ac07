"""Pure NumPy panel-interaction kernels (fallback for the compiled core).

Both kernels integrate over flat rectangular source panels with unit
surface density and include the ``1/(4*pi)`` factor, leaving ``eps0`` to the
caller:

    potential_block[i, j] = 1/(4 pi) * int_j 1/|r_i - r'| dA'
    field_block[i, j]     = 1/(4 pi) * int_j (r_i - r') . n_i / |r_i - r'|^3 dA'

Pairs whose centroid distance exceeds ``far_factor`` source diameters use the
centroid (point charge) approximation; all others use the closed-form
rectangle integrals. A target lying in the plane of a source panel gets the
principal value of the normal field, which is zero.
"""

from __future__ import annotations

import numpy as np

INV_4PI = 1.0 / (4.0 * np.pi)
_CHUNK = 256


def _local(targets, centroid, u, v, normal):
    p = targets[:, None, :] - centroid[None, :, :]
    x = np.einsum("mnk,nk->mn", p, u)
    y = np.einsum("mnk,nk->mn", p, v)
    z = np.einsum("mnk,nk->mn", p, normal)
    return p, x, y, z


def _corner_offsets(x, y, half_u, half_v):
    # source extent relative to the target, in the source frame
    a = (-half_u[None, :] - x, half_u[None, :] - x)
    b = (-half_v[None, :] - y, half_v[None, :] - y)
    return a, b


def _safe_asinh(num, den):
    out = np.zeros(np.broadcast(num, den).shape)
    np.divide(num, den, out=out, where=den > 0)
    return np.arcsinh(out)


def _rect_potential(x, y, z, half_u, half_v):
    a, b = _corner_offsets(x, y, half_u, half_v)
    az = np.abs(z)
    total = np.zeros_like(x)
    for i in (0, 1):
        for j in (0, 1):
            ai, bj = a[i], b[j]
            r = np.sqrt(ai * ai + bj * bj + z * z)
            term = ai * _safe_asinh(bj, np.sqrt(ai * ai + z * z))
            term += bj * _safe_asinh(ai, np.sqrt(bj * bj + z * z))
            with np.errstate(divide="ignore", invalid="ignore"):
                tz = np.where(az > 0, az * np.arctan(ai * bj / (az * r)), 0.0)
            term -= tz
            total += term if i == j else -term
    return total


def _rect_field(x, y, z, half_u, half_v, cu, cv, cn):
    """Field of the source panel projected on the target normal.

    ``cu, cv, cn`` are the target normal's components along the source axes.
    """
    a, b = _corner_offsets(x, y, half_u, half_v)
    scale = np.maximum(half_u, half_v)[None, :] * 1e-14
    total = np.zeros_like(x)
    inplane = (np.abs(cu) > 0) | (np.abs(cv) > 0)
    for i in (0, 1):
        for j in (0, 1):
            ai, bj = a[i], b[j]
            r = np.sqrt(ai * ai + bj * bj + z * z)
            with np.errstate(divide="ignore", invalid="ignore"):
                en = np.where(z != 0, np.arctan(ai * bj / (z * r)), 0.0)
            term = cn * en
            if inplane.any():
                rho_a = np.maximum(np.sqrt(ai * ai + z * z), scale)
                rho_b = np.maximum(np.sqrt(bj * bj + z * z), scale)
                eu = np.arcsinh(bj / rho_a)
                ev = np.arcsinh(ai / rho_b)
                term = term + np.where(inplane, cu * eu + cv * ev, 0.0)
            total += term if i == j else -term
    return total


# regular grids put many pairs exactly on the threshold; ties go to the exact formula
TIE_GUARD = 1.0 + 1e-9


def _far_mask(p, half_u, half_v, far_factor):
    dist = np.sqrt(np.einsum("mnk,mnk->mn", p, p))
    diam = 2.0 * np.sqrt(half_u * half_u + half_v * half_v)
    return dist, dist > (far_factor * TIE_GUARD) * diam[None, :]


def potential_block(targets, centroid, u, v, normal, half_u, half_v, far_factor=3.0):
    targets = np.ascontiguousarray(targets, dtype=float)
    out = np.empty((targets.shape[0], centroid.shape[0]))
    area = 4.0 * half_u * half_v
    for start in range(0, targets.shape[0], _CHUNK):
        t = targets[start:start + _CHUNK]
        p, x, y, z = _local(t, centroid, u, v, normal)
        dist, far = _far_mask(p, half_u, half_v, far_factor)
        near_val = _rect_potential(x, y, z, half_u, half_v)
        with np.errstate(divide="ignore"):
            far_val = area[None, :] / dist
        out[start:start + _CHUNK] = INV_4PI * np.where(far, far_val, near_val)
    return out


def field_block(targets, target_normals, centroid, u, v, normal, half_u, half_v, far_factor=3.0):
    targets = np.ascontiguousarray(targets, dtype=float)
    target_normals = np.ascontiguousarray(target_normals, dtype=float)
    out = np.empty((targets.shape[0], centroid.shape[0]))
    area = 4.0 * half_u * half_v
    for start in range(0, targets.shape[0], _CHUNK):
        t = targets[start:start + _CHUNK]
        tn = target_normals[start:start + _CHUNK]
        p, x, y, z = _local(t, centroid, u, v, normal)
        cu = tn @ u.T
        cv = tn @ v.T
        cn = tn @ normal.T
        dist, far = _far_mask(p, half_u, half_v, far_factor)
        near_val = _rect_field(x, y, z, half_u, half_v, cu, cv, cn)
        pn = np.einsum("mnk,mk->mn", p, tn)
        with np.errstate(divide="ignore", invalid="ignore"):
            far_val = area[None, :] * pn / dist**3
        out[start:start + _CHUNK] = INV_4PI * np.where(far, far_val, near_val)
    return out
