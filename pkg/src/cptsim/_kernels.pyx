# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled panel-interaction kernels.

Same contract as :mod:`cptsim._kernels_py`; see that module for the formulas.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, atan, asinh, M_PI

cnp.import_array()

cdef double INV_4PI = 1.0 / (4.0 * M_PI)
cdef double TIE_GUARD = 1.0 + 1e-9  # see _kernels_py


cdef inline double _safe_asinh(double num, double den) nogil:
    if den > 0.0:
        return asinh(num / den)
    return 0.0


cdef inline double _rect_potential(double x, double y, double z, double hu, double hv) nogil:
    cdef double az = fabs(z)
    cdef double total = 0.0, ai, bj, r, term
    cdef int i, j
    for i in range(2):
        ai = (hu if i else -hu) - x
        for j in range(2):
            bj = (hv if j else -hv) - y
            r = sqrt(ai * ai + bj * bj + z * z)
            term = ai * _safe_asinh(bj, sqrt(ai * ai + z * z))
            term += bj * _safe_asinh(ai, sqrt(bj * bj + z * z))
            if az > 0.0:
                term -= az * atan(ai * bj / (az * r))
            if i == j:
                total += term
            else:
                total -= term
    return total


cdef inline double _rect_field(double x, double y, double z, double hu, double hv,
                               double cu, double cv, double cn) nogil:
    cdef double total = 0.0, ai, bj, r, term, rho_a, rho_b
    cdef double floor = (hu if hu > hv else hv) * 1e-14
    cdef bint inplane = cu != 0.0 or cv != 0.0
    cdef int i, j
    for i in range(2):
        ai = (hu if i else -hu) - x
        for j in range(2):
            bj = (hv if j else -hv) - y
            term = 0.0
            if z != 0.0:
                r = sqrt(ai * ai + bj * bj + z * z)
                term = cn * atan(ai * bj / (z * r))
            if inplane:
                rho_a = sqrt(ai * ai + z * z)
                rho_b = sqrt(bj * bj + z * z)
                if rho_a < floor:
                    rho_a = floor
                if rho_b < floor:
                    rho_b = floor
                term += cu * asinh(bj / rho_a) + cv * asinh(ai / rho_b)
            if i == j:
                total += term
            else:
                total -= term
    return total


def potential_block(const double[:, ::1] targets, const double[:, ::1] centroid,
                    const double[:, ::1] u, const double[:, ::1] v, const double[:, ::1] normal,
                    const double[::1] half_u, const double[::1] half_v, double far_factor=3.0):
    cdef Py_ssize_t m = targets.shape[0], n = centroid.shape[0], i, j
    out_arr = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double px, py, pz, x, y, z, dist, diam, area
    with nogil:
        for i in range(m):
            for j in range(n):
                px = targets[i, 0] - centroid[j, 0]
                py = targets[i, 1] - centroid[j, 1]
                pz = targets[i, 2] - centroid[j, 2]
                dist = sqrt(px * px + py * py + pz * pz)
                diam = 2.0 * sqrt(half_u[j] * half_u[j] + half_v[j] * half_v[j])
                if dist > far_factor * TIE_GUARD * diam:
                    area = 4.0 * half_u[j] * half_v[j]
                    out[i, j] = INV_4PI * area / dist
                else:
                    x = px * u[j, 0] + py * u[j, 1] + pz * u[j, 2]
                    y = px * v[j, 0] + py * v[j, 1] + pz * v[j, 2]
                    z = px * normal[j, 0] + py * normal[j, 1] + pz * normal[j, 2]
                    out[i, j] = INV_4PI * _rect_potential(x, y, z, half_u[j], half_v[j])
    return out_arr


def field_block(const double[:, ::1] targets, const double[:, ::1] target_normals,
                const double[:, ::1] centroid,
                const double[:, ::1] u, const double[:, ::1] v, const double[:, ::1] normal,
                const double[::1] half_u, const double[::1] half_v, double far_factor=3.0):
    cdef Py_ssize_t m = targets.shape[0], n = centroid.shape[0], i, j
    out_arr = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double px, py, pz, x, y, z, dist, diam, area, pn, cu, cv, cn
    cdef double tx, ty, tz
    with nogil:
        for i in range(m):
            tx = target_normals[i, 0]
            ty = target_normals[i, 1]
            tz = target_normals[i, 2]
            for j in range(n):
                px = targets[i, 0] - centroid[j, 0]
                py = targets[i, 1] - centroid[j, 1]
                pz = targets[i, 2] - centroid[j, 2]
                dist = sqrt(px * px + py * py + pz * pz)
                diam = 2.0 * sqrt(half_u[j] * half_u[j] + half_v[j] * half_v[j])
                if dist > far_factor * TIE_GUARD * diam:
                    area = 4.0 * half_u[j] * half_v[j]
                    pn = px * tx + py * ty + pz * tz
                    out[i, j] = INV_4PI * area * pn / (dist * dist * dist)
                else:
                    x = px * u[j, 0] + py * u[j, 1] + pz * u[j, 2]
                    y = px * v[j, 0] + py * v[j, 1] + pz * v[j, 2]
                    z = px * normal[j, 0] + py * normal[j, 1] + pz * normal[j, 2]
                    cu = tx * u[j, 0] + ty * u[j, 1] + tz * u[j, 2]
                    cv = tx * v[j, 0] + ty * v[j, 1] + tz * v[j, 2]
                    cn = tx * normal[j, 0] + ty * normal[j, 1] + tz * normal[j, 2]
                    out[i, j] = INV_4PI * _rect_field(x, y, z, half_u[j], half_v[j], cu, cv, cn)
    return out_arr
