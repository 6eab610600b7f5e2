# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-sample estimator pipelines (C backend).

Mirrors ``_pipeline_numpy.compute_values`` chain-for-chain; the two
backends must agree to floating-point roundoff.  Kept as straight scalar
code so each sample is a single pass with no temporaries.
"""

from libc.math cimport cos, sin, sqrt

import numpy as np


cdef inline void _interaction(double angle, bint exact, double* s, double* c) noexcept nogil:
    if exact:
        s[0] = sin(angle)
        c[0] = cos(angle)
    else:
        s[0] = angle
        c[0] = 1.0


def compute_values(
    int scheme_index,
    const double[:, ::1] normals,
    const double[::1] atoms_j,
    const double[::1] atoms_l,
    double n_photons,
    double chi,
    double alpha,
    double phase_j,
    double phase_l,
    double varphi,
    bint exact,
    bint want_theta,
    bint ee_second_pulse=True,
):
    """Per-sample phase estimates for one chunk; see the numpy twin."""
    cdef Py_ssize_t m = normals.shape[0]
    if normals.shape[1] != 18:
        raise ValueError("normals must have 18 slots per sample")
    if atoms_j.shape[0] != m or atoms_l.shape[0] != m:
        raise ValueError("atom-number arrays must match the sample count")
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr

    cdef double sin_pj = sin(phase_j)
    cdef double cos_pj = cos(phase_j)
    cdef double sin_pl = sin(phase_l)
    cdef double cos_pl = cos(phase_l)
    cdef double half_n = 0.5 * n_photons
    cdef double shot = sqrt(0.25 * n_photons)
    cdef double gain = 2.0 / (n_photons * chi) if chi != 0.0 else 0.0
    cdef double cos_v = cos(varphi)
    cdef double sin_v = sin(varphi)

    cdef Py_ssize_t i
    cdef double n_j, n_l, sigma_j, sigma_l, jx, jy, jz, lx, ly, lz
    cdef double w_j, w_l, meas_nj, meas_nl, meas_m, noise_j, noise_l
    cdef double sy, sz, ty, tz, sry, srz, trr
    cdef double sy_rec, ty_rec, sry_rec, try_rec
    cdef double s_a, c_a, jx1, lx1, out_j, out_l
    cdef double tmp, phi_plus, theta_hat, beta_hat

    with nogil:
        for i in range(m):
            n_j = atoms_j[i]
            n_l = atoms_l[i]
            sigma_j = sqrt(0.25 * n_j)
            sigma_l = sqrt(0.25 * n_l)
            jy = sigma_j * normals[i, 0]
            jz = sigma_j * normals[i, 1]
            ly = sigma_l * normals[i, 2]
            lz = sigma_l * normals[i, 3]

            if alpha > 0.0:
                noise_j = sqrt(alpha * n_j)
                noise_l = sqrt(alpha * n_l)
                w_j = noise_j * normals[i, 12]
                w_l = noise_l * normals[i, 13]
                meas_nj = n_j + noise_j * normals[i, 14]
                meas_nl = n_l + noise_l * normals[i, 15]
            else:
                w_j = 0.0
                w_l = 0.0
                meas_nj = n_j
                meas_nl = n_l

            if scheme_index == 0:  # CS
                out_j = -(0.5 * n_j * sin_pj + jy * cos_pj)
                out_l = -(0.5 * n_l * sin_pl + ly * cos_pl)
                out[i] = -(out_j + w_j) / meas_nj + (out_l + w_l) / meas_nl
                continue

            if scheme_index == 1 or scheme_index == 2:  # SS / SS_PLUS
                sy = shot * normals[i, 4]
                sz = shot * normals[i, 5]
                ty = shot * normals[i, 6]
                tz = shot * normals[i, 7]
                _interaction(chi * jz, exact, &s_a, &c_a)
                sy_rec = half_n * s_a + sy * c_a
                _interaction(chi * sz, exact, &s_a, &c_a)
                jx1 = 0.5 * n_j * c_a - jy * s_a
                _interaction(chi * lz, exact, &s_a, &c_a)
                ty_rec = half_n * s_a + ty * c_a
                _interaction(chi * tz, exact, &s_a, &c_a)
                lx1 = 0.5 * n_l * c_a - ly * s_a
                out_j = jz * cos_pj - jx1 * sin_pj
                out_l = lz * cos_pl - lx1 * sin_pl
                if scheme_index == 1:
                    out[i] = (
                        -((out_j + w_j) - gain * sy_rec) / meas_nj
                        + ((out_l + w_l) - gain * ty_rec) / meas_nl
                    )
                else:
                    sry = shot * normals[i, 8]
                    trr = shot * normals[i, 10]
                    _interaction(chi * out_j, exact, &s_a, &c_a)
                    sry_rec = half_n * s_a + sry * c_a
                    _interaction(chi * out_l, exact, &s_a, &c_a)
                    try_rec = half_n * s_a + trr * c_a
                    out[i] = (
                        -gain * (sry_rec - sy_rec) / meas_nj
                        + gain * (try_rec - ty_rec) / meas_nl
                    )
                continue

            if scheme_index == 3 or scheme_index == 4 or scheme_index == 5:
                sy = shot * normals[i, 4]
                sz = shot * normals[i, 5]
                _interaction(chi * (jz + lz), exact, &s_a, &c_a)
                sy_rec = half_n * s_a + sy * c_a
                _interaction(chi * sz, exact, &s_a, &c_a)
                jx1 = 0.5 * n_j * c_a - jy * s_a
                lx1 = 0.5 * n_l * c_a - ly * s_a
                out_j = jz * cos_pj - jx1 * sin_pj
                out_l = lz * cos_pl + lx1 * sin_pl
                meas_m = 0.5 * (meas_nj + meas_nl)
                if scheme_index == 3:  # JS
                    out[i] = -(
                        (out_j + w_j) / meas_nj
                        + (out_l + w_l) / meas_nl
                        - gain * sy_rec / meas_m
                    )
                    continue
                sry = shot * normals[i, 8]
                _interaction(chi * (out_j + out_l), exact, &s_a, &c_a)
                sry_rec = half_n * s_a + sry * c_a
                phi_plus = -gain * (sry_rec - sy_rec) / meas_m
                if scheme_index == 4:  # JS_PLUS
                    out[i] = phi_plus
                    continue
                theta_hat = -(out_j + w_j) / meas_nj + (out_l + w_l) / meas_nl
                beta_hat = (meas_nj - meas_nl) / (meas_nj + meas_nl)
                out[i] = phi_plus - beta_hat * theta_hat
                continue

            # EE
            jx = 0.5 * n_j
            lx = 0.5 * n_l
            sy = shot * normals[i, 4]
            sz = shot * normals[i, 5]
            ty = shot * normals[i, 6]
            tz = shot * normals[i, 7]
            sry = shot * normals[i, 8]
            srz = shot * normals[i, 9]
            trr = shot * normals[i, 10]

            # 1) joint S pass
            _interaction(chi * (jz + lz), exact, &s_a, &c_a)
            sy_rec = half_n * s_a + sy * c_a
            _interaction(chi * sz, exact, &s_a, &c_a)
            tmp = jx * c_a - jy * s_a
            jy = jx * s_a + jy * c_a
            jx = tmp
            tmp = lx * c_a - ly * s_a
            ly = lx * s_a + ly * c_a
            lx = tmp
            # 2) basis swaps
            tmp = jy
            jy = -jz
            jz = tmp
            tmp = ly
            ly = lz
            lz = -tmp
            # 3) joint T pass (omitted when toggled off; the phi chain's
            # mean must be invariant under the toggle)
            if ee_second_pulse:
                _interaction(chi * (jz + lz), exact, &s_a, &c_a)
                ty_rec = half_n * s_a + ty * c_a
                _interaction(chi * tz, exact, &s_a, &c_a)
                tmp = jx * c_a - jy * s_a
                jy = jx * s_a + jy * c_a
                jx = tmp
                tmp = lx * c_a - ly * s_a
                ly = lx * s_a + ly * c_a
                lx = tmp
            else:
                ty_rec = 0.0
            # 4) tilted bodies
            tmp = jy * cos_v - jz * sin_v
            jz = jy * sin_v + jz * cos_v
            jy = tmp
            tmp = jx * cos_pj - jy * sin_pj
            jy = jx * sin_pj + jy * cos_pj
            jx = tmp
            tmp = jy * cos_v + jz * sin_v
            jz = -jy * sin_v + jz * cos_v
            jy = tmp
            tmp = jy
            jy = jz
            jz = -tmp

            tmp = ly * cos_v - lz * sin_v
            lz = ly * sin_v + lz * cos_v
            ly = tmp
            tmp = lx * cos_pl - ly * sin_pl
            ly = lx * sin_pl + ly * cos_pl
            lx = tmp
            tmp = ly * cos_v + lz * sin_v
            lz = -ly * sin_v + lz * cos_v
            ly = tmp
            tmp = ly
            ly = -lz
            lz = tmp
            # 5) joint S_r read-out and its back-action
            _interaction(chi * (jz + lz), exact, &s_a, &c_a)
            sry_rec = half_n * s_a + sry * c_a
            _interaction(chi * srz, exact, &s_a, &c_a)
            tmp = jx * c_a - jy * s_a
            jy = jx * s_a + jy * c_a
            jx = tmp
            tmp = lx * c_a - ly * s_a
            ly = lx * s_a + ly * c_a
            lx = tmp
            # 6) second swaps
            tmp = jy
            jy = -jz
            jz = tmp
            tmp = ly
            ly = lz
            lz = -tmp
            # 7) joint T_r read-out
            _interaction(chi * (jz + lz), exact, &s_a, &c_a)
            try_rec = half_n * s_a + trr * c_a

            meas_m = 0.5 * (meas_nj + meas_nl)
            if want_theta:
                out[i] = -(gain / sin_v) * (try_rec - ty_rec) / meas_m
            else:
                out[i] = -(gain / cos_v) * (sry_rec - sy_rec) / meas_m

    return out_arr
