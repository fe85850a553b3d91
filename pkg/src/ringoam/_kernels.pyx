# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled mode-coupling kernel and interaction-picture integrators.

State layout is a C-contiguous ``complex128`` array of shape ``(2, K)`` with
``K = 2M + 1``; row 0 is the upper ring, row 1 the lower ring, and column
``j`` holds mode ``m = j - M``.  ``_fallback.py`` mirrors every routine here.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, fabs, pow, ceil
from libc.stdlib cimport malloc, free

cnp.import_array()

ctypedef double complex cplx

cdef double[7] DP_C = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0]
cdef double[7][6] DP_A = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
]
cdef double[7] DP_E = [
    71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0,
    -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0,
]


cdef inline cplx _conj(cplx z) noexcept nogil:
    return z.real - 1j * z.imag


cdef inline double _abs2(cplx z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef void _nl_direct(const cplx* a, cplx* out, int K, double gamma) noexcept nogil:
    cdef int j, n1, n2, j3
    cdef cplx s
    for j in range(K):
        s = 0
        for n1 in range(K):
            for n2 in range(K):
                j3 = j - n1 + n2
                if 0 <= j3 < K:
                    s = s + a[n1] * _conj(a[n2]) * a[j3]
        out[j] = gamma * s


cdef void _nl_fast(const cplx* a, cplx* out, cplx* corr, int K, double gamma) noexcept nogil:
    # corr[K-1+k] = sum_n a_n conj(a_{n-k}); out_m = gamma * sum_k corr_k a_{m-k}.
    # Loops are ordered so the inner index owns its accumulator.
    cdef int j, p, top = K - 1
    cdef cplx c
    for j in range(2 * K - 1):
        corr[j] = 0
    for p in range(K):
        c = _conj(a[p])
        for j in range(p, K):
            corr[top + j - p] = corr[top + j - p] + a[j] * c
    for j in range(1, K):
        corr[top - j] = _conj(corr[top + j])
    for j in range(K):
        out[j] = 0
    for p in range(K):
        c = a[p]
        for j in range(K):
            out[j] = out[j] + corr[top + j - p] * c
    for j in range(K):
        out[j] = gamma * out[j]


cdef void _forcing(const cplx* y, cplx* out, cplx* corr, int K, double gamma, bint direct) noexcept nogil:
    # nonlinear part of dy/dtau, i.e. -i * gamma * (coupling sum), both rings
    cdef int j, r
    for r in range(2):
        if direct:
            _nl_direct(y + r * K, out + r * K, K, gamma)
        else:
            _nl_fast(y + r * K, out + r * K, corr, K, gamma)
    for j in range(2 * K):
        out[j] = -1j * out[j]


cdef void _phases(cplx* ph, double* cs, double t, double kappa, int K) noexcept nogil:
    cdef int j, m, M = (K - 1) // 2
    cdef double w
    for j in range(K):
        m = j - M
        w = m * m * t
        ph[j] = cos(w) - 1j * sin(w)
    cs[0] = cos(kappa * t)
    cs[1] = sin(kappa * t)


cdef void _propagate(const cplx* y, cplx* out, const cplx* ph, const double* cs, bint backward, int K) noexcept nogil:
    # exact flow of i dy/dt = (m^2 - kappa X) y over t (or -t when backward)
    cdef int j
    cdef cplx p, au, ad, isn
    cdef double c = cs[0]
    isn = 1j * (-cs[1] if backward else cs[1])
    for j in range(K):
        p = _conj(ph[j]) if backward else ph[j]
        au = y[j]
        ad = y[K + j]
        out[j] = p * (c * au + isn * ad)
        out[K + j] = p * (isn * au + c * ad)


cdef void _moments(const cplx* y, int K, double* norm, double* mom) noexcept nogil:
    cdef int j, M = (K - 1) // 2
    cdef double p
    norm[0] = 0.0
    mom[0] = 0.0
    for j in range(K):
        p = _abs2(y[j]) + _abs2(y[K + j])
        norm[0] += p
        mom[0] += (j - M) * p


def nonlinear(const cplx[:, ::1] a, double gamma, bint direct=False):
    """Return ``gamma * sum_{n,n'} a_n conj(a_n') a_{m-n+n'}`` per ring."""
    cdef int K = a.shape[1]
    cdef cnp.ndarray[cplx, ndim=2] out = np.zeros((2, K), dtype=np.complex128)
    cdef cplx[:, ::1] ov = out
    cdef cplx* corr = <cplx*> malloc((2 * K - 1) * sizeof(cplx))
    cdef int r
    try:
        with nogil:
            for r in range(2):
                if direct:
                    _nl_direct(&a[r, 0], &ov[r, 0], K, gamma)
                else:
                    _nl_fast(&a[r, 0], &ov[r, 0], corr, K, gamma)
    finally:
        free(corr)
    return out


def integrate(const cplx[:, ::1] a0, double kappa, double gamma, double t_end,
              double stride, int method, double dt, double rtol, double atol,
              double guard, bint store_amplitudes, long max_steps, bint direct=False):
    """Integrate the coupled-mode system with an integrating-factor Runge-Kutta.

    ``method`` 0 is fixed-step RK4 (``dt`` is the largest sub-step), 1 is the
    adaptive Dormand-Prince 5(4) pair (``dt`` is the first trial step).
    Returns ``(taus, pops, amps, drift_norm, drift_mom, final, n_steps,
    n_rejected, status)``; status 0 ok, 1 conservation guard tripped,
    2 step budget exhausted.
    """
    cdef int K = a0.shape[1]
    cdef int n2 = 2 * K
    cdef long n_samples = <long> ceil(t_end / stride - 1e-9) + 1
    taus = np.empty(n_samples, dtype=np.float64)
    pops = np.empty((n_samples, 2, K), dtype=np.float64)
    amps = np.empty((n_samples if store_amplitudes else 0, 2, K), dtype=np.complex128)
    drift_n = np.empty(n_samples, dtype=np.float64)
    drift_l = np.empty(n_samples, dtype=np.float64)
    final = np.array(a0, dtype=np.complex128, copy=True)

    cdef double[::1] tv = taus
    cdef double[:, :, ::1] pv = pops
    cdef cplx[:, :, ::1] av = amps
    cdef double[::1] dnv = drift_n
    cdef double[::1] dlv = drift_l
    cdef cplx[:, ::1] yv = final
    cdef cplx* y = &yv[0, 0]

    cdef cplx* work = <cplx*> malloc(n2 * 12 * sizeof(cplx))
    cdef cplx* ph = <cplx*> malloc(K * 7 * sizeof(cplx))
    cdef cplx* corr = <cplx*> malloc((2 * K - 1) * sizeof(cplx))
    cdef double cs[14]
    cdef cplx* k = work                 # 7 stage slots
    cdef cplx* tmp = work + 7 * n2
    cdef cplx* z = work + 8 * n2
    cdef cplx* vnew = work + 9 * n2
    cdef cplx* f_last = work + 10 * n2
    cdef cplx* err = work + 11 * n2

    cdef long s_idx = 0, n_steps = 0, n_rejected = 0, nsub, sub
    cdef int status = 0, i, j, st
    cdef double t = 0.0, t_next, h, h_prop, h_use, norm0, mom0, nrm, mom
    cdef double dn = 0.0, dl = 0.0, en, sc, fac, ya, yb
    cdef bint clipped, have_f = False

    try:
        with nogil:
            _moments(y, K, &norm0, &mom0)
            if norm0 <= 0.0:
                norm0 = 1.0
            h_prop = dt
            while True:
                # record sample s_idx at time t
                tv[s_idx] = t
                for j in range(K):
                    pv[s_idx, 0, j] = _abs2(y[j])
                    pv[s_idx, 1, j] = _abs2(y[K + j])
                if store_amplitudes:
                    for j in range(K):
                        av[s_idx, 0, j] = y[j]
                        av[s_idx, 1, j] = y[K + j]
                _moments(y, K, &nrm, &mom)
                if fabs(nrm - norm0) / norm0 > dn:
                    dn = fabs(nrm - norm0) / norm0
                if fabs(mom - mom0) / norm0 > dl:
                    dl = fabs(mom - mom0) / norm0
                dnv[s_idx] = dn
                dlv[s_idx] = dl
                s_idx += 1
                if dn > guard or dl > guard:
                    status = 1
                    break
                if s_idx >= n_samples:
                    break
                t_next = s_idx * stride
                if t_next > t_end:
                    t_next = t_end

                if method == 0:
                    nsub = <long> ceil((t_next - t) / dt - 1e-9)
                    if nsub < 1:
                        nsub = 1
                    h = (t_next - t) / nsub
                    _phases(ph, cs, 0.5 * h, kappa, K)
                    _phases(ph + K, cs + 2, h, kappa, K)
                    for sub in range(nsub):
                        _forcing(y, k, corr, K, gamma, direct)
                        for st in range(1, 4):
                            for j in range(n2):
                                tmp[j] = y[j] + (h if st == 3 else 0.5 * h) * k[(st - 1) * n2 + j]
                            if st == 3:
                                _propagate(tmp, z, ph + K, cs + 2, False, K)
                            else:
                                _propagate(tmp, z, ph, cs, False, K)
                            _forcing(z, tmp, corr, K, gamma, direct)
                            if st == 3:
                                _propagate(tmp, k + st * n2, ph + K, cs + 2, True, K)
                            else:
                                _propagate(tmp, k + st * n2, ph, cs, True, K)
                        for j in range(n2):
                            tmp[j] = y[j] + h / 6.0 * (k[j] + 2.0 * k[n2 + j]
                                                       + 2.0 * k[2 * n2 + j] + k[3 * n2 + j])
                        _propagate(tmp, y, ph + K, cs + 2, False, K)
                        n_steps += 1
                    t = t_next
                    if n_steps > max_steps:
                        status = 2
                        break
                    continue

                # adaptive Dormand-Prince 5(4) in the interaction picture
                while t < t_next:
                    clipped = False
                    h_use = h_prop
                    if t + h_use >= t_next - 1e-12 * stride:
                        h_use = t_next - t
                        clipped = True
                    for i in range(1, 7):
                        _phases(ph + i * K, cs + 2 * i, DP_C[i] * h_use, kappa, K)
                    if not have_f:
                        _forcing(y, f_last, corr, K, gamma, direct)
                        have_f = True
                    for j in range(n2):
                        k[j] = f_last[j]
                    for i in range(1, 6):
                        for j in range(n2):
                            tmp[j] = y[j]
                        for st in range(i):
                            if DP_A[i][st] != 0.0:
                                for j in range(n2):
                                    tmp[j] = tmp[j] + h_use * DP_A[i][st] * k[st * n2 + j]
                        _propagate(tmp, z, ph + i * K, cs + 2 * i, False, K)
                        _forcing(z, tmp, corr, K, gamma, direct)
                        _propagate(tmp, k + i * n2, ph + i * K, cs + 2 * i, True, K)
                    # 5th-order solution; its forcing is the FSAL stage k7
                    for j in range(n2):
                        vnew[j] = y[j]
                    for st in range(6):
                        if DP_A[6][st] != 0.0:
                            for j in range(n2):
                                vnew[j] = vnew[j] + h_use * DP_A[6][st] * k[st * n2 + j]
                    _propagate(vnew, z, ph + 6 * K, cs + 12, False, K)
                    _forcing(z, tmp, corr, K, gamma, direct)
                    _propagate(tmp, k + 6 * n2, ph + 6 * K, cs + 12, True, K)
                    en = 0.0
                    for j in range(n2):
                        err[j] = 0
                        for st in range(7):
                            if DP_E[st] != 0.0:
                                err[j] = err[j] + DP_E[st] * k[st * n2 + j]
                        ya = sqrt(_abs2(y[j]))
                        yb = sqrt(_abs2(vnew[j]))
                        sc = atol + rtol * (ya if ya > yb else yb)
                        en += _abs2(h_use * err[j]) / (sc * sc)
                    en = sqrt(en / n2)
                    n_steps += 1
                    if en <= 1.0:
                        for j in range(n2):
                            y[j] = z[j]
                            f_last[j] = tmp[j]
                        t = t_next if clipped else t + h_use
                        if en == 0.0:
                            fac = 10.0
                        else:
                            fac = 0.9 * pow(en, -0.2)
                            if fac > 10.0:
                                fac = 10.0
                            if fac < 0.2:
                                fac = 0.2
                        if clipped:
                            if h_use * fac > h_prop:
                                h_prop = h_use * fac
                        else:
                            h_prop = h_use * fac
                    else:
                        n_rejected += 1
                        fac = 0.9 * pow(en, -0.2)
                        if fac < 0.2:
                            fac = 0.2
                        h_prop = h_use * fac
                    if n_steps > max_steps:
                        status = 2
                        break
                if status != 0:
                    break
    finally:
        free(work)
        free(ph)
        free(corr)

    return (taus[:s_idx], pops[:s_idx], amps[:s_idx] if store_amplitudes else None,
            drift_n[:s_idx], drift_l[:s_idx], final, n_steps, n_rejected, status)
