"""Pure numpy versions of the routines in ``_kernels.pyx``.

Same algorithms, same argument order and return tuples; used when the
compiled core is missing or when ``RINGOAM_BACKEND=python`` is set.
"""
import math

import numpy as np

DP_C = np.array([0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0])
DP_A = [
    [],
    [0.2],
    [3.0 / 40.0, 9.0 / 40.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
]
DP_E = np.array([71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0,
                 -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0])


def _nl_ring_fast(a):
    top = a.shape[0] - 1
    corr = np.correlate(a, a, mode="full")  # index i <-> shift k = i - top
    return np.convolve(corr, a)[top:top + a.shape[0]]


def _nl_ring_direct(a):
    K = a.shape[0]
    out = np.zeros(K, dtype=np.complex128)
    idx = np.arange(K)
    for j in range(K):
        n1, n2 = np.meshgrid(idx, idx, indexing="ij")
        j3 = j - n1 + n2
        ok = (j3 >= 0) & (j3 < K)
        out[j] = np.sum(a[n1[ok]] * np.conj(a[n2[ok]]) * a[j3[ok]])
    return out


def nonlinear(a, gamma, direct=False):
    """Return ``gamma * sum_{n,n'} a_n conj(a_n') a_{m-n+n'}`` per ring."""
    a = np.ascontiguousarray(a, dtype=np.complex128)
    ring = _nl_ring_direct if direct else _nl_ring_fast
    return gamma * np.stack([ring(a[0]), ring(a[1])])


def _forcing(y, gamma, direct):
    return -1j * nonlinear(y, gamma, direct)


class _Propagator:
    """Exact flow of ``i dy/dt = (m^2 - kappa X) y`` over a fixed time."""

    def __init__(self, t, kappa, K):
        M = (K - 1) // 2
        m = np.arange(-M, M + 1)
        self.phase = np.exp(-1j * (m * m) * t)
        self.c = math.cos(kappa * t)
        self.s = math.sin(kappa * t)

    def forward(self, y):
        u, d = y
        isn = 1j * self.s
        return np.stack([self.phase * (self.c * u + isn * d),
                         self.phase * (isn * u + self.c * d)])

    def backward(self, y):
        u, d = y
        isn = -1j * self.s
        ph = np.conj(self.phase)
        return np.stack([ph * (self.c * u + isn * d),
                         ph * (isn * u + self.c * d)])


def _moments(y, M):
    p = np.abs(y[0]) ** 2 + np.abs(y[1]) ** 2
    return p.sum(), np.dot(np.arange(-M, M + 1), p)


def integrate(a0, kappa, gamma, t_end, stride, method, dt, rtol, atol,
              guard, store_amplitudes, max_steps, direct=False):
    y = np.array(a0, dtype=np.complex128, copy=True)
    K = y.shape[1]
    M = (K - 1) // 2
    n_samples = int(math.ceil(t_end / stride - 1e-9)) + 1
    taus = np.empty(n_samples)
    pops = np.empty((n_samples, 2, K))
    amps = np.empty((n_samples if store_amplitudes else 0, 2, K), dtype=np.complex128)
    drift_n = np.empty(n_samples)
    drift_l = np.empty(n_samples)

    norm0, mom0 = _moments(y, M)
    if norm0 <= 0.0:
        norm0 = 1.0
    dn = dl = 0.0
    t = 0.0
    s_idx = n_steps = n_rejected = 0
    status = 0
    h_prop = dt
    f_last = None

    while True:
        taus[s_idx] = t
        pops[s_idx] = np.abs(y) ** 2
        if store_amplitudes:
            amps[s_idx] = y
        nrm, mom = _moments(y, M)
        dn = max(dn, abs(nrm - norm0) / norm0)
        dl = max(dl, abs(mom - mom0) / norm0)
        drift_n[s_idx] = dn
        drift_l[s_idx] = dl
        s_idx += 1
        if dn > guard or dl > guard:
            status = 1
            break
        if s_idx >= n_samples:
            break
        t_next = min(s_idx * stride, t_end)

        if method == 0:
            nsub = max(1, int(math.ceil((t_next - t) / dt - 1e-9)))
            h = (t_next - t) / nsub
            half = _Propagator(0.5 * h, kappa, K)
            full = _Propagator(h, kappa, K)
            for _ in range(nsub):
                k1 = _forcing(y, gamma, direct)
                k2 = half.backward(_forcing(half.forward(y + 0.5 * h * k1), gamma, direct))
                k3 = half.backward(_forcing(half.forward(y + 0.5 * h * k2), gamma, direct))
                k4 = full.backward(_forcing(full.forward(y + h * k3), gamma, direct))
                y = full.forward(y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
                n_steps += 1
            t = t_next
            if n_steps > max_steps:
                status = 2
                break
            continue

        while t < t_next:
            h_use = h_prop
            clipped = False
            if t + h_use >= t_next - 1e-12 * stride:
                h_use = t_next - t
                clipped = True
            props = [None] + [_Propagator(DP_C[i] * h_use, kappa, K) for i in range(1, 7)]
            if f_last is None:
                f_last = _forcing(y, gamma, direct)
            k = [f_last]
            for i in range(1, 6):
                tmp = y.copy()
                for st, coef in enumerate(DP_A[i]):
                    if coef != 0.0:
                        tmp = tmp + h_use * coef * k[st]
                k.append(props[i].backward(_forcing(props[i].forward(tmp), gamma, direct)))
            vnew = y.copy()
            for st, coef in enumerate(DP_A[6]):
                if coef != 0.0:
                    vnew = vnew + h_use * coef * k[st]
            z = props[6].forward(vnew)
            f_new = _forcing(z, gamma, direct)
            k.append(props[6].backward(f_new))
            err = np.zeros_like(y)
            for st in range(7):
                if DP_E[st] != 0.0:
                    err = err + DP_E[st] * k[st]
            sc = atol + rtol * np.maximum(np.abs(y), np.abs(vnew))
            en = math.sqrt(np.mean(np.abs(h_use * err) ** 2 / sc ** 2))
            n_steps += 1
            if en <= 1.0:
                y = z
                f_last = f_new
                t = t_next if clipped else t + h_use
                fac = 10.0 if en == 0.0 else min(10.0, max(0.2, 0.9 * en ** -0.2))
                if clipped:
                    h_prop = max(h_prop, h_use * fac)
                else:
                    h_prop = h_use * fac
            else:
                n_rejected += 1
                h_prop = h_use * max(0.2, 0.9 * en ** -0.2)
            if n_steps > max_steps:
                status = 2
                break
        if status != 0:
            break

    return (taus[:s_idx], pops[:s_idx], amps[:s_idx] if store_amplitudes else None,
            drift_n[:s_idx], drift_l[:s_idx], y, n_steps, n_rejected, status)
