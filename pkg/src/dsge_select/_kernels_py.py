"""Reference (numpy) implementations of the time-stepping kernels."""

import numpy as np


def simulate_lss(r, q, p, g, ks, kj, eps, s0):
    """Iterate ``j_t = P s_t + G e_t + kj``, ``s_{t+1} = R s_t + Q e_t + ks``.

    Returns the ``(T, n_s + n_j)`` path ``[s_t, j_t]``.
    """
    steps = eps.shape[0]
    n_s, n_j = r.shape[0], p.shape[0]
    out = np.empty((steps, n_s + n_j))
    s = np.array(s0, dtype=float)
    for t in range(steps):
        e = eps[t]
        out[t, :n_s] = s
        out[t, n_s:] = p @ s + g @ e + kj
        s = r @ s + q @ e + ks
    return out


def forward_affine(f, h, s0):
    """Forward pass of ``[j_t; s_{t+1}] = F_t s_t + h_t``.

    ``f`` has shape ``(T, n, n_s)`` and ``h`` shape ``(T, n)`` with the
    ``n_j`` jump rows first.  Returns the ``(T, n)`` path ``[s_t, j_t]``.
    """
    steps, n, n_s = f.shape
    n_j = n - n_s
    out = np.empty((steps, n))
    s = np.array(s0, dtype=float)
    for t in range(steps):
        y = f[t] @ s + h[t]
        out[t, :n_s] = s
        out[t, n_s:] = y[:n_j]
        s = y[n_j:]
    return out
