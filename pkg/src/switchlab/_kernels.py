"""Hot numeric kernels.

Every kernel comes in two flavours with identical signatures: an explicit-loop
version compiled by numba and a vectorised numpy version.  The public names
bind to one of them depending on :data:`switchlab._accel.USE_NUMBA`; both are
importable directly so tests and benchmarks can compare them.
"""

import numpy as np

from ._accel import USE_NUMBA, njit


# ---------------------------------------------------------------------------
# Davies generator assembly (eigenbasis of the system Hamiltonian)
#
#   couplings[c, i, j]  matrix element <i|A_c|j>
#   rates[c, j, i]      rate of the j -> i transition for coupling c
#   labels[j, i]        integer Bohr-frequency bin of E_j - E_i
# ---------------------------------------------------------------------------


def _decay_matrix_loop(couplings, rates, labels):
    nc, n, _ = couplings.shape
    out = np.zeros((n, n), dtype=np.complex128)
    for c in range(nc):
        for j in range(n):
            for l in range(n):
                acc = 0.0 + 0.0j
                for i in range(n):
                    if labels[j, i] == labels[l, i]:
                        acc += rates[c, j, i] * np.conj(couplings[c, i, j]) * couplings[c, i, l]
                out[j, l] += acc
    return out


def _decay_matrix_numpy(couplings, rates, labels):
    # mask[i, j, l] = labels[j, i] == labels[l, i]
    lt = labels.T
    mask = lt[:, :, None] == lt[:, None, :]
    out = np.zeros(labels.shape, dtype=np.complex128)
    for c in range(couplings.shape[0]):
        a = couplings[c]
        weighted = rates[c].T * np.conj(a)  # [i, j]
        out += np.einsum("ij,il,ijl->jl", weighted, a, mask)
    return out


def _block_loop(rows, cols, energies, couplings, rates, labels, decay):
    m = rows.shape[0]
    nc = couplings.shape[0]
    out = np.zeros((m, m), dtype=np.complex128)
    for a in range(m):
        i = rows[a]
        k = cols[a]
        for b in range(m):
            j = rows[b]
            l = cols[b]
            val = 0.0 + 0.0j
            if labels[j, i] == labels[l, k]:
                for c in range(nc):
                    val += rates[c, j, i] * couplings[c, i, j] * np.conj(couplings[c, k, l])
            if k == l:
                val -= 0.5 * decay[i, j]
            if i == j:
                val -= 0.5 * decay[l, k]
            out[a, b] = val
        out[a, a] += -1j * (energies[i] - energies[k])
    return out


def _block_numpy(rows, cols, energies, couplings, rates, labels, decay):
    i = rows[:, None]
    k = cols[:, None]
    j = rows[None, :]
    l = cols[None, :]
    match = labels[j, i] == labels[l, k]
    jump = np.einsum("cab,cab,cab->ab", rates[:, j, i], couplings[:, i, j],
                     np.conj(couplings[:, k, l]))
    out = np.where(match, jump, 0.0)
    out = out - 0.5 * np.where(k == l, decay[i, j], 0.0)
    out = out - 0.5 * np.where(i == j, decay[l, k], 0.0)
    out[np.diag_indices_from(out)] += -1j * (energies[rows] - energies[cols])
    return out


# ---------------------------------------------------------------------------
# Quasi-static ramp bookkeeping for a diagonal Hamiltonian that is re-thermalised
# after every control step.  levels[k, d] are the energies at ramp point k.
# Returns (work supplied, heat supplied, initial energy, final energy).
# ---------------------------------------------------------------------------


def _ramp_loop(levels, temperature):
    nsteps, d = levels.shape
    work = 0.0
    heat = 0.0
    p = np.empty(d)
    p_next = np.empty(d)

    def gibbs(row, out):
        lo = row[0]
        for q in range(1, d):
            if row[q] < lo:
                lo = row[q]
        z = 0.0
        for q in range(d):
            out[q] = np.exp(-(row[q] - lo) / temperature)
            z += out[q]
        for q in range(d):
            out[q] /= z

    gibbs(levels[0], p)
    e_start = 0.0
    for q in range(d):
        e_start += p[q] * levels[0, q]
    for k in range(nsteps - 1):
        gibbs(levels[k + 1], p_next)
        for q in range(d):
            work += p[q] * (levels[k + 1, q] - levels[k, q])
            heat += (p_next[q] - p[q]) * levels[k + 1, q]
            p[q] = p_next[q]
    e_end = 0.0
    for q in range(d):
        e_end += p[q] * levels[nsteps - 1, q]
    return work, heat, e_start, e_end


def _ramp_numpy(levels, temperature):
    shifted = levels - levels.min(axis=1, keepdims=True)
    p = np.exp(-shifted / temperature)
    p /= p.sum(axis=1, keepdims=True)
    work = float(np.sum(p[:-1] * np.diff(levels, axis=0)))
    heat = float(np.sum(np.diff(p, axis=0) * levels[1:]))
    return work, heat, float(p[0] @ levels[0]), float(p[-1] @ levels[-1])


decay_matrix_jit = njit(_decay_matrix_loop)
davies_block_jit = njit(_block_loop)
ramp_work_jit = njit(_ramp_loop)

if USE_NUMBA:
    decay_matrix = decay_matrix_jit
    davies_block = davies_block_jit
    ramp_work = ramp_work_jit
else:
    decay_matrix = _decay_matrix_numpy
    davies_block = _block_numpy
    ramp_work = _ramp_numpy

KERNELS = {
    "decay_matrix": (decay_matrix_jit, _decay_matrix_numpy),
    "davies_block": (davies_block_jit, _block_numpy),
    "ramp_work": (ramp_work_jit, _ramp_numpy),
}
