"""Hot numeric kernels for 2-qubit density matrices.

Every kernel exists twice: an explicit-loop version compiled with numba
(``*_loops``) and a vectorised numpy version (``*_numpy``).  The public names
``jacobi_eigh`` and ``run_program`` are bound to one of them at import time
(see :mod:`dimerlab._jit`).  Both versions implement the same arithmetic and
are cross-checked in the test suite.

Basis ordering is |q0 q1> with qubit 0 as the most significant bit, so the
index of a basis state is ``2*b0 + b1``.
"""

import math

import numpy as np

from dimerlab._jit import NUMBA_ENABLED, njit

# Operation codes understood by run_program.
OP_ID = 0
OP_X = 1
OP_SX = 2
OP_RZ = 3
OP_RX = 4
OP_RY = 5
OP_H = 6
OP_CX = 7
OP_DELAY = 8
OP_MEASURE = 9
OP_RESET = 10

OP_CODES = {
    "id": OP_ID,
    "x": OP_X,
    "sx": OP_SX,
    "rz": OP_RZ,
    "rx": OP_RX,
    "ry": OP_RY,
    "h": OP_H,
    "cx": OP_CX,
    "delay": OP_DELAY,
    "measure": OP_MEASURE,
    "reset": OP_RESET,
}


# ---------------------------------------------------------------------------
# Jacobi eigensolver
# ---------------------------------------------------------------------------


def _rotation(app, aqq, apq):
    """Complex Jacobi rotation entries (g_pp, g_pq, g_qp, g_qq) annihilating apq."""
    r = abs(apq)
    conj_phase = apq.conjugate() / r
    theta = (aqq - app) / (2.0 * r)
    if theta >= 0.0:
        t = 1.0 / (theta + math.sqrt(theta * theta + 1.0))
    else:
        t = -1.0 / (-theta + math.sqrt(theta * theta + 1.0))
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c
    return c + 0j, s + 0j, -s * conj_phase, c * conj_phase


_rotation_jit = njit(_rotation)


def _jacobi_eigh_loops(a, tol, max_sweeps):
    n = a.shape[0]
    a = a.astype(np.complex128).copy()
    v = np.eye(n, dtype=np.complex128)
    norm = 0.0
    for i in range(n):
        for j in range(n):
            norm += a[i, j].real ** 2 + a[i, j].imag ** 2
    thresh = tol * math.sqrt(norm)
    tiny = 1e-300
    sweeps = 0
    while sweeps < max_sweeps:
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += a[i, j].real ** 2 + a[i, j].imag ** 2
        if math.sqrt(off) <= thresh:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= tiny:
                    continue
                gpp, gpq, gqp, gqq = _rotation_jit(a[p, p].real, a[q, q].real, apq)
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = akp * gpp + akq * gqp
                    a[k, q] = akp * gpq + akq * gqq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = gpp.conjugate() * apk + gqp.conjugate() * aqk
                    a[q, k] = gpq.conjugate() * apk + gqq.conjugate() * aqk
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = vkp * gpp + vkq * gqp
                    v[k, q] = vkp * gpq + vkq * gqq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i].real
    order = np.argsort(w, kind="mergesort")
    return w[order], v[:, order], sweeps


jacobi_eigh_loops = njit(_jacobi_eigh_loops)


def jacobi_eigh_numpy(a, tol, max_sweeps):
    n = a.shape[0]
    a = np.array(a, dtype=np.complex128)
    v = np.eye(n, dtype=np.complex128)
    thresh = tol * np.linalg.norm(a)
    offdiag = ~np.eye(n, dtype=bool)
    sweeps = 0
    while sweeps < max_sweeps:
        if np.sqrt(np.sum(np.abs(a[offdiag]) ** 2)) <= thresh:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                gpp, gpq, gqp, gqq = _rotation(a[p, p].real, a[q, q].real, apq)
                g = np.array([[gpp, gpq], [gqp, gqq]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                v[:, idx] = v[:, idx] @ g
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    w = np.real(np.diag(a)).copy()
    order = np.argsort(w, kind="mergesort")
    return w[order], v[:, order], sweeps


# ---------------------------------------------------------------------------
# Gate-level density-matrix evolution
# ---------------------------------------------------------------------------


def _bit(i, q):
    return (i >> (1 - q)) & 1


def _other(i, q):
    return (i >> q) & 1


def _index(b, o, q):
    if q == 0:
        return 2 * b + o
    return 2 * o + b


_bit_j = njit(_bit)
_other_j = njit(_other)
_index_j = njit(_index)


def _one_qubit_matrix(kind, angle):
    u = np.zeros((2, 2), dtype=np.complex128)
    if kind == OP_ID:
        u[0, 0] = 1.0
        u[1, 1] = 1.0
    elif kind == OP_X:
        u[0, 1] = 1.0
        u[1, 0] = 1.0
    elif kind == OP_SX:
        u[0, 0] = 0.5 + 0.5j
        u[0, 1] = 0.5 - 0.5j
        u[1, 0] = 0.5 - 0.5j
        u[1, 1] = 0.5 + 0.5j
    elif kind == OP_RZ:
        u[0, 0] = complex(math.cos(angle / 2), -math.sin(angle / 2))
        u[1, 1] = complex(math.cos(angle / 2), math.sin(angle / 2))
    elif kind == OP_RX:
        c = math.cos(angle / 2)
        s = math.sin(angle / 2)
        u[0, 0] = c
        u[1, 1] = c
        u[0, 1] = -1j * s
        u[1, 0] = -1j * s
    elif kind == OP_RY:
        c = math.cos(angle / 2)
        s = math.sin(angle / 2)
        u[0, 0] = c
        u[1, 1] = c
        u[0, 1] = -s
        u[1, 0] = s
    elif kind == OP_H:
        r = 1.0 / math.sqrt(2.0)
        u[0, 0] = r
        u[0, 1] = r
        u[1, 0] = r
        u[1, 1] = -r
    else:
        u[0, 0] = 1.0
        u[1, 1] = 1.0
    return u


one_qubit_matrix = njit(_one_qubit_matrix)


def _embed_loops(u, q):
    out = np.zeros((4, 4), dtype=np.complex128)
    for i in range(4):
        for k in range(4):
            if _other_j(i, q) == _other_j(k, q):
                out[i, k] = u[_bit_j(i, q), _bit_j(k, q)]
    return out


def _cx_loops(control, target):
    out = np.zeros((4, 4), dtype=np.complex128)
    for i in range(4):
        j = i
        if _bit_j(i, control) == 1:
            j = i ^ (1 << (1 - target))
        out[j, i] = 1.0
    return out


def _conjugate_loops(rho, u):
    tmp = np.zeros((4, 4), dtype=np.complex128)
    for i in range(4):
        for j in range(4):
            acc = 0j
            for k in range(4):
                acc += u[i, k] * rho[k, j]
            tmp[i, j] = acc
    out = np.zeros((4, 4), dtype=np.complex128)
    for i in range(4):
        for j in range(4):
            acc = 0j
            for k in range(4):
                acc += tmp[i, k] * u[j, k].conjugate()
            out[i, j] = acc
    return out


def _reduced_other_loops(rho, q):
    r = np.zeros((2, 2), dtype=np.complex128)
    for o1 in range(2):
        for o2 in range(2):
            for b in range(2):
                r[o1, o2] += rho[_index_j(b, o1, q), _index_j(b, o2, q)]
    return r


def _relax_loops(rho, q, pop, coh):
    out = rho.copy()
    for i in range(4):
        for j in range(4):
            bi = _bit_j(i, q)
            bj = _bit_j(j, q)
            if bi == 1 and bj == 1:
                out[i, j] = pop * rho[i, j]
                i0 = _index_j(0, _other_j(i, q), q)
                j0 = _index_j(0, _other_j(j, q), q)
                out[i0, j0] += (1.0 - pop) * rho[i, j]
            elif bi != bj:
                out[i, j] = coh * rho[i, j]
    return out


def _depolarize_loops(rho, q, prob):
    r = _reduced_other_j(rho, q)
    out = np.zeros((4, 4), dtype=np.complex128)
    for i in range(4):
        for j in range(4):
            out[i, j] = (1.0 - prob) * rho[i, j]
            if _bit_j(i, q) == _bit_j(j, q):
                out[i, j] += 0.5 * prob * r[_other_j(i, q), _other_j(j, q)]
    return out


def _dephase_loops(rho, q):
    out = rho.copy()
    for i in range(4):
        for j in range(4):
            if _bit_j(i, q) != _bit_j(j, q):
                out[i, j] = 0.0
    return out


def _reset_loops(rho, q):
    r = _reduced_other_j(rho, q)
    out = np.zeros((4, 4), dtype=np.complex128)
    for o1 in range(2):
        for o2 in range(2):
            out[_index_j(0, o1, q), _index_j(0, o2, q)] = r[o1, o2]
    return out


_embed_j = njit(_embed_loops)
_cx_j = njit(_cx_loops)
_conjugate_j = njit(_conjugate_loops)
_reduced_other_j = njit(_reduced_other_loops)
_relax_j = njit(_relax_loops)
_depolarize_j = njit(_depolarize_loops)
_dephase_j = njit(_dephase_loops)
_reset_j = njit(_reset_loops)


def _run_program_loops(rho, kinds, q0, q1, angles, pop, coh, depol):
    out = rho.astype(np.complex128).copy()
    for k in range(kinds.shape[0]):
        kind = kinds[k]
        qa = q0[k]
        if kind <= OP_H:
            out = _conjugate_j(out, _embed_j(one_qubit_matrix(kind, angles[k]), qa))
        elif kind == OP_CX:
            out = _conjugate_j(out, _cx_j(qa, q1[k]))
        elif kind == OP_MEASURE:
            out = _dephase_j(out, qa)
        elif kind == OP_RESET:
            out = _reset_j(out, qa)
        if pop[k] < 1.0 or coh[k] < 1.0:
            out = _relax_j(out, qa, pop[k], coh[k])
            if kind == OP_CX:
                out = _relax_j(out, q1[k], pop[k], coh[k])
        if depol[k] > 0.0:
            out = _depolarize_j(out, qa, depol[k])
            if kind == OP_CX:
                out = _depolarize_j(out, q1[k], depol[k])
    return out


run_program_loops = njit(_run_program_loops)


# numpy versions: reshape rho into a (2, 2, 2, 2) tensor rho[a0, a1, b0, b1].

_EYE2 = np.eye(2, dtype=np.complex128)
_P0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=np.complex128)
_P1 = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=np.complex128)
_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)


def _embed_numpy(u, q):
    return np.kron(u, _EYE2) if q == 0 else np.kron(_EYE2, u)


def _cx_numpy(control, target):
    return _embed_numpy(_P0, control) + _embed_numpy(_P1, control) @ _embed_numpy(_X, target)


def _qubit_blocks(rho, q):
    """View rho as t[bq, bq', o, o'] for qubit q and the other qubit o."""
    t = rho.reshape(2, 2, 2, 2)
    if q == 0:
        return t.transpose(0, 2, 1, 3)
    return t.transpose(1, 3, 0, 2)


def _from_blocks(t, q):
    if q == 0:
        return t.transpose(0, 2, 1, 3).reshape(4, 4)
    return t.transpose(2, 0, 3, 1).reshape(4, 4)


def _relax_numpy(rho, q, pop, coh):
    t = _qubit_blocks(rho, q).copy()
    excited = t[1, 1].copy()
    t[1, 1] = pop * excited
    t[0, 0] = t[0, 0] + (1.0 - pop) * excited
    t[0, 1] *= coh
    t[1, 0] *= coh
    return _from_blocks(t, q)


def _depolarize_numpy(rho, q, prob):
    t = _qubit_blocks(rho, q)
    reduced = t[0, 0] + t[1, 1]
    mixed = np.einsum("ab,cd->abcd", 0.5 * _EYE2, reduced)
    return (1.0 - prob) * rho + prob * _from_blocks(mixed, q)


def _dephase_numpy(rho, q):
    t = _qubit_blocks(rho, q).copy()
    t[0, 1] = 0.0
    t[1, 0] = 0.0
    return _from_blocks(t, q)


def _reset_numpy(rho, q):
    t = _qubit_blocks(rho, q)
    reduced = t[0, 0] + t[1, 1]
    return _from_blocks(np.einsum("ab,cd->abcd", _P0, reduced), q)


def run_program_numpy(rho, kinds, q0, q1, angles, pop, coh, depol):
    out = np.array(rho, dtype=np.complex128)
    for k in range(len(kinds)):
        kind = int(kinds[k])
        qa = int(q0[k])
        if kind <= OP_H:
            u = _embed_numpy(_one_qubit_matrix(kind, float(angles[k])), qa)
            out = u @ out @ u.conj().T
        elif kind == OP_CX:
            u = _cx_numpy(qa, int(q1[k]))
            out = u @ out @ u.conj().T
        elif kind == OP_MEASURE:
            out = _dephase_numpy(out, qa)
        elif kind == OP_RESET:
            out = _reset_numpy(out, qa)
        if pop[k] < 1.0 or coh[k] < 1.0:
            out = _relax_numpy(out, qa, pop[k], coh[k])
            if kind == OP_CX:
                out = _relax_numpy(out, int(q1[k]), pop[k], coh[k])
        if depol[k] > 0.0:
            out = _depolarize_numpy(out, qa, depol[k])
            if kind == OP_CX:
                out = _depolarize_numpy(out, int(q1[k]), depol[k])
    return out


if NUMBA_ENABLED:
    BACKEND = "numba"
    jacobi_eigh = jacobi_eigh_loops
    run_program = run_program_loops
else:
    BACKEND = "numpy"
    jacobi_eigh = jacobi_eigh_numpy
    run_program = run_program_numpy
