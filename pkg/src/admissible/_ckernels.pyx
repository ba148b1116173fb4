# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled twin of ``_pykernels``; same signatures, same results."""

from array import array

cdef enum:
    EE = 0
    EA = 1
    CA = 2
    AA = 3

BACKEND = "cython"


def pre(int kind, const int[:] off, const int[:] rows, const int[:] cols,
        const int[:] succ, const unsigned char[:] X):
    cdef Py_ssize_t n = rows.shape[0]
    out = bytearray(n)
    cdef unsigned char[:] o = out
    cdef Py_ssize_t v, i, j, k, base, row
    cdef int r, c, hit
    if kind < 0 or kind > 3:
        raise ValueError(f"unknown predecessor kind {kind}")
    for v in range(n):
        base = off[v]
        r = rows[v]
        c = cols[v]
        if kind == EE:
            hit = 0
            for k in range(base, base + r * c):
                if X[succ[k]]:
                    hit = 1
                    break
        elif kind == AA:
            hit = 1
            for k in range(base, base + r * c):
                if not X[succ[k]]:
                    hit = 0
                    break
        elif kind == EA:
            hit = 0
            for i in range(r):
                row = base + i * c
                for j in range(c):
                    if not X[succ[row + j]]:
                        break
                else:
                    hit = 1
                    break
        else:
            hit = 0
            for j in range(c):
                for i in range(r):
                    if not X[succ[base + i * c + j]]:
                        break
                else:
                    hit = 1
                    break
        o[v] = hit
    return out


def apre_rows(const int[:] off, const int[:] rows, const int[:] cols,
              const int[:] succ, const unsigned char[:] Y,
              const unsigned char[:] X):
    cdef Py_ssize_t n = rows.shape[0]
    out = bytearray(n)
    cdef unsigned char[:] o = out
    cdef Py_ssize_t v, i, j, base, row
    cdef int r, c, nsafe, ok, found
    for v in range(n):
        base = off[v]
        r = rows[v]
        c = cols[v]
        nsafe = 0
        for i in range(r):
            row = base + i * c
            for j in range(c):
                if not Y[succ[row + j]]:
                    break
            else:
                nsafe += 1
        if nsafe == 0:
            continue
        ok = 1
        for j in range(c):
            found = 0
            for i in range(r):
                row = base + i * c
                if X[succ[row + j]] and _row_inside(succ, row, c, Y):
                    found = 1
                    break
            if not found:
                ok = 0
                break
        o[v] = ok
    return out


cdef inline int _row_inside(const int[:] succ, Py_ssize_t row, int c,
                            const unsigned char[:] Y):
    cdef Py_ssize_t j
    for j in range(c):
        if not Y[succ[row + j]]:
            return 0
    return 1


def apre_cols(const int[:] off, const int[:] rows, const int[:] cols,
              const int[:] succ, const unsigned char[:] Y,
              const unsigned char[:] X):
    cdef Py_ssize_t n = rows.shape[0]
    out = bytearray(n)
    cdef unsigned char[:] o = out
    cdef Py_ssize_t v, i, j, base
    cdef int r, c, inside, hit, t
    for v in range(n):
        base = off[v]
        r = rows[v]
        c = cols[v]
        for j in range(c):
            inside = 1
            hit = 0
            for i in range(r):
                t = succ[base + i * c + j]
                if not Y[t]:
                    inside = 0
                    break
                if X[t]:
                    hit = 1
            if inside and hit:
                o[v] = 1
                break
    return out


def scc(Py_ssize_t n, const int[:] adj_off, const int[:] adj,
        const unsigned char[:] mask):
    comp_arr = array("i", [-1]) * n
    index_arr = array("i", [-1]) * n
    low_arr = array("i", [0]) * n
    stack_arr = array("i", [0]) * max(n, 1)
    work_v_arr = array("i", [0]) * max(n, 1)
    work_k_arr = array("i", [0]) * max(n, 1)
    onstack_arr = bytearray(n)
    cdef int[:] comp = comp_arr
    cdef int[:] index = index_arr
    cdef int[:] low = low_arr
    cdef int[:] stack = stack_arr
    cdef int[:] work_v = work_v_arr
    cdef int[:] work_k = work_k_arr
    cdef unsigned char[:] onstack = onstack_arr
    cdef Py_ssize_t root, v, w, u, k, end
    cdef int counter = 0, ncomp = 0, sp = 0, wp = 0
    cdef bint advanced
    for root in range(n):
        if not mask[root] or index[root] != -1:
            continue
        index[root] = counter
        low[root] = counter
        counter += 1
        stack[sp] = root
        sp += 1
        onstack[root] = 1
        work_v[0] = root
        work_k[0] = adj_off[root]
        wp = 1
        while wp > 0:
            v = work_v[wp - 1]
            k = work_k[wp - 1]
            end = adj_off[v + 1]
            advanced = False
            while k < end:
                w = adj[k]
                k += 1
                if not mask[w]:
                    continue
                if index[w] == -1:
                    work_k[wp - 1] = k
                    index[w] = counter
                    low[w] = counter
                    counter += 1
                    stack[sp] = w
                    sp += 1
                    onstack[w] = 1
                    work_v[wp] = w
                    work_k[wp] = adj_off[w]
                    wp += 1
                    advanced = True
                    break
                if onstack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if advanced:
                continue
            wp -= 1
            if wp > 0:
                u = work_v[wp - 1]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                while True:
                    sp -= 1
                    w = stack[sp]
                    onstack[w] = 0
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
    return comp_arr
