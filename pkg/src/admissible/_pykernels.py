"""Pure-Python kernels; reference semantics for ``_ckernels``.

A move graph is stored flat: node ``n`` owns a ``rows[n] x cols[n]`` block
of ``succ`` starting at ``off[n]`` (row-major).  Rows are the moves of the
protagonist, columns the joint moves of everybody else.  Node sets are
``bytearray`` masks.
"""

EE = 0  # some row, some column
EA = 1  # some row, every column (protagonist moves, adversary answers)
CA = 2  # some column, every row (helper picks column, rows are random/adversarial)
AA = 3  # every row, every column

BACKEND = "python"


def pre(kind, off, rows, cols, succ, X):
    n = len(rows)
    out = bytearray(n)
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
        elif kind == CA:
            hit = 0
            for j in range(c):
                for i in range(r):
                    if not X[succ[base + i * c + j]]:
                        break
                else:
                    hit = 1
                    break
        else:
            raise ValueError(f"unknown predecessor kind {kind}")
        out[v] = hit
    return out


def apre_rows(off, rows, cols, succ, Y, X):
    """Rows whose every column stays in Y form B; need B nonempty and
    every column hitting X through some row of B."""
    n = len(rows)
    out = bytearray(n)
    for v in range(n):
        base = off[v]
        r = rows[v]
        c = cols[v]
        safe = []
        for i in range(r):
            row = base + i * c
            for j in range(c):
                if not Y[succ[row + j]]:
                    break
            else:
                safe.append(row)
        if not safe:
            continue
        ok = 1
        for j in range(c):
            for row in safe:
                if X[succ[row + j]]:
                    break
            else:
                ok = 0
                break
        out[v] = ok
    return out


def apre_cols(off, rows, cols, succ, Y, X):
    """Some column keeps every row inside Y and some row inside X."""
    n = len(rows)
    out = bytearray(n)
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
                out[v] = 1
                break
    return out


def scc(n, adj_off, adj, mask):
    """Tarjan's algorithm, iterative.  Returns component ids (``-1`` for
    nodes outside ``mask``); ids are assigned in reverse topological order."""
    index = [-1] * n
    low = [0] * n
    onstack = bytearray(n)
    comp = [-1] * n
    stack = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if not mask[root] or index[root] != -1:
            continue
        work = [(root, adj_off[root])]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        onstack[root] = 1
        while work:
            v, k = work[-1]
            end = adj_off[v + 1]
            advanced = False
            while k < end:
                w = adj[k]
                k += 1
                if not mask[w]:
                    continue
                if index[w] == -1:
                    work[-1] = (v, k)
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    onstack[w] = 1
                    work.append((w, adj_off[w]))
                    advanced = True
                    break
                if onstack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    onstack[w] = 0
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
    return comp
