"""Graph kernels with a compiled backend and a pure-Python fallback.

The compiled module ``_ckernels`` is used when it imports; set
``ADMISSIBLE_PURE_PYTHON=1`` to force the fallback.  Every fixpoint in the
package is phrased over :class:`MoveGraph` so that the inner loops live here.
"""
from __future__ import annotations

import os
from array import array
from types import ModuleType
from typing import Iterable, Sequence

from . import _pykernels

EE = _pykernels.EE
EA = _pykernels.EA
CA = _pykernels.CA
AA = _pykernels.AA


def _load_backend() -> ModuleType:
    if os.environ.get("ADMISSIBLE_PURE_PYTHON"):
        return _pykernels
    try:
        from . import _ckernels
    except ImportError:
        return _pykernels
    return _ckernels


backend: ModuleType = _load_backend()
BACKEND: str = backend.BACKEND


def use_backend(name: str) -> ModuleType:
    """Switch the active backend (``"cython"`` or ``"python"``); returns it."""
    global backend, BACKEND
    if name == "python":
        backend = _pykernels
    elif name == "cython":
        from . import _ckernels

        backend = _ckernels
    else:
        raise ValueError(f"unknown backend {name!r}")
    BACKEND = backend.BACKEND
    return backend


def mask(n: int, members: Iterable[int] = ()) -> bytearray:
    out = bytearray(n)
    for i in members:
        out[i] = 1
    return out


def members(m: Sequence[int]) -> list[int]:
    return [i for i, x in enumerate(m) if x]


class MoveGraph:
    """Nodes with a successor matrix each: rows are the protagonist's moves,
    columns the joint moves of the others.

    ``blocks[n][i][j]`` is the successor of node ``n`` under row ``i`` and
    column ``j``.  Rows and columns must be nonempty.
    """

    def __init__(self, blocks: Sequence[Sequence[Sequence[int]]]):
        self.n = len(blocks)
        off, rows, cols, succ = array("i"), array("i"), array("i"), array("i")
        for block in blocks:
            r = len(block)
            c = len(block[0]) if r else 0
            if r == 0 or c == 0:
                raise ValueError("every node needs at least one row and one column")
            off.append(len(succ))
            rows.append(r)
            cols.append(c)
            for line in block:
                if len(line) != c:
                    raise ValueError("ragged successor matrix")
                succ.extend(line)
        self.off, self.rows, self.cols, self.succ = off, rows, cols, succ

    def pre(self, kind: int, X: bytearray) -> bytearray:
        return backend.pre(kind, self.off, self.rows, self.cols, self.succ, X)

    def apre_rows(self, Y: bytearray, X: bytearray) -> bytearray:
        return backend.apre_rows(self.off, self.rows, self.cols, self.succ, Y, X)

    def apre_cols(self, Y: bytearray, X: bytearray) -> bytearray:
        return backend.apre_cols(self.off, self.rows, self.cols, self.succ, Y, X)

    def successors(self, v: int) -> list[int]:
        base = self.off[v]
        return sorted(set(self.succ[base:base + self.rows[v] * self.cols[v]]))

    def digraph(self) -> "Digraph":
        return Digraph([self.successors(v) for v in range(self.n)])


class Digraph:
    """Plain directed graph in CSR form."""

    def __init__(self, adjacency: Sequence[Iterable[int]]):
        self.n = len(adjacency)
        self.adj_off = array("i", [0])
        self.adj = array("i")
        for succs in adjacency:
            self.adj.extend(succs)
            self.adj_off.append(len(self.adj))

    def successors(self, v: int):
        return self.adj[self.adj_off[v]:self.adj_off[v + 1]]

    def scc(self, allowed: bytearray | None = None) -> list[list[int]]:
        """Strongly connected components inside ``allowed`` (default: all)."""
        if allowed is None:
            allowed = bytearray(b"\x01") * self.n
        comp = backend.scc(self.n, self.adj_off, self.adj, allowed)
        groups: dict[int, list[int]] = {}
        for v in range(self.n):
            if comp[v] >= 0:
                groups.setdefault(comp[v], []).append(v)
        return [groups[k] for k in sorted(groups)]

    def is_nontrivial(self, component: Sequence[int]) -> bool:
        if len(component) > 1:
            return True
        v = component[0]
        return v in self.successors(v)
