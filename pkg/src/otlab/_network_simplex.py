"""Dense transportation network simplex (numba kernel).

Solves min <C, x> over couplings of (supply, demand) on the complete
bipartite graph.  The basis is a spanning tree on m + n nodes; pivots use
block pricing with a most-negative rule and fall back to Bland's
lowest-index rule after a run of degenerate pivots, which guarantees
termination.  Final flows are recomputed exactly from the basis tree by
leaf peeling, so marginal residuals stay at accumulation-error level.
"""

from __future__ import annotations

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_ITER_LIMIT = 1

# Consecutive degenerate pivots tolerated before switching to Bland's rule.
_STALL_LIMIT = 64


@njit(cache=True, nogil=True)
def solve_transport(C, supply, demand, price_tol, max_iter, hint):  # pragma: no cover
    m, n = C.shape
    N = m + n
    nb = N - 1

    barow = np.empty(nb, np.int64)
    bacol = np.empty(nb, np.int64)
    baflow = np.zeros(nb, np.float64)

    # --- initial basis: fill each column from its cheapest open rows ---
    # "Cheapest" is judged by reduced cost against the row-potential hint
    # (zeros when no warm start is available); any hint yields a valid
    # basic feasible start.
    rs = supply.copy()
    row_open = np.ones(m, np.bool_)
    n_open = m
    na = 0
    for j in range(n):
        need = demand[j]
        while True:
            bi = -1
            bc = np.inf
            for i in range(m):
                if row_open[i] and C[i, j] - hint[i] < bc:
                    bc = C[i, j] - hint[i]
                    bi = i
            if n_open == 1 or rs[bi] > need:
                barow[na] = bi
                bacol[na] = j
                baflow[na] = need if need > 0.0 else 0.0
                na += 1
                rs[bi] -= need
                break
            # Row exhausts first: bridge arc, close the row, keep filling.
            q = rs[bi]
            barow[na] = bi
            bacol[na] = j
            baflow[na] = q
            na += 1
            need -= q
            if need < 0.0:
                need = 0.0
            rs[bi] = 0.0
            row_open[bi] = False
            n_open -= 1

    # --- complete to a spanning tree with zero arcs (union-find) ---
    uf = np.arange(N)
    for a in range(na):
        # union by path-halving find
        x = barow[a]
        while uf[x] != x:
            uf[x] = uf[uf[x]]
            x = uf[x]
        y = m + bacol[a]
        while uf[y] != y:
            uf[y] = uf[uf[y]]
            y = uf[y]
        if x != y:
            uf[y] = x
    anchor = m  # column 0; every column already touches some row
    while uf[anchor] != anchor:
        uf[anchor] = uf[uf[anchor]]
        anchor = uf[anchor]
    for i in range(m):
        x = i
        while uf[x] != x:
            uf[x] = uf[uf[x]]
            x = uf[x]
        if x != anchor:
            barow[na] = i
            bacol[na] = 0
            baflow[na] = 0.0
            na += 1
            uf[x] = anchor

    # --- scratch for per-pivot tree rebuilds ---
    deg = np.empty(N, np.int64)
    off = np.empty(N + 1, np.int64)
    pos = np.empty(N, np.int64)
    adj = np.empty(2 * nb, np.int64)
    stack = np.empty(N, np.int64)
    parent = np.empty(N, np.int64)
    parent_arc = np.empty(N, np.int64)
    depth = np.empty(N, np.int64)
    pot = np.empty(N, np.float64)
    seen = np.zeros(N, np.bool_)

    cursor = 0
    block = n // 8
    if block < 16:
        block = 16
    stall = 0
    bland = False
    it = 0
    status = STATUS_ITER_LIMIT

    while it < max_iter:
        it += 1

        # adjacency of the current basis tree
        for v in range(N):
            deg[v] = 0
        for a in range(nb):
            deg[barow[a]] += 1
            deg[m + bacol[a]] += 1
        off[0] = 0
        for v in range(N):
            off[v + 1] = off[v] + deg[v]
            pos[v] = off[v]
        for a in range(nb):
            r = barow[a]
            c = m + bacol[a]
            adj[pos[r]] = a
            pos[r] += 1
            adj[pos[c]] = a
            pos[c] += 1

        # rooted traversal: parents, depths, potentials (u_i + g_j = C_ij on tree)
        for v in range(N):
            seen[v] = False
        stack[0] = 0
        top = 1
        seen[0] = True
        parent[0] = -1
        parent_arc[0] = -1
        depth[0] = 0
        pot[0] = 0.0
        while top > 0:
            top -= 1
            v = stack[top]
            for k in range(off[v], off[v + 1]):
                a = adj[k]
                r = barow[a]
                c = m + bacol[a]
                w = c if v == r else r
                if not seen[w]:
                    seen[w] = True
                    parent[w] = v
                    parent_arc[w] = a
                    depth[w] = depth[v] + 1
                    pot[w] = C[r, bacol[a]] - pot[v]
                    stack[top] = w
                    top += 1

        # pricing
        ei = -1
        ej = -1
        if bland:
            done = False
            for i in range(m):
                ui = pot[i]
                for j in range(n):
                    if C[i, j] - ui - pot[m + j] < -price_tol:
                        ei = i
                        ej = j
                        done = True
                        break
                if done:
                    break
        else:
            best = -price_tol
            scanned = 0
            while scanned < n:
                j = cursor
                cursor += 1
                if cursor == n:
                    cursor = 0
                gj = pot[m + j]
                for i in range(m):
                    red = C[i, j] - pot[i] - gj
                    if red < best:
                        best = red
                        ei = i
                        ej = j
                scanned += 1
                if ei >= 0 and scanned >= block:
                    break
        if ei < 0:
            status = STATUS_OK
            break

        # ratio test along the cycle closed by the entering arc (ei, ej)
        a_node = ei
        b_node = m + ej
        theta = np.inf
        leave = -1
        leave_id = np.int64(m) * np.int64(n)
        x = a_node
        y = b_node
        while x != y:
            if depth[x] >= depth[y]:
                arc = parent_arc[x]
                if x < m:  # flow decreases on this arc
                    aid = barow[arc] * n + bacol[arc]
                    if baflow[arc] < theta or (baflow[arc] == theta and aid < leave_id):
                        theta = baflow[arc]
                        leave = arc
                        leave_id = aid
                x = parent[x]
            else:
                arc = parent_arc[y]
                if y >= m:
                    aid = barow[arc] * n + bacol[arc]
                    if baflow[arc] < theta or (baflow[arc] == theta and aid < leave_id):
                        theta = baflow[arc]
                        leave = arc
                        leave_id = aid
                y = parent[y]

        # apply the flow change and swap basis arcs
        x = a_node
        y = b_node
        while x != y:
            if depth[x] >= depth[y]:
                arc = parent_arc[x]
                if x < m:
                    baflow[arc] -= theta
                    if baflow[arc] < 0.0:
                        baflow[arc] = 0.0
                else:
                    baflow[arc] += theta
                x = parent[x]
            else:
                arc = parent_arc[y]
                if y < m:
                    baflow[arc] += theta
                else:
                    baflow[arc] -= theta
                    if baflow[arc] < 0.0:
                        baflow[arc] = 0.0
                y = parent[y]
        barow[leave] = ei
        bacol[leave] = ej
        baflow[leave] = theta

        if theta <= 1e-15:
            stall += 1
            if stall > _STALL_LIMIT:
                bland = True
        else:
            stall = 0
            bland = False

    # --- exact flows from the final tree by leaf peeling ---
    bal = np.empty(N, np.float64)
    for i in range(m):
        bal[i] = supply[i]
    for j in range(n):
        bal[m + j] = -demand[j]
    for v in range(N):
        deg[v] = 0
    for a in range(nb):
        deg[barow[a]] += 1
        deg[m + bacol[a]] += 1
    off[0] = 0
    for v in range(N):
        off[v + 1] = off[v] + deg[v]
        pos[v] = off[v]
    for a in range(nb):
        r = barow[a]
        c = m + bacol[a]
        adj[pos[r]] = a
        pos[r] += 1
        adj[pos[c]] = a
        pos[c] += 1
    used = np.zeros(nb, np.bool_)
    flow = np.zeros(nb, np.float64)
    top = 0
    for v in range(N):
        if deg[v] == 1:
            stack[top] = v
            top += 1
    while top > 0:
        top -= 1
        v = stack[top]
        if deg[v] != 1:
            continue
        arc = -1
        for k in range(off[v], off[v + 1]):
            if not used[adj[k]]:
                arc = adj[k]
                break
        if arc < 0:
            continue
        r = barow[arc]
        c = m + bacol[arc]
        u = c if v == r else r
        f = bal[v] if v < m else -bal[v]
        if f < 0.0:
            f = 0.0
        flow[arc] = f
        bal[u] += bal[v]
        bal[v] = 0.0
        used[arc] = True
        deg[v] -= 1
        deg[u] -= 1
        if deg[u] == 1:
            stack[top] = u
            top += 1

    return status, barow, bacol, flow, pot, it
