"""Maximum flow / minimum cut on the radial graph, plus a brute-force oracle.

Capacities are scaled to integers (times 2**20, rounded) before solving, so
max-flow/min-cut duality can be asserted exactly. The solver is a Dinic-style
layered augmenting-path method over a paired-arc CSR structure, JIT-compiled
with numba. Among equally minimal cuts it returns the canonical largest
source side (the complement of the nodes that can still reach the sink in
the residual graph); per ray that is the outermost minimal surface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .graph import FlowNetwork

CAPACITY_SCALE = 1 << 20
_MAX_TOTAL_CAPACITY = np.int64(2) ** 62


class FlowStructureError(Exception):
    """The network fails structural validation (dangling arcs, bad terminals)."""


class CutStructureError(Exception):
    """The returned cut violates an invariant of the radial construction."""


class DimacsError(Exception):
    """Malformed DIMACS max-flow input."""

    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass
class CutResult:
    flow_value: float               # unscaled units of the input capacities
    flow_int: int                   # exact value in scaled integer units
    source_set: np.ndarray          # bool per node, True = source side
    cut_indices: np.ndarray | None = None  # per ray, filled by extract_cut_indices


@njit(cache=True)
def _dinic(head, nxt, to, cap, s, t):
    """Blocking-flow max flow; arcs are stored in pairs (arc i reverses i^1).

    Returns the flow value and, computed on the final residual, the set of
    nodes that can reach the sink (used for the canonical largest source side).
    """
    n = head.shape[0]
    level = np.empty(n, np.int32)
    cur = np.empty(n, np.int64)
    queue = np.empty(n, np.int64)
    stack_node = np.empty(n + 1, np.int64)
    stack_arc = np.empty(n + 1, np.int64)
    total = np.int64(0)
    while True:
        level[:] = -1
        level[s] = 0
        qh, qt = 0, 0
        queue[qt] = s
        qt += 1
        while qh < qt:
            u = queue[qh]
            qh += 1
            e = head[u]
            while e != -1:
                v = to[e]
                if cap[e] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue[qt] = v
                    qt += 1
                e = nxt[e]
        if level[t] < 0:
            break
        cur[:] = head
        while True:
            top = 0
            stack_node[0] = s
            found = False
            while top >= 0:
                u = stack_node[top]
                if u == t:
                    found = True
                    break
                e = cur[u]
                advanced = False
                while e != -1:
                    v = to[e]
                    if cap[e] > 0 and level[v] == level[u] + 1:
                        stack_arc[top] = e
                        top += 1
                        stack_node[top] = v
                        advanced = True
                        break
                    e = nxt[e]
                    cur[u] = e
                if not advanced:
                    level[u] = -1
                    top -= 1
            if not found:
                break
            bottleneck = np.int64(2) ** 62
            for i in range(top):
                e = stack_arc[i]
                if cap[e] < bottleneck:
                    bottleneck = cap[e]
            for i in range(top):
                e = stack_arc[i]
                cap[e] -= bottleneck
                cap[e ^ 1] += bottleneck
            total += bottleneck
    # Reverse reachability on the residual: u reaches t iff some residual arc
    # u -> v leads to a node v that reaches t. Arc u -> v seen from v is the
    # pair of an arc e out of v, with residual capacity cap[e ^ 1].
    reaches_sink = np.zeros(n, np.uint8)
    reaches_sink[t] = 1
    qh, qt = 0, 0
    queue[qt] = t
    qt += 1
    while qh < qt:
        v = queue[qh]
        qh += 1
        e = head[v]
        while e != -1:
            u = to[e]
            if reaches_sink[u] == 0 and cap[e ^ 1] > 0:
                reaches_sink[u] = 1
                queue[qt] = u
                qt += 1
            e = nxt[e]
    return total, reaches_sink


def _build_csr(n, arcs_from, arcs_to, caps_int):
    m = arcs_from.size
    to = np.empty(2 * m, np.int64)
    cap = np.empty(2 * m, np.int64)
    frm = np.empty(2 * m, np.int64)
    to[0::2] = arcs_to
    to[1::2] = arcs_from
    cap[0::2] = caps_int
    cap[1::2] = 0
    frm[0::2] = arcs_from
    frm[1::2] = arcs_to
    order = np.argsort(frm, kind="stable")  # canonical arc order per node
    head = np.full(n, -1, np.int64)
    nxt = np.full(2 * m, -1, np.int64)
    of = frm[order]
    starts = np.searchsorted(of, np.arange(n), "left")
    ends = np.searchsorted(of, np.arange(n), "right")
    has = starts < ends
    head[has] = order[starts[has]]
    inner = order[:-1][of[:-1] == of[1:]]
    nxt[inner] = order[1:][of[:-1] == of[1:]]
    return head, nxt, to, cap


def scale_capacities(network: FlowNetwork) -> np.ndarray:
    """Integer capacities: finite arcs times 2**20 rounded; infinite arcs are
    remapped to 1 + sum of the scaled finite capacities."""
    caps = np.asarray(network.arcs_cap, dtype=float)
    if network.inf_capacity is not None:
        is_inf = caps == network.inf_capacity
    else:
        is_inf = np.zeros(caps.shape, bool)
    scaled = np.round(caps * CAPACITY_SCALE).astype(np.int64)
    finite_sum = scaled[~is_inf].sum() if (~is_inf).any() else np.int64(0)
    scaled[is_inf] = finite_sum + 1
    total = scaled.sum()
    if total >= _MAX_TOTAL_CAPACITY:
        raise FlowStructureError(f"scaled capacities overflow the solver range (sum {total})")
    return scaled


def max_flow(network: FlowNetwork) -> CutResult:
    """Maximum flow and the canonical minimum cut of the network.

    The source side is the complement of the nodes that can reach the sink in
    the residual graph; it is the unique coordinatewise-largest minimum cut.
    Deterministic: arc order is canonical, the kernel has no randomness.
    """
    n = network.node_count
    frm = np.asarray(network.arcs_from, dtype=np.int64)
    to = np.asarray(network.arcs_to, dtype=np.int64)
    if frm.size != to.size or frm.size != len(network.arcs_cap):
        raise FlowStructureError("arc arrays have inconsistent lengths")
    for arr, name in ((frm, "from"), (to, "to")):
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise FlowStructureError(f"dangling arc endpoint in '{name}' column")
    if not (0 <= network.source < n and 0 <= network.sink < n):
        raise FlowStructureError("source/sink outside node range")
    if network.source == network.sink:
        raise FlowStructureError("source equals sink")
    if np.asarray(network.arcs_cap).size and np.min(network.arcs_cap) < 0:
        raise FlowStructureError("negative capacity")

    caps_int = scale_capacities(network)
    head, nxt, to2, cap2 = _build_csr(n, frm, to, caps_int)
    flow_int, reaches_sink = _dinic(head, nxt, to2, cap2, network.source, network.sink)
    source_set = reaches_sink == 0
    if not source_set[network.source] or source_set[network.sink]:
        raise FlowStructureError("terminals ended up on the wrong cut sides")
    return CutResult(
        flow_value=float(flow_int) / CAPACITY_SCALE,
        flow_int=int(flow_int),
        source_set=source_set,
    )


def extract_cut_indices(result: CutResult, network: FlowNetwork) -> np.ndarray:
    """Per-ray cut index: the outermost sample on the source side.

    Verifies, before returning, that each ray's source-side nodes form a
    contiguous inner run, that neighbor indices differ by at most delta_r,
    and that no infinite arc crosses the cut.
    """
    R, Z = network.ray_count, network.samples_per_ray
    if R == 0 or Z == 0:
        raise CutStructureError("network carries no ray layout")
    node_in = result.source_set[: R * Z].reshape(R, Z)
    if not node_in[:, 0].all():
        raise CutStructureError("a ray has no source-side node despite base anchoring")
    run_len = node_in.cumsum(axis=1)
    indices = run_len.argmax(axis=1)
    expected = np.arange(Z)[None, :] <= indices[:, None]
    if not (node_in == expected).all():
        raise CutStructureError("source side of some ray is not a contiguous inner run")
    for r, neighbors in enumerate(network.adjacency or ()):
        for rn in neighbors:
            if abs(int(indices[r]) - int(indices[rn])) > network.delta_r:
                raise CutStructureError(
                    f"smoothness bound violated between rays {r} and {rn}"
                )
    if network.inf_capacity is not None:
        caps = np.asarray(network.arcs_cap)
        inf_arcs = caps == network.inf_capacity
        crossing = result.source_set[network.arcs_from] & ~result.source_set[network.arcs_to]
        if (inf_arcs & crossing).any():
            raise CutStructureError("an infinite arc crosses the returned cut")
    result.cut_indices = indices
    return indices


def min_cut_value(network: FlowNetwork, source_set: np.ndarray) -> int:
    """Total scaled capacity of arcs from the source side to its complement."""
    caps_int = scale_capacities(network)
    crossing = source_set[network.arcs_from] & ~source_set[network.arcs_to]
    return int(caps_int[crossing].sum())


BRUTE_FORCE_LIMIT = 10 ** 6


def brute_force_min_surface(costs, weights: np.ndarray, adjacency, delta_r: int):
    """Exhaustive minimal surface for small instances (test oracle).

    Enumerates every index vector in {0..Z-1}**R that satisfies
    |z_r - z_rn| <= delta_r for all adjacent ray pairs and returns the one
    minimizing the summed inner-run weights. Among ties the lexicographically
    largest vector wins, which matches the solver's largest-source-side cut.
    The returned cost excludes the constant offset sum(max(0, -w)); adding it
    reproduces the max-flow value.
    """
    w = np.asarray(weights, dtype=float)
    R, Z = w.shape
    if Z ** R > BRUTE_FORCE_LIMIT:
        raise ValueError(f"instance too large to enumerate ({Z}**{R} > {BRUTE_FORCE_LIMIT})")
    prefix = w.cumsum(axis=1)
    grids = np.indices((Z,) * R).reshape(R, -1)  # columns in ascending lex order
    feasible = np.ones(grids.shape[1], dtype=bool)
    for r in range(R):
        for rn in adjacency[r]:
            if rn > r:
                feasible &= np.abs(grids[r] - grids[rn]) <= delta_r
    if not feasible.any():
        raise ValueError("no feasible index vector (adjacency inconsistent with delta_r)")
    cand = grids[:, feasible]
    total = prefix[np.arange(R)[:, None], cand].sum(axis=0)
    best = total.min()
    pick = np.where(total == best)[0][-1]   # last = lexicographically largest
    return cand[:, pick].copy(), float(best)


def surface_cost_offset(weights: np.ndarray) -> float:
    """Constant that separates the surface objective from the cut value."""
    w = np.asarray(weights, dtype=float)
    return float(np.maximum(-w, 0.0).sum())


def all_pairs_adjacency(ray_count: int):
    """Every ray adjacent to every other (used by small synthetic instances)."""
    return tuple(tuple(rn for rn in range(ray_count) if rn != r) for r in range(ray_count))


# ---------------------------------------------------------------------------
# DIMACS max-flow input (debugging / benchmarking path)


def parse_dimacs(text: str) -> FlowNetwork:
    """Parse 'p max N M', 'n <id> s|t' and 'a <u> <v> <cap>' lines (1-based ids)."""
    n_nodes = None
    source = sink = None
    frm, to, cap = [], [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "p":
            if len(parts) != 4 or parts[1] != "max":
                raise DimacsError(lineno, f"expected 'p max N M', got {line!r}")
            try:
                n_nodes = int(parts[2])
                int(parts[3])
            except ValueError:
                raise DimacsError(lineno, "N and M must be integers")
        elif tag == "n":
            if len(parts) != 3 or parts[2] not in ("s", "t"):
                raise DimacsError(lineno, f"expected 'n <id> s|t', got {line!r}")
            try:
                node = int(parts[1]) - 1
            except ValueError:
                raise DimacsError(lineno, "node id must be an integer")
            if parts[2] == "s":
                source = node
            else:
                sink = node
        elif tag == "a":
            if len(parts) != 4:
                raise DimacsError(lineno, f"expected 'a <u> <v> <cap>', got {line!r}")
            try:
                u, v = int(parts[1]) - 1, int(parts[2]) - 1
                c = float(parts[3])
            except ValueError:
                raise DimacsError(lineno, "arc fields must be numeric")
            if c < 0:
                raise DimacsError(lineno, "negative capacity")
            frm.append(u)
            to.append(v)
            cap.append(c)
        else:
            raise DimacsError(lineno, f"unknown line tag {tag!r}")
    if n_nodes is None:
        raise DimacsError(0, "missing problem line 'p max N M'")
    if source is None or sink is None:
        raise DimacsError(0, "missing source or sink declaration")
    for lineno_like, (u, v) in enumerate(zip(frm, to)):
        if not (0 <= u < n_nodes and 0 <= v < n_nodes):
            raise DimacsError(0, f"arc ({u + 1}, {v + 1}) references a node outside 1..{n_nodes}")
    return FlowNetwork(
        node_count=n_nodes,
        arcs_from=np.asarray(frm, dtype=np.int64),
        arcs_to=np.asarray(to, dtype=np.int64),
        arcs_cap=np.asarray(cap, dtype=float),
        source=source,
        sink=sink,
        inf_capacity=None,
    )
