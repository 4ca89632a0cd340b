"""Hot loops: the splitmix64 generator, Rémy grafting and Boltzmann term
generation over flat arrays.

All functions are written in the numba-compatible subset so the same
source serves the jitted and the interpreted path.  Integer constants used
in 64-bit unsigned arithmetic must stay ``np.uint64``: numba promotes
mixed signed/unsigned operands to float.
"""
import math

import numpy as np

from ._accel import njit

GAMMA = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
SH30 = np.uint64(30)
SH27 = np.uint64(27)
SH31 = np.uint64(31)
SH11 = np.uint64(11)
ZERO64 = np.uint64(0)
INV53 = 1.0 / 9007199254740992.0

APP = -1
ABS = -2

ABORTED = -1


@njit
def next_u64(state):
    state[0] += GAMMA
    z = state[0]
    z = (z ^ (z >> SH30)) * MIX1
    z = (z ^ (z >> SH27)) * MIX2
    return z ^ (z >> SH31)


@njit
def next_double(state):
    """Uniform double in [0, 1)."""
    return float(next_u64(state) >> SH11) * INV53


@njit
def next_below(state, n):
    """Unbiased uniform integer in [0, n) for 0 < n < 2**63."""
    un = np.uint64(n)
    threshold = (ZERO64 - un) % un
    while True:
        r = next_u64(state)
        if r >= threshold:
            return np.int64(r % un)


@njit
def fill_bits(state, out):
    for i in range(out.shape[0]):
        out[i] = np.int8(next_u64(state) >> np.uint64(63))


# ---------------------------------------------------------------------------
# Rémy

@njit
def remy_links(n, state, ops):
    """Grow a uniform plane binary tree with ``n`` internal nodes.

    Cell ``L[0]`` points at the root; internal node ``2i-1`` keeps its
    children in cells ``2i-1`` (left) and ``2i`` (right).  Leaves have even
    ids, internal nodes odd ids.  Every node sits in exactly one cell, so a
    uniform cell is a uniform node.
    """
    links = np.empty(2 * n + 1, dtype=np.int64)
    links[0] = 0
    for k in range(n):
        draw = next_below(state, 4 * k + 2)
        side = draw & 1
        cell = draw >> 1
        top = 2 * k + 2
        links[top - side] = top
        links[top - 1 + side] = links[cell]
        links[cell] = top - 1
        ops[0] += 3
    return links


@njit
def links_to_preorder(links, ops):
    size = links.shape[0]
    bits = np.empty(size, dtype=np.int8)
    stack = np.empty(size, dtype=np.int64)
    sp = 1
    stack[0] = links[0]
    pos = 0
    while sp > 0:
        sp -= 1
        node = stack[sp]
        if node & 1:
            bits[pos] = 1
            stack[sp] = links[node + 1]
            stack[sp + 1] = links[node]
            sp += 2
        else:
            bits[pos] = 0
        pos += 1
    ops[0] += pos
    return bits


OPEN = np.uint8(40)
CLOSE = np.uint8(41)
SPACE = np.uint8(32)
LETTER_S = np.uint8(83)
LETTER_K = np.uint8(75)


@njit
def render_scaffold(bits, prims):
    """ASCII bytes of the combinator with preorder scaffold ``bits`` and
    leaf flags ``prims`` (0 for S, 1 for K)."""
    n_int = 0
    for i in range(bits.shape[0]):
        if bits[i]:
            n_int += 1
    out = np.empty(4 * n_int + 1, dtype=np.uint8)
    # one cell per open application: 0 while in its left child, 1 in its right
    side = np.empty(n_int + 1, dtype=np.int8)
    sp = 0
    pos = 0
    leaf = 0
    for i in range(bits.shape[0]):
        if bits[i]:
            out[pos] = OPEN
            pos += 1
            side[sp] = 0
            sp += 1
            continue
        out[pos] = LETTER_K if prims[leaf] else LETTER_S
        pos += 1
        leaf += 1
        while sp > 0 and side[sp - 1] == 1:
            out[pos] = CLOSE
            pos += 1
            sp -= 1
        if sp > 0:
            side[sp - 1] = 1
            out[pos] = SPACE
            pos += 1
    return out[:pos]


# ---------------------------------------------------------------------------
# Boltzmann generation


@njit
def _draw_index(state, lv, plain_level, p_head, head_w, head_tot, tail_cnt, q, log_q):
    """Index at level ``lv``: a marked head index with probability
    ``p_head[lv]``, otherwise a (truncated) geometric tail offset."""
    nhead = head_w.shape[0]
    avail = nhead if lv == plain_level else min(nhead, lv)
    if avail > 0 and next_double(state) < p_head[lv]:
        target = next_double(state) * head_tot[lv]
        acc = 0.0
        for i in range(avail):
            acc += head_w[i]
            if target < acc:
                return i
        return avail - 1
    w = next_double(state)
    cnt = tail_cnt[lv]
    if q >= 1.0:
        # constant-weight indices: uniform over the available tail
        return nhead + min(np.int64(w * cnt), cnt - 1)
    if cnt < 0:
        k = np.int64(math.floor(math.log1p(-w) / log_q))
    else:
        qc = q ** cnt
        k = np.int64(math.floor(math.log1p(-w * (1.0 - qc)) / log_q))
        if k >= cnt:
            k = cnt - 1
    return nhead + k


@njit
def boltzmann_attempt(state, root, p_app, p_abs, p_head, head_w, head_tot, tail_cnt,
                      q, abs_w, app_w, zero_w, succ_w, ceiling, out, stack):
    """One Boltzmann run from level ``root``; returns (tokens, size) or
    (ABORTED, size) once the size passes ``ceiling``."""
    plain_level = p_app.shape[0] - 1
    log_q = math.log(q) if q < 1.0 else 0.0
    cap = out.shape[0]
    stack[0] = root
    sp = 1
    pos = 0
    size = 0
    while sp > 0:
        if pos >= cap:
            return ABORTED, size
        sp -= 1
        lv = stack[sp]
        u = next_double(state)
        if u < p_app[lv]:
            out[pos] = APP
            size += app_w
            stack[sp] = lv
            stack[sp + 1] = lv
            sp += 2
        elif u < p_app[lv] + p_abs[lv]:
            out[pos] = ABS
            size += abs_w
            stack[sp] = lv + 1 if lv < plain_level else plain_level
            sp += 1
        else:
            k = _draw_index(state, lv, plain_level, p_head, head_w, head_tot, tail_cnt, q, log_q)
            out[pos] = k
            size += zero_w + k * succ_w
        pos += 1
        if size > ceiling:
            return ABORTED, size
    return pos, size


@njit
def boltzmann_window(state, root, p_app, p_abs, p_head, head_w, head_tot, tail_cnt,
                     q, abs_w, app_w, zero_w, succ_w, lo, hi, max_attempts, out, stack, stats):
    """Repeat attempts until one lands in [lo, hi].

    ``stats`` accumulates [attempts, too_small, too_large, nodes_built].
    Returns the token count of the accepted term, or -1.
    """
    for _ in range(max_attempts):
        stats[0] += 1
        count, size = boltzmann_attempt(state, root, p_app, p_abs, p_head, head_w, head_tot,
                                        tail_cnt, q, abs_w, app_w, zero_w, succ_w, hi, out, stack)
        if count == ABORTED:
            stats[2] += 1
            continue
        stats[3] += count
        if size < lo:
            stats[1] += 1
            continue
        return count
    return -1


@njit
def token_openness(tokens, count):
    """Smallest m making the preorder term m-open."""
    depth = np.empty(count + 1, dtype=np.int64)
    depth[0] = 0
    sp = 1
    need = 0
    for i in range(count):
        sp -= 1
        d = depth[sp]
        t = tokens[i]
        if t == APP:
            depth[sp] = d
            depth[sp + 1] = d
            sp += 2
        elif t == ABS:
            depth[sp] = d + 1
            sp += 1
        else:
            if t - d + 1 > need:
                need = t - d + 1
    return need


@njit
def token_size(tokens, count, abs_w, app_w, zero_w, succ_w):
    total = 0
    for i in range(count):
        t = tokens[i]
        if t == APP:
            total += app_w
        elif t == ABS:
            total += abs_w
        else:
            total += zero_w + t * succ_w
    return total


@njit
def tree_attempt(state, p_node, ceiling, bits):
    """Boltzmann binary tree (size = internal nodes) with anticipated rejection."""
    cap = bits.shape[0]
    sp = 1
    pos = 0
    size = 0
    while sp > 0:
        if pos >= cap:
            return ABORTED, size
        sp -= 1
        if next_double(state) < p_node:
            bits[pos] = 1
            size += 1
            sp += 2
            if size > ceiling:
                return ABORTED, size
        else:
            bits[pos] = 0
        pos += 1
    return pos, size
