"""Numba kernels shared by the tree, forest, and SVM trainers.

All randomness flows through an explicit splitmix64 state so that results are
bit-identical for a given seed, independent of thread scheduling. Sparse
matrices are consumed as raw CSC/CSR arrays; implicit zeros are handled as a
single aggregated value group during split search, so full rows are never
densified.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
GOLD_INT = 0x9E3779B97F4A7C15  # stream state advances by this per draw
_GOLD = U64(GOLD_INT)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)
_UNIT53 = 1.0 / 9007199254740992.0  # 2**-53

GINI = 0
ENTROPY = 1
SPLIT_BEST = 0
SPLIT_RANDOM = 1


@njit(nogil=True, cache=True, inline="always")
def _next64(state):
    state = state + _GOLD
    z = state
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    return state, z ^ (z >> U64(31))


@njit(nogil=True, cache=True, inline="always")
def _rand_below(state, n):
    state, z = _next64(state)
    return state, np.int64(z % U64(n))


@njit(nogil=True, cache=True, inline="always")
def _rand_unit(state):
    state, z = _next64(state)
    return state, (z >> U64(11)) * _UNIT53


@njit(nogil=True, cache=True)
def _fill_bootstrap(state, out):
    n = out.shape[0]
    for i in range(n):
        state, r = _rand_below(state, n)
        out[i] = r
    return state


@njit(nogil=True, cache=True)
def derive_seed(master, token):
    # one splitmix step over (master ^ rotated token); keeps sub-streams apart
    mixed = U64(master) ^ (U64(token) * _MIX1 + _GOLD)
    _, z = _next64(mixed)
    return z


@njit(nogil=True, cache=True)
def _sort3(vals, wp, wn, lo, hi, sort_stack):
    """In-place quicksort of vals[lo..hi] carrying wp/wn along."""
    top = 0
    sort_stack[top] = lo
    sort_stack[top + 1] = hi
    top += 2
    while top > 0:
        top -= 2
        lo = sort_stack[top]
        hi = sort_stack[top + 1]
        while hi - lo >= 16:
            # median-of-three pivot
            mid = (lo + hi) // 2
            a, b, c = vals[lo], vals[mid], vals[hi]
            if a > b:
                if b > c:
                    pivot = b
                elif a > c:
                    pivot = c
                else:
                    pivot = a
            else:
                if a > c:
                    pivot = a
                elif b > c:
                    pivot = c
                else:
                    pivot = b
            i, j = lo, hi
            while i <= j:
                while vals[i] < pivot:
                    i += 1
                while vals[j] > pivot:
                    j -= 1
                if i <= j:
                    vals[i], vals[j] = vals[j], vals[i]
                    wp[i], wp[j] = wp[j], wp[i]
                    wn[i], wn[j] = wn[j], wn[i]
                    i += 1
                    j -= 1
            # recurse into the shorter side; iterate on the longer one
            if j - lo < hi - i:
                if i < hi:
                    sort_stack[top] = i
                    sort_stack[top + 1] = hi
                    top += 2
                hi = j
            else:
                if lo < j:
                    sort_stack[top] = lo
                    sort_stack[top + 1] = j
                    top += 2
                lo = i
        # insertion sort for small ranges
        for i in range(lo + 1, hi + 1):
            v = vals[i]
            p = wp[i]
            q = wn[i]
            j = i - 1
            while j >= lo and vals[j] > v:
                vals[j + 1] = vals[j]
                wp[j + 1] = wp[j]
                wn[j + 1] = wn[j]
                j -= 1
            vals[j + 1] = v
            wp[j + 1] = p
            wn[j + 1] = q


@njit(nogil=True, cache=True)
def _score_tables(m):
    """Lookup tables that make split scoring division- and log-free.

    inv[i] = 1/i and xlog[i] = i*log2(i). A split (pL,nL | pR,nR) is ranked by
      gini:    (pL^2+nL^2)*inv[mL] + (pR^2+nR^2)*inv[mR]      (maximize)
      entropy: xlog[pL]+xlog[nL]-xlog[mL] + same for the right (maximize)
    Both orderings are algebraically identical to maximizing impurity
    decrease, and a split improves on its parent iff its score exceeds the
    parent's own score under the same formula.
    """
    inv = np.empty(m + 1, np.float64)
    xlog = np.empty(m + 1, np.float64)
    inv[0] = 0.0
    xlog[0] = 0.0
    for i in range(1, m + 1):
        inv[i] = 1.0 / i
        xlog[i] = i * np.log2(i)
    return inv, xlog


@njit(nogil=True, cache=True, inline="always")
def _side_score(pos, neg, inv, xlog, criterion):
    if criterion == GINI:
        return (pos * pos + neg * neg) * inv[pos + neg]
    return xlog[pos] + xlog[neg] - xlog[pos + neg]


@njit(nogil=True, cache=True)
def _grow_tree(
    data, indices, indptr, n_rows, n_cols, y,
    samples, m,
    criterion, splitter, k, min_split, min_leaf, state,
    out_feature, out_threshold, out_left, out_right, out_pos, out_neg,
    row_count, col_val, vals, wpos, wneg, gval, gpos, gneg, tmp, cand, stack,
    sort_stack, inv, xlog,
):
    """Grow one CART tree over samples[0:m] (row ids, repeats allowed).

    Returns the node count. Node 0 is the root; leaves have feature -1.
    Split search walks candidate features in ascending column order and
    keeps the first split with the strictly largest impurity decrease:
    candidates are ranked by _side_score(left) + _side_score(right), which
    orders them identically and beats the parent's score exactly when the
    decrease is positive.
    """
    root_pos = 0
    for i in range(m):
        root_pos += y[samples[i]]
    node_count = 1
    sp = 0
    stack[sp] = 0
    stack[sp + 1] = m
    stack[sp + 2] = 0
    stack[sp + 3] = root_pos
    sp += 4
    while sp > 0:
        sp -= 4
        start = stack[sp]
        end = stack[sp + 1]
        node = stack[sp + 2]
        pos_w = stack[sp + 3]
        mn = end - start
        neg_w = mn - pos_w
        out_pos[node] = pos_w
        out_neg[node] = neg_w
        out_feature[node] = -1
        out_left[node] = -1
        out_right[node] = -1
        out_threshold[node] = 0.0
        if pos_w == 0 or neg_w == 0 or mn < min_split or mn < 2 * min_leaf:
            continue
        for i in range(start, end):
            row_count[samples[i]] += 1
        best_score = _side_score(pos_w, neg_w, inv, xlog, criterion)
        best_f = np.int64(-1)
        best_thr = 0.0
        n_cand = k if k < n_cols else n_cols
        if k < n_cols:
            # Floyd's k-of-n sample, then ascending order for determinism;
            # self-contained per node so trees depend only on their own seed
            for j in range(n_cols - k, n_cols):
                state, t = _rand_below(state, j + 1)
                hit = False
                for q in range(j - (n_cols - k)):
                    if cand[q] == t:
                        hit = True
                        break
                cand[j - (n_cols - k)] = j if hit else t
            for i in range(1, k):
                v = cand[i]
                j = i - 1
                while j >= 0 and cand[j] > v:
                    cand[j + 1] = cand[j]
                    j -= 1
                cand[j + 1] = v
        for ci in range(n_cand):
            f = cand[ci] if k < n_cols else np.int64(ci)
            p0 = indptr[f]
            p1 = indptr[f + 1]
            cnt = 0
            gp = 0
            gn = 0
            if p1 - p0 > 8 * mn:
                # node is much smaller than the column: binary-search each
                # sample occurrence instead of scanning the whole column
                for i in range(start, end):
                    r = samples[i]
                    lo = p0
                    hi = p1
                    while lo < hi:
                        mid = (lo + hi) >> 1
                        rr = indices[mid]
                        if rr == r:
                            vals[cnt] = data[mid]
                            if y[r] == 1:
                                wpos[cnt] = 1
                                wneg[cnt] = 0
                                gp += 1
                            else:
                                wpos[cnt] = 0
                                wneg[cnt] = 1
                                gn += 1
                            cnt += 1
                            break
                        if rr < r:
                            lo = mid + 1
                        else:
                            hi = mid
            else:
                for p in range(p0, p1):
                    r = indices[p]
                    c = row_count[r]
                    if c > 0:
                        vals[cnt] = data[p]
                        if y[r] == 1:
                            wpos[cnt] = c
                            wneg[cnt] = 0
                            gp += c
                        else:
                            wpos[cnt] = 0
                            wneg[cnt] = c
                            gn += c
                        cnt += 1
            zp = pos_w - gp
            zn = neg_w - gn
            zm = zp + zn
            if cnt == 0:
                continue  # constant zero inside this node
            if splitter == SPLIT_RANDOM:
                vmin = vals[0]
                vmax = vals[0]
                for i in range(1, cnt):
                    if vals[i] < vmin:
                        vmin = vals[i]
                    if vals[i] > vmax:
                        vmax = vals[i]
                if zm > 0:
                    if vmin > 0.0:
                        vmin = 0.0
                    if vmax < 0.0:
                        vmax = 0.0
                if vmin == vmax:
                    continue
                state, u = _rand_unit(state)
                thr = vmin + u * (vmax - vmin)
                if thr >= vmax:
                    thr = vmin
                lp = 0
                ln = 0
                for i in range(cnt):
                    if vals[i] <= thr:
                        lp += wpos[i]
                        ln += wneg[i]
                if zm > 0 and thr >= 0.0:
                    lp += zp
                    ln += zn
                ml = lp + ln
                mr = mn - ml
                if ml < min_leaf or mr < min_leaf:
                    continue
                score = _side_score(lp, ln, inv, xlog, criterion) + _side_score(
                    pos_w - lp, neg_w - ln, inv, xlog, criterion
                )
                if score > best_score:
                    best_score = score
                    best_f = f
                    best_thr = thr
            else:
                _sort3(vals, wpos, wneg, 0, cnt - 1, sort_stack)
                # merge equal values into groups; implicit zeros enter as one
                # aggregated group at their sorted position
                g = 0
                zero_done = zm == 0
                i = 0
                while i < cnt:
                    v = vals[i]
                    if not zero_done and v > 0.0:
                        gval[g] = 0.0
                        gpos[g] = zp
                        gneg[g] = zn
                        g += 1
                        zero_done = True
                    ap = 0
                    an = 0
                    while i < cnt and vals[i] == v:
                        ap += wpos[i]
                        an += wneg[i]
                        i += 1
                    gval[g] = v
                    gpos[g] = ap
                    gneg[g] = an
                    g += 1
                if not zero_done:
                    gval[g] = 0.0
                    gpos[g] = zp
                    gneg[g] = zn
                    g += 1
                if g < 2:
                    continue
                lp = 0
                ln = 0
                for b in range(g - 1):
                    lp += gpos[b]
                    ln += gneg[b]
                    ml = lp + ln
                    mr = mn - ml
                    if ml < min_leaf or mr < min_leaf:
                        continue
                    score = _side_score(lp, ln, inv, xlog, criterion) + _side_score(
                        pos_w - lp, neg_w - ln, inv, xlog, criterion
                    )
                    if score > best_score:
                        thr = 0.5 * (gval[b] + gval[b + 1])
                        if thr >= gval[b + 1]:
                            # adjacent floats can round the midpoint up; pin
                            # the threshold so both children stay non-empty
                            thr = gval[b]
                        best_score = score
                        best_f = f
                        best_thr = thr
        if best_f < 0:
            for i in range(start, end):
                row_count[samples[i]] -= 1
            continue
        # materialize the winning column for the node rows, then partition
        for i in range(start, end):
            col_val[samples[i]] = 0.0
        for p in range(indptr[best_f], indptr[best_f + 1]):
            r = indices[p]
            if row_count[r] > 0:
                col_val[r] = data[p]
        for i in range(start, end):
            row_count[samples[i]] -= 1
        nl = 0
        lpos = 0
        for i in range(start, end):
            r = samples[i]
            if col_val[r] <= best_thr:
                tmp[nl] = r
                nl += 1
                lpos += y[r]
        nr = nl
        for i in range(start, end):
            r = samples[i]
            if col_val[r] > best_thr:
                tmp[nr] = r
                nr += 1
        for i in range(mn):
            samples[start + i] = tmp[i]
        out_feature[node] = best_f
        out_threshold[node] = best_thr
        left_id = node_count
        right_id = node_count + 1
        node_count += 2
        out_left[node] = left_id
        out_right[node] = right_id
        stack[sp] = start + nl
        stack[sp + 1] = end
        stack[sp + 2] = right_id
        stack[sp + 3] = pos_w - lpos
        sp += 4
        stack[sp] = start
        stack[sp + 1] = start + nl
        stack[sp + 2] = left_id
        stack[sp + 3] = lpos
        sp += 4
    return node_count


@njit(nogil=True, cache=True)
def fit_tree(
    data, indices, indptr, n_rows, n_cols, y, samples,
    criterion, splitter, k, min_split, min_leaf, seed,
):
    """Grow one tree and return trimmed node arrays."""
    m = samples.shape[0]
    cap = 2 * m + 1
    out_feature = np.empty(cap, np.int64)
    out_threshold = np.empty(cap, np.float64)
    out_left = np.empty(cap, np.int64)
    out_right = np.empty(cap, np.int64)
    out_pos = np.empty(cap, np.int64)
    out_neg = np.empty(cap, np.int64)
    row_count = np.zeros(n_rows, np.int64)
    col_val = np.zeros(n_rows, np.float64)
    vals = np.empty(m, np.float64)
    wpos = np.empty(m, np.int64)
    wneg = np.empty(m, np.int64)
    gval = np.empty(m + 1, np.float64)
    gpos = np.empty(m + 1, np.int64)
    gneg = np.empty(m + 1, np.int64)
    tmp = np.empty(m, np.int64)
    cand = np.empty(n_cols if n_cols > 0 else 1, np.int64)
    stack = np.empty(4 * cap + 8, np.int64)
    sort_stack = np.empty(128, np.int64)
    inv, xlog = _score_tables(m)
    work = samples.copy()
    n_nodes = _grow_tree(
        data, indices, indptr, n_rows, n_cols, y, work, m,
        criterion, splitter, k, min_split, min_leaf, U64(seed),
        out_feature, out_threshold, out_left, out_right, out_pos, out_neg,
        row_count, col_val, vals, wpos, wneg, gval, gpos, gneg, tmp, cand, stack,
        sort_stack, inv, xlog,
    )
    return (
        out_feature[:n_nodes].copy(),
        out_threshold[:n_nodes].copy(),
        out_left[:n_nodes].copy(),
        out_right[:n_nodes].copy(),
        out_pos[:n_nodes].copy(),
        out_neg[:n_nodes].copy(),
    )


@njit(nogil=True, cache=True, inline="always")
def _csr_value(data, indices, indptr, row, col):
    lo = indptr[row]
    hi = indptr[row + 1]
    while lo < hi:
        mid = (lo + hi) // 2
        c = indices[mid]
        if c == col:
            return data[mid]
        if c < col:
            lo = mid + 1
        else:
            hi = mid
    return 0.0


@njit(nogil=True, cache=True)
def tree_leaf_stats(
    feature, threshold, left, right, pos, neg,
    data, indices, indptr, n_val,
):
    """Per-row (positive, negative) training counts of the reached leaf."""
    out_pos = np.empty(n_val, np.int64)
    out_neg = np.empty(n_val, np.int64)
    for row in range(n_val):
        node = 0
        while feature[node] >= 0:
            v = _csr_value(data, indices, indptr, row, feature[node])
            node = left[node] if v <= threshold[node] else right[node]
        out_pos[row] = pos[node]
        out_neg[row] = neg[node]
    return out_pos, out_neg


@njit(nogil=True, cache=True)
def forest_votes_range(
    data, indices, indptr, n_rows, n_cols, y,
    tree_seeds, t0, t1, k, min_split, min_leaf,
    vdata, vindices, vindptr, n_val,
):
    """Fit trees t0..t1-1 on fresh bootstraps and return their positive votes
    over the validation rows. Trees are transient; scratch is reused."""
    m = n_rows
    cap = 2 * m + 1
    out_feature = np.empty(cap, np.int64)
    out_threshold = np.empty(cap, np.float64)
    out_left = np.empty(cap, np.int64)
    out_right = np.empty(cap, np.int64)
    out_pos = np.empty(cap, np.int64)
    out_neg = np.empty(cap, np.int64)
    row_count = np.zeros(n_rows, np.int64)
    col_val = np.zeros(n_rows, np.float64)
    vals = np.empty(m, np.float64)
    wpos = np.empty(m, np.int64)
    wneg = np.empty(m, np.int64)
    gval = np.empty(m + 1, np.float64)
    gpos = np.empty(m + 1, np.int64)
    gneg = np.empty(m + 1, np.int64)
    tmp = np.empty(m, np.int64)
    cand = np.empty(n_cols if n_cols > 0 else 1, np.int64)
    stack = np.empty(4 * cap + 8, np.int64)
    sort_stack = np.empty(128, np.int64)
    inv, xlog = _score_tables(m)
    samples = np.empty(m, np.int64)
    votes = np.zeros(n_val, np.int64)
    for t in range(t0, t1):
        state = _fill_bootstrap(U64(tree_seeds[t]), samples)
        _grow_tree(
            data, indices, indptr, n_rows, n_cols, y, samples, m,
            GINI, SPLIT_BEST, k, min_split, min_leaf, state,
            out_feature, out_threshold, out_left, out_right, out_pos, out_neg,
            row_count, col_val, vals, wpos, wneg, gval, gpos, gneg, tmp, cand,
            stack, sort_stack, inv, xlog,
        )
        for row in range(n_val):
            node = 0
            while out_feature[node] >= 0:
                v = _csr_value(vdata, vindices, vindptr, row, out_feature[node])
                node = out_left[node] if v <= out_threshold[node] else out_right[node]
            if out_pos[node] > out_neg[node]:
                votes[row] += 1
    return votes


@njit(nogil=True, cache=True)
def stacked_forest_votes(
    feature, threshold, left, right, pos, neg, offsets,
    data, indices, indptr, n_val,
):
    """Positive votes over rows for a stored forest (node ids are absolute)."""
    votes = np.zeros(n_val, np.int64)
    n_trees = offsets.shape[0] - 1
    for t in range(n_trees):
        base = offsets[t]
        for row in range(n_val):
            node = base
            while feature[node] >= 0:
                v = _csr_value(data, indices, indptr, row, feature[node])
                node = left[node] if v <= threshold[node] else right[node]
            if pos[node] > neg[node]:
                votes[row] += 1
    return votes


@njit(nogil=True, cache=True)
def draw_bootstrap(seed, n):
    out = np.empty(n, np.int64)
    _fill_bootstrap(U64(seed), out)
    return out


@njit(nogil=True, cache=True)
def pegasos_train(data, indices, indptr, n, d, y_signed, c_param, epochs, seed):
    """Primal sub-gradient descent for the linear soft-margin objective
    (1/2)||w||^2 + C * sum hinge, via the scaled-weight update with step
    1/(lambda * t), lambda = 1/(C * n). Bias is updated unregularized."""
    lam = 1.0 / (c_param * n)
    w = np.zeros(d, np.float64)
    b = 0.0
    scale = 1.0
    order = np.arange(n)
    state = U64(seed)
    t = 0
    for _ in range(epochs):
        for i in range(n - 1, 0, -1):
            state, j = _rand_below(state, i + 1)
            order[i], order[j] = order[j], order[i]
        for ii in range(n):
            idx = order[ii]
            t += 1
            eta = 1.0 / (lam * t)
            dot = 0.0
            for p in range(indptr[idx], indptr[idx + 1]):
                dot += w[indices[p]] * data[p]
            margin = y_signed[idx] * (scale * dot + b)
            factor = 1.0 - eta * lam
            if factor <= 0.0:
                # only at t == 1: the shrink annihilates the weight vector
                scale = 1.0
                for q in range(d):
                    w[q] = 0.0
            else:
                scale *= factor
            if margin < 1.0:
                coef = eta * y_signed[idx] / scale
                for p in range(indptr[idx], indptr[idx + 1]):
                    w[indices[p]] += coef * data[p]
                b += eta * y_signed[idx]
    for q in range(d):
        w[q] *= scale
    return w, b
