"""Pure-Python derivation-count chart over all words up to a length.

Words of length m are indexed ``0 .. n**m - 1`` in length-lexicographic order
(first letter most significant).  ``table[m][x]`` holds, for nonterminal ``x``,
the number of derivation trees of every word of length m, so every subword
is charted exactly once across the whole batch.
"""


def start_counts(n_nt, n_letters, prods, eps, start, max_len):
    """Derivation counts of ``start`` for every word of length 0..max_len.

    prods: iterable of (lhs, letter, left, right) integer tuples (short GNF);
    eps: per-nonterminal 0/1 flags for ``X ->``.
    """
    by_letter = [[] for _ in range(n_letters)]
    for x, a, y, z in prods:
        by_letter[a].append((x, y, z))
    pow_n = [n_letters**m for m in range(max_len + 1)]
    table = [[[1 if eps[x] else 0] for x in range(n_nt)]]
    result = [[table[0][start][0]]]
    for m in range(1, max_len + 1):
        size, sub = pow_n[m], pow_n[m - 1]
        cur = [[0] * size for _ in range(n_nt)]
        for w in range(size):
            a, r = divmod(w, sub)
            for x, y, z in by_letter[a]:
                total = 0
                for k in range(m):
                    left, right = divmod(r, pow_n[m - 1 - k])
                    cy = table[k][y][left]
                    if cy:
                        total += cy * table[m - 1 - k][z][right]
                if total:
                    cur[x][w] += total
        table.append(cur)
        result.append(cur[start])
    return result
