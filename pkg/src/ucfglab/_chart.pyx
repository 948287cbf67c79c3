# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled derivation-count chart; same contract as ``_chart_py.start_counts``.

Counts are kept in unsigned 64-bit cells.  Any overflow raises OverflowError
and the caller reruns the batch on the arbitrary-precision fallback.
"""

from libc.stdlib cimport malloc, free, calloc
from libc.stdint cimport uint64_t

cdef extern from *:
    """
    static inline int u64_mul_overflow(unsigned long long a, unsigned long long b,
                                       unsigned long long *out) {
        return __builtin_mul_overflow(a, b, out);
    }
    static inline int u64_add_overflow(unsigned long long a, unsigned long long b,
                                       unsigned long long *out) {
        return __builtin_add_overflow(a, b, out);
    }
    """
    int u64_mul_overflow(unsigned long long a, unsigned long long b, unsigned long long *out) nogil
    int u64_add_overflow(unsigned long long a, unsigned long long b, unsigned long long *out) nogil


def start_counts(int n_nt, int n_letters, prods, eps, int start, int max_len):
    cdef int n_prods = len(prods)
    cdef int m, k, i, p, x, y, z, a
    cdef Py_ssize_t w, size, sub, r, left, right, total_cells
    cdef unsigned long long cy, cz, prod, acc
    cdef Py_ssize_t *pow_n
    cdef int *px
    cdef int *py
    cdef int *pz
    cdef int *letter_start
    cdef uint64_t **table
    cdef int overflow = 0

    if max_len < 0:
        return []
    pow_n = <Py_ssize_t *> malloc((max_len + 1) * sizeof(Py_ssize_t))
    table = <uint64_t **> calloc(max_len + 1, sizeof(uint64_t *))
    px = <int *> malloc((n_prods + 1) * sizeof(int))
    py = <int *> malloc((n_prods + 1) * sizeof(int))
    pz = <int *> malloc((n_prods + 1) * sizeof(int))
    letter_start = <int *> malloc((n_letters + 1) * sizeof(int))
    if not pow_n or not table or not px or not py or not pz or not letter_start:
        raise MemoryError()
    try:
        # productions sorted by letter, indexed through letter_start
        order = sorted(range(n_prods), key=lambda j: prods[j][1])
        for a in range(n_letters + 1):
            letter_start[a] = n_prods
        for i in range(n_prods - 1, -1, -1):
            x, a, y, z = prods[order[i]]
            px[i] = x
            py[i] = y
            pz[i] = z
            letter_start[a] = i
        for a in range(n_letters - 1, -1, -1):
            if letter_start[a] > letter_start[a + 1]:
                letter_start[a] = letter_start[a + 1]

        pow_n[0] = 1
        for m in range(1, max_len + 1):
            pow_n[m] = pow_n[m - 1] * n_letters

        table[0] = <uint64_t *> calloc(n_nt, sizeof(uint64_t))
        if not table[0]:
            raise MemoryError()
        for x in range(n_nt):
            table[0][x] = 1 if eps[x] else 0

        result = [[int(table[0][start])]]
        for m in range(1, max_len + 1):
            size = pow_n[m]
            sub = pow_n[m - 1]
            total_cells = size * n_nt
            table[m] = <uint64_t *> calloc(total_cells, sizeof(uint64_t))
            if not table[m]:
                raise MemoryError()
            with nogil:
                for w in range(size):
                    a = <int> (w / sub)
                    r = w % sub
                    for p in range(letter_start[a], letter_start[a + 1]):
                        y = py[p]
                        z = pz[p]
                        acc = 0
                        for k in range(m):
                            left = r / pow_n[m - 1 - k]
                            right = r % pow_n[m - 1 - k]
                            cy = table[k][y * pow_n[k] + left]
                            if cy == 0:
                                continue
                            cz = table[m - 1 - k][z * pow_n[m - 1 - k] + right]
                            if cz == 0:
                                continue
                            if u64_mul_overflow(cy, cz, &prod) or u64_add_overflow(acc, prod, &acc):
                                overflow = 1
                                break
                        if overflow:
                            break
                        x = px[p]
                        if u64_add_overflow(table[m][x * size + w], acc, &table[m][x * size + w]):
                            overflow = 1
                            break
                    if overflow:
                        break
            if overflow:
                raise OverflowError("derivation count exceeds 64 bits")
            result.append([int(table[m][start * size + w]) for w in range(size)])
        return result
    finally:
        for m in range(max_len + 1):
            if table[m]:
                free(table[m])
        free(table)
        free(pow_n)
        free(px)
        free(py)
        free(pz)
        free(letter_start)
