"""Backend selection for the derivation-count chart.

The compiled extension is used when it was built; otherwise, or when a count
overflows 64 bits, the arbitrary-precision Python implementation runs.
"""

from ._chart_py import start_counts as python_start_counts

try:
    from ._chart import start_counts as compiled_start_counts
except ImportError:  # extension not built
    compiled_start_counts = None

BACKEND = "cython" if compiled_start_counts is not None else "python"


def start_counts(n_nt, n_letters, prods, eps, start, max_len):
    if compiled_start_counts is not None:
        try:
            return compiled_start_counts(n_nt, n_letters, prods, eps, start, max_len)
        except OverflowError:
            pass
    return python_start_counts(n_nt, n_letters, prods, eps, start, max_len)
