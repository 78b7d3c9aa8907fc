"""Exact record-probability curves against a quick Monte Carlo check.

p_record(n, d) is computed exactly (rational alternating sum for small n,
fixed-grid quadrature beyond), and mean_records accumulates it. The Monte
Carlo column is only here to make the agreement visible; the package's own
tests pin these values far more tightly.
"""

import numpy as np

from paretorecords import ObservationStream, RecordBook, mean_records, p_record

d = 2
print(f"d = {d}")
print(f"{'n':>8s} {'p_record':>12s} {'mean_records':>14s}")
for n in (2, 10, 100, 1000, 10**4, 10**5, 10**6):
    print(f"{n:8d} {p_record(n, d):12.6g} {mean_records(n, d):14.6f}")

trials, n = 400, 1000
counts = np.empty(trials)
for t in range(trials):
    book = RecordBook(d)
    for row in ObservationStream(master_seed=11, trial=t, dim=d).take(n):
        book.observe(row)
    counts[t] = book.R

exact = mean_records(n, d)
se = counts.std(ddof=1) / np.sqrt(trials)
print(f"\nMC mean records at n={n} over {trials} trials: "
      f"{counts.mean():.3f} +- {se:.3f}")
print(f"exact value: {exact:.3f}  (|diff| = {abs(counts.mean() - exact):.3f})")
