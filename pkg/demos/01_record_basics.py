"""Feed a handful of points through a RecordBook and watch the counters.

A new point sets a record exactly when no earlier point beats it in every
coordinate simultaneously; setting a record can retire ("kill") any current
records it beats in every coordinate. Ties block both directions, so exact
duplicates pile up as records.
"""

import numpy as np

from paretorecords import RecordBook

book = RecordBook(d=2)

script = [
    (np.array([1.0, 4.0]), "first point always sets a record"),
    (np.array([3.0, 2.0]), "incomparable with (1,4): both stay"),
    (np.array([2.0, 5.0]), "beats (1,4) in both coords: kills it"),
    (np.array([2.0, 5.0]), "exact duplicate: records, kills nothing"),
    (np.array([0.5, 0.5]), "dominated by everything: not a record"),
    (np.array([9.0, 9.0]), "beats all three current records at once"),
]

for point, why in script:
    out = book.observe(point)
    tag = "record" if out.is_record else "      "
    print(f"{str(point):12s} {tag} kills={out.kills}  # {why}")

print()
print(f"n={book.n} observations, R={book.R} records set, "
      f"r={book.r} still current, beta={book.beta} retired")
print(f"current records:\n{book.record_coords}")
print(f"record epochs (observation indices, 1-based): {list(book.epochs)}")
