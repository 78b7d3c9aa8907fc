"""Frontier extremes of a simulated record set, plus an SVG picture.

F+ is the largest coordinate sum among current records. F- is the smallest
total budget a set of axis-aligned caps needs in order to touch every
current record: assign each record to one dimension, pay the per-dimension
maximum, minimize over assignments. The two dashed diagonals in the SVG
mark those two sums; the record staircase sits between them.
"""

import subprocess
import sys

import numpy as np

from paretorecords import (
    ObservationStream,
    RecordBook,
    f_minus_witness,
    frontier_summary,
)

book = RecordBook(d=2)
stream = ObservationStream(master_seed=7, trial=0, dim=2)
for row in stream.take(10_000):
    book.observe(row)

summary = frontier_summary(book)
print(f"after n={book.n}: r={book.r} current records")
print(f"F- = {summary.f_minus:.6f}")
print(f"F+ = {summary.f_plus:.6f}")
print(f"width = {summary.width:.6f}")
print(f"per-dimension maxima: {summary.dim_max}")
print(f"three largest sums seen: {summary.bhat[:3]}")

value, witness = f_minus_witness(book)
print(f"\ncheapest covering point: {witness} (sum {value:.6f})")

# same picture the CLI draws; drop it next to this script
out = "frontier_demo.svg"
subprocess.run(
    [sys.executable, "-m", "paretorecords.cli", "render",
     "--n", "10000", "--seed", "7", "--out", out],
    check=True)
print(f"staircase drawing written to {out}")
