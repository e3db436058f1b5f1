"""Oracle-call counts of bsdg vs unit double greedy as the lattice bound grows.

    python scripts/run_query_sweep.py --min-exp 4 --max-exp 14 -o sweep.dat

Writes a whitespace table (gnuplot: ``plot 'sweep.dat' using 1:3 with lp``).
"""

import argparse

from drsubmod.verification import query_scaling

parser = argparse.ArgumentParser()
parser.add_argument("--min-exp", type=int, default=4)
parser.add_argument("--max-exp", type=int, default=14)
parser.add_argument("--sources", type=int, default=8)
parser.add_argument("--targets", type=int, default=8)
parser.add_argument("--seed", type=int, default=0)
parser.add_argument("--no-unit", action="store_true")
parser.add_argument("-o", "--output", default="sweep.dat")
args = parser.parse_args()

report = query_scaling(
    range(args.min_exp, args.max_exp + 1),
    n_sources=args.sources,
    n_targets=args.targets,
    seed=args.seed,
    include_unit=not args.no_unit,
)
with open(args.output, "w") as fh:
    fh.write(report.table())
print(report.table(), end="")
print(f"affine in log2 B within 10%: {report.affine_ok}")
