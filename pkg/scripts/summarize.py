"""Print mean generalization error per (noise, penalty, eta, T) for result CSVs."""
import sys

from lsts_sparse.experiments import read_rows, summarize


def main(paths):
    for path in paths:
        stats = summarize(read_rows(path))
        print(f"== {path}")
        print(f"{'noise':>10} {'penalty':>7} {'eta':>5} {'T':>5} {'mean':>10} {'se':>9} {'n':>3}")
        for (noise, penalty, d, eta, T), (mean, se, n) in sorted(stats.items()):
            print(f"{noise:>10} {penalty:>7} {eta:>5g} {T:>5d} {mean:>10.5f} {se:>9.5f} {n:>3d}")


if __name__ == "__main__":
    main(sys.argv[1:])
