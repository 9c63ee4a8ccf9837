"""Uniform h/k refinement on the smooth manufactured problem; prints observed orders."""
import argparse

from viscofem.cli import convergence_table
from viscofem.config import load_config
from viscofem.io import write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", help="INI config; defaults are used when omitted")
    ap.add_argument("--levels", type=int, default=4)
    ap.add_argument("--out", default="convergence.csv")
    a = ap.parse_args()
    cfg = load_config(a.config)
    rows = convergence_table(cfg, a.levels)
    write_csv(a.out, ["level", "h", "k", "error_linf_l2", "order"], rows)
    for r in rows:
        print(f"{r[0]:>2}  h={r[1]:.4g}  k={r[2]:.4g}  err={r[3]:.3e}  order={r[4]:.3f}")


if __name__ == "__main__":
    main()
