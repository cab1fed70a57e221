"""Write DDF curves and their comparison columns for a set of antenna configurations.

    python3 scripts/figure_data.py [--out-dir results] [--r-step 0.01]

One CSV per configuration, in the same format as ``dmtlab compare``.
"""

import argparse
from pathlib import Path

from dmtlab.cli import RunConfig, run

CONFIGS = ["1,1,1", "1,2,1", "2,1,2", "3,1,3", "2,2,2", "2,3,2", "2,5,2", "3,3,3"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    ap.add_argument("--r-step", type=float, default=0.01)
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    for text in CONFIGS:
        antennas = tuple(int(v) for v in text.split(","))
        path = args.out_dir / f"compare_{text.replace(',', '')}.csv"
        rc = RunConfig("compare", antennas=antennas, r_step=args.r_step, output_path=str(path))
        run(rc)
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
