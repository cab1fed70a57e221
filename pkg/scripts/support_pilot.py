"""Pilot run that fixes the support-set violation thresholds.

Draws (2,2,2) channels with a seed distinct from the one the checks use,
measures the violation fraction at several SNRs and stores
``pilot + 4 standard errors`` (rounded up) as the threshold.

    python3 scripts/support_pilot.py [--samples 100000] [--seed 1234]
"""

import argparse
import json
import math
from pathlib import Path

from dmtlab.exponents import AntennaConfig
from dmtlab.simulator import support_set_check

SNRS_DB = (30, 40, 45, 50, 60)
OUT = Path(__file__).resolve().parents[1] / "src" / "dmtlab" / "data" / "support_pilot.json"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=1234)
    ap.add_argument("--margin", type=float, default=0.15)
    ap.add_argument("--out", type=Path, default=OUT)
    args = ap.parse_args()

    cfg = AntennaConfig(2, 2, 2)
    pilot, threshold = {}, {}
    for db in SNRS_DB:
        frac = support_set_check(cfg, 10 ** (db / 10), args.samples, args.seed, args.margin)
        se = math.sqrt(max(frac * (1 - frac), 1.0 / args.samples) / args.samples)
        pilot[f"{db:g}"] = frac
        threshold[f"{db:g}"] = math.ceil((frac + 4 * se) * 1000) / 1000
        print(f"{db:3d} dB  violation {frac:.5f}  threshold {threshold[f'{db:g}']:.3f}")

    doc = {
        "antennas": [2, 2, 2],
        "margin": args.margin,
        "samples": args.samples,
        "seed": args.seed,
        "pilot": pilot,
        "threshold": threshold,
    }
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(doc, indent=2) + "\n")


if __name__ == "__main__":
    main()
