#!/usr/bin/env python3
"""Throughput vs transmit SNR under a fixed total feedback-bit budget.

Runs the greedy-profile scheme against the three reference schemes (full
directions, truncated directions, random beamforming) on one topology and
writes a plot-ready CSV. With a fixed budget every quantized scheme
saturates at high SNR; the low-dimension profile saturates highest.
"""

import argparse
import sys

from iafeedback.cli import main as cli_main


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--G", type=int, default=3)
    ap.add_argument("--K", type=int, default=2)
    ap.add_argument("--N", type=int, default=4)
    ap.add_argument("--M", type=int, default=4)
    ap.add_argument("--d", type=int, default=1)
    ap.add_argument("--btot", type=int, default=800)
    ap.add_argument("--snr", default="0,10,20,30,40")
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out", default="throughput_vs_snr.csv")
    return ap.parse_args()


def main():
    args = parse_args()
    return cli_main([
        "sweep",
        "--G", str(args.G), "--K", str(args.K), "--N", str(args.N),
        "--M", str(args.M), "--d", str(args.d),
        "--seed", str(args.seed),
        "--snr", args.snr,
        "--btot", str(args.btot),
        "--trials", str(args.trials),
        "--out", args.out,
    ])


if __name__ == "__main__":
    sys.exit(main())
