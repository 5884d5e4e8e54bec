#!/usr/bin/env python3
"""Recompute per-condition error summaries from an hmdn estimate dump.

Reads only the R lines, so it does not share any code with the C++ evaluator.
Prints condition,method,n,mean_error,median_error,mean_improvement (CSV, 17
significant digits). Bootstrap intervals are not recomputed.
"""
import argparse
import math
import statistics
import sys


def read_records(path):
    out = {}
    with open(path, encoding="ascii") as f:
        for line in f:
            if not line.startswith("R "):
                continue
            tok = line.split()
            cond, d, e = tok[2], int(tok[3]), int(tok[4])
            vals = [float(x) for x in tok[8:]]
            truth = vals[:d]
            est = vals[d + e:2 * d + e]
            base = vals[2 * d + e:3 * d + e]
            lists = out.setdefault(cond, ([], []))
            lists[0].append(math.dist(base, truth))
            lists[1].append(math.dist(est, truth))
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("dump")
    args = ap.parse_args(argv)
    w = sys.stdout
    w.write("condition,method,n,mean_error,median_error,mean_improvement\n")
    for cond, (base, hmdn) in read_records(args.dump).items():
        diff = statistics.fmean(b - h for b, h in zip(base, hmdn))
        w.write(f"{cond},baseline,{len(base)},{statistics.fmean(base):.17g},{statistics.median(base):.17g},\n")
        w.write(f"{cond},hmdn,{len(hmdn)},{statistics.fmean(hmdn):.17g},{statistics.median(hmdn):.17g},{diff:.17g}\n")


if __name__ == "__main__":
    main()
