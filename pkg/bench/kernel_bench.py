"""Standalone kernel benchmark; same comparison as `ranorch bench`."""

import argparse

from ranorch.netsim.bench import run_bench

if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--steps", type=int, default=20000)
    parser.add_argument("--ues", type=int, default=12)
    args = parser.parse_args()
    for line in run_bench(args.steps, args.ues):
        print(line)
