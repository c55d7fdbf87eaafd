"""Classify every line through the origin for the bundled k = 2 actions.

Prints bucket counts per tag and the refined singular lines.
"""
import argparse
import math
import time
from dataclasses import dataclass

from subdyn.spectrum import angle_sweep, cat_pair, cat_pair_center, common_eigenstructure, tensor_pair

ACTIONS = {"cat": cat_pair, "center": cat_pair_center, "tensor": tensor_pair}


@dataclass
class Config:
    buckets: int = 3600


def run(cfg: Config):
    for name, make in ACTIONS.items():
        t = time.perf_counter()
        sw = angle_sweep(common_eigenstructure(make()), cfg.buckets)
        el = time.perf_counter() - t
        counts = ", ".join(f"{k} {v}" for k, v in sw.counts().items())
        print(f"{name:7s} [{el:.2f}s] {counts}")
        for line in sw.lines:
            print(f"        singular line at {math.degrees(line.angle):.9f} deg ({line.tag.value})")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--buckets", type=int, default=Config.buckets)
    run(Config(ap.parse_args().buckets))
