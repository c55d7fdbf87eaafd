"""Step sequences and shadowing along several irrational directions of the cat pair.

Directions near the 45 degree line have small rates, so the search settles
on a larger N or gives up.
"""
import argparse
import math
from dataclasses import dataclass

from subdyn.errors import RatesFailed
from subdyn.geometry import Direction
from subdyn.nonauto import search_N, sequence_pseudo_orbit, shadow_along_sequence
from subdyn.spectrum import cat_pair, common_eigenstructure

DIRECTIONS = {
    "(1, sqrt 2)": (1.0, math.sqrt(2)),
    "(1, golden)": (1.0, (1 + math.sqrt(5)) / 2),
    "(1, pi)": (1.0, math.pi),
    "(1, -e)": (1.0, -math.e),
    "(1, 1 + 1e-3 sqrt 2)": (1.0, 1 + 1e-3 * math.sqrt(2)),
}


@dataclass
class Config:
    P: int = 1000
    t0: float = math.sqrt(2)
    delta: float = 1e-8


def run(cfg: Config):
    spec = cat_pair()
    sp = common_eigenstructure(spec)
    for name, gen in DIRECTIONS.items():
        s = search_N(sp, Direction.irrational(gen), cfg.t0, cfg.P)
        if s.N is None:
            print(f"{name:22s} no N in the search range passes")
            continue
        X = sequence_pseudo_orbit(spec, s.sequence, [0.2, 0.3], cfg.delta)
        try:
            res, rep, L2 = shadow_along_sequence(spec, sp, s.sequence, X)
        except RatesFailed as exc:
            print(f"{name:22s} N = {s.N}: {exc}")
            continue
        print(f"{name:22s} N = {s.N:3d} rate {rep.b:.4f} error {res.sup_error:.2e} "
              f"bound {res.bound * res.defect:.2e} tube factor {L2:.0f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--P", type=int, default=Config.P)
    ap.add_argument("--delta", type=float, default=Config.delta)
    a = ap.parse_args()
    run(Config(P=a.P, delta=a.delta))
