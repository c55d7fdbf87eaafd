"""Shift-space shadowing on {0,1}^(Z^2) at several defect sizes.

A pseudo-orbit whose windows agree on radius r(delta) is shadowed by the
configuration read off the origin cells; the printed distances are compared
with the tail bound for that radius.  Flips are placed just outside r(delta).
"""
import argparse
import math
from dataclasses import dataclass

from subdyn import shiftspace as sh


@dataclass
class Config:
    orbits: int = 20
    W: int = 18
    R: int = 24
    inner: int = 6


def run(cfg: Config):
    print(f"{'delta':>8s} {'r(delta)':>8s} {'defect':>9s} {'worst d':>9s} {'epsilon':>9s} passed")
    for j in (5, 6, 7, 8):
        delta = 2.0 ** -j
        r = sh.agreement_radius(delta)
        worst, defect, ok = 0.0, 0.0, True
        for seed in range(cfg.orbits):
            orb = sh.random_pseudo_orbit(2, cfg.R, cfg.W, 2, flips=2, min_norm=math.ceil(r) + 4, seed=seed)
            c = sh.check_shadow(orb, sh.shadow_shift(orb), cfg.inner, delta)
            worst, defect, ok = max(worst, c.worst), max(defect, c.delta_bound), ok and c.passed
        print(f"{delta:8.5f} {r:8.2f} {defect:9.2e} {worst:9.2e} {sh.epsilon_for(delta, 2):9.3f} {ok}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--orbits", type=int, default=Config.orbits)
    run(Config(orbits=ap.parse_args().orbits))
