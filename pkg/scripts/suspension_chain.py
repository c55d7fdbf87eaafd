"""Chains of the suspension flow shadowed along the first axis of the cat pair."""
import argparse
from dataclasses import dataclass

from subdyn.geometry import Direction
from subdyn.spectrum import cat_pair, common_eigenstructure
from subdyn.suspension import perturbed_chain, shadow_chain


@dataclass
class Config:
    jumps: int = 500
    a: float = 1.0
    seeds: int = 5


def run(cfg: Config):
    spec = cat_pair()
    sp = common_eigenstructure(spec)
    d = Direction.from_integers((1, 0))
    print(f"{'delta':>8s} {'chain defect':>12s} {'error':>10s} {'L*delta*C':>10s}")
    for delta in (1e-4, 1e-6, 1e-8):
        for seed in range(cfg.seeds):
            ch = perturbed_chain(spec, d, [0.3, 0.7], cfg.jumps, delta, cfg.a, seed=seed)
            r = shadow_chain(spec, sp, ch, d)
            print(f"{delta:8.0e} {r.chain_defect:12.3e} {r.sup_error:10.3e} {r.bound:10.3e}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--jumps", type=int, default=Config.jumps)
    ap.add_argument("--seeds", type=int, default=Config.seeds)
    a = ap.parse_args()
    run(Config(jumps=a.jumps, seeds=a.seeds))
