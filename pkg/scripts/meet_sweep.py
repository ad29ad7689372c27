"""Check meet against the denotation oracle over every ordered pair of
ground types in a finite universe."""
import argparse
import time

from qtype import oracle
from qtype import typelang as tl


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--atoms", default="int,float,symbol")
    ap.add_argument("--depth", type=int, default=2)
    ap.add_argument("--width", type=int, default=2)
    args = ap.parse_args()
    atoms = tuple(args.atoms.split(","))
    t0 = time.perf_counter()
    types = tl.enumerate_ground(tl.GroundUniverse(atoms, depth=args.depth, width=args.width))
    universe = oracle.Universe(atoms, ("a", "b"), depth=args.depth, width=args.width)
    pairs, count, bad = oracle.meet_mismatches(types, universe)
    print(f"{len(types)} types, {pairs} pairs, {count} mismatches, "
          f"{time.perf_counter() - t0:.1f} s")
    for a, b, r in bad:
        print(f"  {tl.show(a)} meet {tl.show(b)} = {'none' if r is None else tl.show(r)}")
    return 1 if count else 0


if __name__ == "__main__":
    raise SystemExit(main())
