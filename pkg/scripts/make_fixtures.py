#!/usr/bin/env python3
"""Write a deterministic fixture corpus of ESTree .json ASTs.

The corpus doubles as training data and seed pool: runnable programs in the
supported subset, one JSON AST per file, plus a few handwritten programs
covering the rarer node kinds.

Usage: python scripts/make_fixtures.py --out fixtures --count 1000 --seed 0
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from fraggen import corpus  # noqa: E402


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="fixtures")
    ap.add_argument("--count", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--toy", action="store_true",
                    help="also write the 20-file overfit toy corpus to <out>/toy")
    args = ap.parse_args()

    programs = corpus.fixture_corpus(args.count, seed=args.seed)
    programs += corpus.kitchen_sink_programs()
    n = corpus.write_fixtures(args.out, programs)
    print(f"wrote {n} fixtures to {args.out}")
    if args.toy:
        t = corpus.write_fixtures(Path(args.out) / "toy", corpus.toy_corpus())
        print(f"wrote {t} toy files to {args.out}/toy")
    return 0


if __name__ == "__main__":
    sys.exit(main())
