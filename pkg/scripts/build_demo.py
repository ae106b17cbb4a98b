"""Build the bundled demonstration site into a fresh data directory.

Equivalent to ``sia demo --data DIR`` but usable without installing the
console script.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from sia.fixture import DEMO_EXPERT, DEMO_VISITOR, build_demo_store


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data", default="demo-data", help="target directory (must not exist)")
    args = parser.parse_args()

    store = build_demo_store(args.data)
    try:
        print(f"store: {store.layout.data_dir}")
        print(f"records: {len(store.record_ids())}")
        print(f"periods: {', '.join(p.id for p in store.periods())}")
        print(f"places: {', '.join(p.id for p in store.places())}")
        print(f"expert account: {DEMO_EXPERT[0]} / {DEMO_EXPERT[1]}")
        print(f"visitor account: {DEMO_VISITOR[0]} / {DEMO_VISITOR[1]}")
    finally:
        store.close()
    print()
    print(f"serve it with: sia serve --data {args.data}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
