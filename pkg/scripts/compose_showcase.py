"""Produce one of each composition from a demo store: the three-place
two-period X3D scene, the matching layered SVG plan, and a photomontage.

Writes scene.x3d, plan.svg and montage.svg into --out, building a
throwaway demo store if --data is not given.
"""

import argparse
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from sia.fixture import build_demo_store
from sia.plans import MontageEntry, MontageRequest, compose_photomontage, compose_plan, serialize_plan
from sia.scene import CompositionRequest, compose_model, format_color, serialize_x3d
from sia.store import Store


def showcase(store: Store, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    request = CompositionRequest(
        places=("yard", "chapel", "great-hall"), periods=("p1100", "p1150")
    )

    scene = compose_model(store, request)
    (out_dir / "scene.x3d").write_bytes(serialize_x3d(scene))
    print(f"scene.x3d: {len(scene.groups)} groups")
    for period_id, color in scene.legend:
        print(f"  {period_id} -> {format_color(color)}")

    doc = compose_plan(store, request)
    (out_dir / "plan.svg").write_bytes(serialize_plan(doc))
    print(f"plan.svg: {len(doc.layers)} layers, viewBox {doc.view_box}")

    montage = MontageRequest(
        entries=(
            MontageEntry("yard-north-wall-photo", 1.0),
            MontageEntry("yard-from-the-keep", 0.45),
        )
    )
    (out_dir / "montage.svg").write_bytes(compose_photomontage(store, montage))
    print("montage.svg: 2 superimposed photographs")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data", help="existing demo store (default: build a temporary one)")
    parser.add_argument("--out", default="showcase", help="output directory")
    args = parser.parse_args()

    if args.data:
        with Store.open(args.data, writer=False) as store:
            showcase(store, Path(args.out))
    else:
        with tempfile.TemporaryDirectory() as tmp:
            store = build_demo_store(Path(tmp) / "demo")
            try:
                showcase(store, Path(args.out))
            finally:
                store.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
