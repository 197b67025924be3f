"""Write an SVG plan for each layout variant and print its slot and area figures.

    python demos/draw_layouts.py [OUT_DIR]
"""

import sys
from pathlib import Path

from palletsim.config import DEFAULT_SPEC
from palletsim.layout import build_layout, compute_area
from palletsim.render import render_layout


def main(out_dir="layouts"):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for variant, spec in DEFAULT_SPEC.items():
        layout = build_layout(variant, spec, name=variant)
        path = render_layout(layout, out / f"{variant}.svg")
        zones = {z.value: n for z, n in layout.zone_counts().items() if n}
        print(f"{variant:13s} {layout.n_slots:5d} slots  {compute_area(layout):7.1f} m2  "
              f"{zones}  -> {path}")


if __name__ == "__main__":
    main(*sys.argv[1:])
