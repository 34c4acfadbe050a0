"""Permeability and interface constants for the circle and the ellipse.

    python3 demos/effective_parameters.py [resolution]
"""

import sys

from porecouple.cases import RunConfig
from porecouple.pipeline import effective_parameters


def main(res=32):
    for case in ("case2", "case3"):
        cfg = RunConfig.for_preset(case, cell_resolution=res, stripe_resolution=res)
        doc = effective_parameters(cfg).document()
        print(f"== {doc['shape']} (resolution {res})")
        for block in ("permeability", "boundary_layer"):
            for k, v in sorted(doc[block].items()):
                if not isinstance(v, float):
                    continue
                flag = doc["flags"].get(k, "")
                print(f"  {k:22s} {v: .6e}  {flag}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 32)
