"""Interface slip under a shear flow: new conditions versus Beavers-Joseph.

For the classical condition the slip coefficient is swept; the value
alpha = sqrt(k11) / (-N1_bl) reproduces the new conditions in parallel flow.

    python3 demos/interface_slip.py
"""

import math

from porecouple.cases import RunConfig
from porecouple.macro import Classical, MacroBC, New, build_macro_grids, solve_coupled
from porecouple.pipeline import effective_parameters
from porecouple.stokes import Dirichlet


def main():
    P = effective_parameters(RunConfig.for_preset("case1"))
    K, C = P.K, P.constants
    ff, pm = build_macro_grids(0.5, -0.5, 1.0, 80, 0.0, True)
    bc = MacroBC(ff_top=Dirichlet((1.0, 0.0)))
    u_new = solve_coupled(ff, pm, New(C), bc, K).u_sigma.mean()
    print(f"new conditions: mean slip {u_new:.6f}")
    fit = math.sqrt(K.k11) / (-C.N1_bl)
    for alpha in (0.1, 0.5, 1.0, fit, 2.0):
        u = solve_coupled(ff, pm, Classical(alpha), bc, K).u_sigma.mean()
        tag = "  (fitted)" if alpha == fit else ""
        print(f"alpha = {alpha:6.3f}: mean slip {u:.6f}{tag}")


if __name__ == "__main__":
    main()
