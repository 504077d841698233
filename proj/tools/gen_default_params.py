#!/usr/bin/env python3
"""Regenerate data/params/lco_graphite.json.

The OCV tables are sampled from the widely used LCO (Doyle) and MCMB graphite
(Ramadass) closed-form fits. Kinetic, transport, and thermal values are
substitute values for an LCO/graphite cell of about 2.3 Ah; they are not a
fit to any particular measured cell.
"""

import json
import math
import re
import pathlib

FARADAY = 96487.0


def u_pos(theta):
    t2 = theta * theta
    num = (-4.656 + 88.669 * t2 - 401.119 * t2**2 + 342.909 * t2**3
           - 462.471 * t2**4 + 433.434 * t2**5)
    den = (-1.0 + 18.933 * t2 - 79.532 * t2**2 + 37.311 * t2**3
           - 73.083 * t2**4 + 95.96 * t2**5)
    return num / den


def u_neg(theta):
    return (0.7222 + 0.1387 * theta + 0.029 * math.sqrt(theta) - 0.0172 / theta
            + 0.0019 / theta**1.5 + 0.2808 * math.exp(0.9 - 15.0 * theta)
            - 0.7984 * math.exp(0.4465 * theta - 0.4108))


def table(fn, lo, hi, step):
    n = int(round((hi - lo) / step))
    return [[round(lo + i * step, 6), round(fn(lo + i * step), 6)] for i in range(n + 1)]


def main():
    neg_eps, pos_eps = 0.58, 0.5
    r_s = 2.0e-6
    neg = {
        "D_s_ref": 3.9e-14,
        "k_ref": FARADAY * 5.031e-11,
        "R_s": r_s,
        "a_s": 3.0 * neg_eps / r_s,
        "L": 88.0e-6,
        "c_s_max": 30555.0,
        "R_f": 0.002 * (3.0 * neg_eps / r_s) * 88.0e-6,
        "E_D": 35000.0,
        "E_k": 20000.0,
        "theta_0": 0.03,
        "theta_100": 0.78,
        "ocv": table(u_neg, 0.01, 1.0, 0.005),
        "entropy": [[0.0, 3.0e-4], [0.1, 1.0e-4], [0.2, 0.0], [0.3, -0.5e-4],
                    [0.5, -0.9e-4], [0.7, -1.0e-4], [0.9, -1.1e-4], [1.0, -1.2e-4]],
    }
    pos = {
        "D_s_ref": 1.0e-14,
        "k_ref": FARADAY * 2.334e-11,
        "R_s": r_s,
        "a_s": 3.0 * pos_eps / r_s,
        "L": 100.0e-6,
        "c_s_max": 51555.0,
        "R_f": 0.002 * (3.0 * pos_eps / r_s) * 100.0e-6,
        "E_D": 29000.0,
        "E_k": 58000.0,
        "theta_100": 0.51,
        "ocv": table(u_pos, 0.48, 1.0, 0.005),
        "entropy": [[0.48, -1.0e-4], [0.5, -0.6e-4], [0.6, -0.2e-4], [0.7, 0.1e-4],
                    [0.8, 0.2e-4], [0.9, 0.1e-4], [1.0, -0.5e-4]],
    }
    # Balance the positive window against the negative one so both electrodes
    # exchange the same amount of lithium between 0 % and 100 % SoC.
    neg_store = neg_eps * neg["L"] * neg["c_s_max"]
    pos_store = pos_eps * pos["L"] * pos["c_s_max"]
    pos["theta_0"] = round(pos["theta_100"]
                           + (neg["theta_100"] - neg["theta_0"]) * neg_store / pos_store, 6)
    capacity_ah = 2.3
    area = capacity_ah * 3600.0 / (FARADAY * neg_store * (neg["theta_100"] - neg["theta_0"]))

    doc = {
        "description": "LCO/graphite substitute parameter set. OCV tables sampled from "
                       "published closed-form fits; kinetic, transport and thermal values "
                       "are representative substitutes, not a fit to a measured cell.",
        "conventions": {
            "current": "discharge positive",
            "k_ref": "A/m^2 per (mol/m^3)^1.5, so i0 = k * ce^aa * css^ac * (cmax - css)^aa",
            "R_f": "area-lumped: R_f / (a_s * L) is the film resistance in ohm",
            "rho_avg": "lumped cell mass in kg: rho_avg * c_p is the cell heat capacity in J/K",
            "h_cell": "lumped whole-cell convective conductance in W/K",
        },
        "constants": {"F": FARADAY, "R_gas": 8.314},
        "cell": {
            "A": round(area, 8),
            "c_e0": 1000.0,
            "alpha_a": 0.5,
            "alpha_c": 0.5,
            "rho_avg": 0.07,
            "c_p": 1100.0,
            "h_cell": 0.05,
            "T_ref": 298.15,
            "V_min": 3.1,
            "V_max": 4.1,
        },
        "positive": pos,
        "negative": neg,
        "solver": {"N_r": 20, "dt": 1.0, "max_dT_per_step": 0.5},
    }
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "params" / "lco_graphite.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(doc, indent=2)
    text = re.sub(r"\[\s+([-0-9.e]+),\s+([-0-9.e]+)\s+\]", r"[\1, \2]", text)
    out.write_text(text + "\n")
    print(out)


if __name__ == "__main__":
    main()
