#!/usr/bin/env python3
"""Regenerates the bundled synthetic fixtures under data/."""
import json
import os

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data")
GRID = os.path.join(ROOT, "grid10")
N = 10
LEN_M = 250.0
LANES = 2
FFS = 13.89  # m/s (~50 km/h)


def node_id(r, c):
    return r * N + c


def write_grid():
    os.makedirs(GRID, exist_ok=True)
    with open(os.path.join(GRID, "nodes.csv"), "w") as f:
        f.write("id,kind\n")
        for r in range(N):
            for c in range(N):
                f.write(f"{node_id(r, c)},intelligent-intersection\n")
    links = []
    for r in range(N):
        for c in range(N):
            if c + 1 < N:
                links.append((node_id(r, c), node_id(r, c + 1)))
                links.append((node_id(r, c + 1), node_id(r, c)))
            if r + 1 < N:
                links.append((node_id(r, c), node_id(r + 1, c)))
                links.append((node_id(r + 1, c), node_id(r, c)))
    with open(os.path.join(GRID, "links.csv"), "w") as f:
        f.write("id,from,to,length_m,lanes,ffs_mps\n")
        for i, (a, b) in enumerate(links):
            f.write(f"{i},{a},{b},{LEN_M},{LANES},{FFS}\n")
    assert len(links) == 2 * 2 * N * (N - 1)


def write_od():
    # Concentrated crossing corridors: recurrent congestion with plenty of
    # alternate routes for the rerouting strategies to exploit.
    pairs = [
        (40, 49, 6.0),   # west -> east, row 4 (overloaded corridor)
        (4, 94, 6.0),    # north -> south, col 4 (overloaded corridor)
        (0, 99, 2.0),    # diagonal corners
        (90, 9, 2.0),
        (45, 54, 0.5),   # short central hops add background traffic
        (54, 45, 0.5),
    ]
    with open(os.path.join(ROOT, "od.csv"), "w") as f:
        f.write("origin,destination,rate\n")
        for o, d, rate in pairs:
            f.write(f"{o},{d},{rate}\n")


def opmode_bins():
    bins = []
    # idle / near-stop catch-all
    bins.append({"id": 0, "v_lo": 0.0, "v_hi": 1.0})
    cuts_a = [0.0, 3.0, 6.0, 9.0, 12.0, 18.0]        # 7 bins incl. open ends
    cuts_b = [0.0, 3.0, 6.0, 9.0, 12.0, 18.0, 24.0]  # 8 bins
    cuts_c = [0.0, 6.0, 12.0, 18.0, 24.0, 30.0]      # 7 bins
    classes = [
        (1.0, 11.176, cuts_a),
        (11.176, 22.352, cuts_b),
        (22.352, None, cuts_c),
    ]
    next_id = 1
    for v_lo, v_hi, cuts in classes:
        edges = [None] + cuts + [None]  # None = open end
        for i in range(len(edges) - 1):
            b = {"id": next_id, "v_lo": v_lo}
            if v_hi is not None:
                b["v_hi"] = v_hi
            if edges[i] is not None:
                b["vsp_lo"] = edges[i]
            if edges[i + 1] is not None:
                b["vsp_hi"] = edges[i + 1]
            bins.append(b)
            next_id += 1
    assert next_id == 23
    return bins


def rate_tables(bins):
    # Synthetic but strictly ordered: ICEV > EFUEL > HEV > BEV = 0 for GHG.
    # ICEV GHG g/s grows with the VSP bin within each speed class.
    icev_ghg = {0: 0.30}
    ladders = {
        (1, 7): [0.35, 0.90, 1.30, 1.80, 2.40, 8.00, 11.00],
        (8, 15): [0.45, 0.90, 1.90, 2.60, 3.40, 7.50, 10.00, 13.00],
        (16, 22): [0.60, 1.50, 2.60, 3.80, 5.20, 8.50, 12.00],
    }
    for (lo, hi), vals in ladders.items():
        for i, v in enumerate(vals):
            icev_ghg[lo + i] = v

    fuels = {}
    # energy_scale is relative to ICEV fuel burn: e-fuel runs the same engine
    # on the same energy content, a hybrid burns less fuel outright.
    for name, ghg_scale, nox_scale, energy_scale in [
        ("ICEV", 1.00, 0.0020, 1.00),
        ("EFUEL", 0.58, 0.0016, 1.00),
        ("HEV", 0.42, 0.0010, 0.42),
    ]:
        table = {}
        for b in bins:
            base = icev_ghg[b["id"]]
            table[str(b["id"])] = {
                "ghg": round(base * ghg_scale, 6),
                "nox": round(base * nox_scale, 6),
                "energy": round(base * energy_scale / 270.0, 8),
            }
        fuels[name] = table
    # BEV: zero pollutants, ~3x the drivetrain efficiency of ICEV
    bev = {}
    for b in bins:
        e = icev_ghg[b["id"]] / 270.0 * 0.30
        bev[str(b["id"])] = {"ghg": 0.0, "nox": 0.0, "energy": round(e, 8)}
    fuels["BEV"] = bev
    return fuels


def write_emissions():
    bins = opmode_bins()
    cfg = {
        "schema_version": 1,
        "v_eps": 0.1,
        "vsp": {
            "light": {
                "fossil": {"a": 0.15, "b": 0.002, "c": 0.0005, "mass_t": 1.5},
                "electric": {"a": 0.18, "b": 0.05, "c": 0.0005, "mass_t": 1.5},
            },
            "heavy": {
                "fossil": {"a": 0.28, "b": 0.004, "c": 0.0008, "mass_t": 8.0},
                "electric": {"a": 0.32, "b": 0.09, "c": 0.0008, "mass_t": 8.0},
            },
        },
        "opmode_bins": bins,
        "rates": rate_tables(bins),
        "upstream": {
            "BEV": {"basis": "per_kwh", "ghg_per_unit": 150.0, "nox_per_unit": 0.10},
            "ICEV": {"basis": "per_liter", "ghg_per_unit": 600.0,
                     "nox_per_unit": 1.00, "units_per_kwh": 0.112},
            "HEV": {"basis": "per_liter", "ghg_per_unit": 600.0,
                    "nox_per_unit": 1.00, "units_per_kwh": 0.112},
            "EFUEL": {"basis": "per_liter", "ghg_per_unit": 320.0,
                      "nox_per_unit": 0.60, "units_per_kwh": 0.112},
        },
    }
    with open(os.path.join(ROOT, "emissions.json"), "w") as f:
        json.dump(cfg, f, indent=2)
        f.write("\n")


def write_configs():
    base = {
        "nodes": "grid10/nodes.csv",
        "links": "grid10/links.csv",
        "od": "od.csv",
        "emissions": "emissions.json",
        "replications": 5,
        "base_seed": 42,
        "demand": {"total": 2500, "window_s": 900.0, "heavy_share": 0.05},
        "sim": {"max_t": 7200.0},
        "output_dir": "../out",
    }
    with open(os.path.join(ROOT, "config.json"), "w") as f:
        json.dump(base, f, indent=2)
        f.write("\n")
    small = dict(base)
    small["demand"] = {"total": 160, "window_s": 300.0, "heavy_share": 0.05}
    small["sim"] = {"max_t": 3600.0}
    with open(os.path.join(ROOT, "config_small.json"), "w") as f:
        json.dump(small, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    write_grid()
    write_od()
    write_emissions()
    write_configs()
    print("fixtures written under", os.path.abspath(ROOT))
