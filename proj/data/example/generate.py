"""Writes the synthetic example inputs next to this script.

A 6 km x 5 km town on a planar grid: denser core, rural fringe, three operators
with tri-sector sites. Deterministic (fixed seed).
"""
import csv
import math
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent
rng = random.Random(20240501)

REGION = [(0, 0), (6000, 0), (6000, 5000), (3500, 5500), (0, 5000)]
CORE = (3000.0, 2600.0)

# population grid: 500 m cells covering the region plus a 2 km border
with open(HERE / "population.csv", "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["cell_x_m", "cell_y_m", "population", "urbanity"])
    for ix in range(-4, 16):
        for iy in range(-4, 15):
            x, y = ix * 500, iy * 500
            d = math.hypot(x + 250 - CORE[0], y + 250 - CORE[1])
            urbanity = 1 if d < 900 else 2 if d < 1600 else 3 if d < 2400 else 4 if d < 3500 else 5
            base = {1: 2200, 2: 1400, 3: 700, 4: 180, 5: 40}[urbanity]
            w.writerow([x, y, int(base * rng.uniform(0.7, 1.3)), urbanity])

with open(HERE / "region.csv", "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["x_m", "y_m"])
    w.writerows(REGION)

CARRIERS = {
    "MNO1": [(816, 10, "4G"), (1815, 20, "4G"), (2605, 30, "4G"), (773, 10, "5G")],
    "MNO2": [(796, 10, "4G"), (1860, 30, "4G"), (2580, 20, "4G"), (783, 10, "5G")],
    "MNO3": [(806, 10, "4G"), (1835, 20, "4G"), (2630, 20, "4G")],
}
SITES = {"MNO1": 14, "MNO2": 13, "MNO3": 8}

rows = []
for op, n_sites in SITES.items():
    for s in range(n_sites):
        r = 3800 * math.sqrt(rng.random())
        a = rng.uniform(0, 2 * math.pi)
        x = round(CORE[0] + r * math.cos(a), 1)
        y = round(CORE[1] + r * math.sin(a), 1)
        height = round(rng.uniform(20, 45), 1)
        rot = rng.uniform(0, 120)
        for sector in range(3):
            az = round((rot + 120 * sector) % 360, 1)
            for freq, bw, tech in CARRIERS[op]:
                if rng.random() < 0.15:
                    continue
                eirp = round(rng.uniform(27, 33), 1)
                rows.append([f"{op}-{s:02d}", op, x, y, height, az, freq, bw, eirp, tech])
    # indoor omni and a legacy 2G carrier per operator, removed at ingestion
    rows.append([f"{op}-indoor", op, CORE[0], CORE[1], 8, "OMNI", CARRIERS[op][0][0], 5, 10, "4G"])
    rows.append([f"{op}-legacy", op, CORE[0] + 100, CORE[1], 30, 90, 935 if op == "MNO1" else 925, 5, 28, "2G"])

with open(HERE / "antennas.csv", "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["site_id", "operator", "x_m", "y_m", "height_m", "azimuth_deg",
                "frequency_mhz", "bandwidth_mhz", "eirp_dbw", "technology"])
    w.writerows(rows)
