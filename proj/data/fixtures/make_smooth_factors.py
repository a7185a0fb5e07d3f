"""Writes smooth_factors.csv: noiseless factors from a smooth, non-polynomial
ground truth at every valid cell of the standard grid."""
import math
import pathlib

THETA_DEG = [10, 30, 50, 70, 90, 110, 130, 150]
LEGS = range(2, 13)
DISTS = range(1, 12)


def truth(t, l, d):
    b = 0.3 - 0.15 * d + 0.25 * math.sin(1.5 * t) * math.exp(-l / 5.0)
    sx = 0.2 + 0.15 * (1 - t / math.pi) * d + 0.1 * math.tanh(l - d)
    sy = 0.1 + 0.12 * (t / math.pi) * l + 0.05 * math.cos(t * l / 4)
    return b, sx, sy


rows = ["theta_rad,leg_m,dist_m,b_m,sigma_x_m,sigma_y_m,n_used,n_removed"]
for deg in THETA_DEG:
    t = deg * math.pi / 180.0
    for l in LEGS:
        for d in DISTS:
            if not (0 < d < l * math.cos(t / 2)):
                continue
            b, sx, sy = truth(t, l, d)
            rows.append(f"{t!r},{l},{d},{b!r},{sx!r},{sy!r},20,0")

out = pathlib.Path(__file__).with_name("smooth_factors.csv")
out.write_text("\n".join(rows) + "\n")
print(f"{len(rows) - 1} rows -> {out}")
