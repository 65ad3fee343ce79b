"""Plot a bias surface CSV produced by `driftbias surface`.

Development convenience only; the shipped product surface is the CSV.

    python3 -m driftbias surface --mu-min -0.5 --mu-max 0.5 --mu-steps 41 \
        --c-min -0.5 --c-max 0.5 --c-steps 41 --sigma 0.3 --T 1 \
        --direction above --out surface.csv
    python3 scripts/plot_surface.py surface.csv surface.png
"""

import csv
import sys


def main(argv):
    if len(argv) != 2:
        print("usage: plot_surface.py <surface.csv> <out.png>", file=sys.stderr)
        return 2
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib is not installed; pip install matplotlib", file=sys.stderr)
        return 2

    mu, c, expectation = [], [], []
    with open(argv[0], newline="") as handle:
        for row in csv.DictReader(handle):
            if row["flag"] != "ok":
                continue
            mu.append(float(row["mu"]))
            c.append(float(row["C"]))
            expectation.append(float(row["expectation"]))

    figure, axes = plt.subplots(figsize=(7, 5))
    scatter = axes.scatter(mu, c, c=expectation, s=18, cmap="viridis")
    figure.colorbar(scatter, label="conditional expectation")
    axes.set_xlabel("mu")
    axes.set_ylabel("C")
    figure.savefig(argv[1], dpi=150, bbox_inches="tight")
    print(f"wrote {argv[1]}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
