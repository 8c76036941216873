#!/usr/bin/env python3
"""Plot a CSV produced by the phidro CLI.

Usage: plot_csv.py input.csv output.(png|svg) [x_column [y_column ...]]

Lines starting with '#' carry the run configuration and are skipped. With
matplotlib installed a PNG/SVG is rendered through it; otherwise a plain
SVG polyline chart is written so the script works with a bare python3.
"""

import sys


def read_csv(path):
    header, rows = None, []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cells = line.split(",")
            if header is None:
                header = cells
                continue
            rows.append([float(c) for c in cells])
    if header is None:
        raise SystemExit(f"{path}: no header row")
    return header, rows


def pick_columns(header, args):
    if args:
        idx = [header.index(a) for a in args]
        return idx[0], idx[1:] or [i for i in range(len(header)) if i != idx[0]]
    return 0, list(range(1, len(header)))


def svg_fallback(path, header, rows, xi, yis):
    w, h, pad = 960, 600, 60
    xs = [r[xi] for r in rows]
    ys = [r[y] for y in yis for r in rows]
    x0, x1 = min(xs), max(xs) or 1.0
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    sx = lambda v: pad + (v - x0) / (x1 - x0) * (w - 2 * pad)
    sy = lambda v: h - pad - (v - y0) / (y1 - y0) * (h - 2 * pad)
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<line x1="{pad}" y1="{h-pad}" x2="{w-pad}" y2="{h-pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{h-pad}" stroke="black"/>',
        f'<text x="{w//2}" y="{h-16}" text-anchor="middle">{header[xi]}</text>',
    ]
    for k, yi in enumerate(yis):
        pts = " ".join(f"{sx(r[xi]):.2f},{sy(r[yi]):.2f}" for r in rows)
        color = colors[k % len(colors)]
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{w-pad}" y="{pad + 18 * k}" text-anchor="end" fill="{color}">{header[yi]}</text>'
        )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))


def main():
    if len(sys.argv) < 3:
        raise SystemExit(__doc__)
    in_path, out_path = sys.argv[1], sys.argv[2]
    header, rows = read_csv(in_path)
    if not rows:
        raise SystemExit(f"{in_path}: no data rows")
    xi, yis = pick_columns(header, sys.argv[3:])
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(9, 6))
        for yi in yis:
            ax.plot([r[xi] for r in rows], [r[yi] for r in rows], label=header[yi])
        ax.set_xlabel(header[xi])
        ax.legend()
        fig.savefig(out_path, dpi=130)
    except ImportError:
        svg_fallback(out_path, header, rows, xi, yis)


if __name__ == "__main__":
    main()
