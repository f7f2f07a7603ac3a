#!/usr/bin/env python3
"""Render log-log sweep figures from the experiment runner's CSV output.

Reads the fixed CSV schema (inequality_id,n,R,lhs,rhs,ratio) plus the JSON
sidecar carrying the fitted slope and optional reference exponent, and
writes one PNG per inequality id: scatter of log2(R) against log2(ratio),
the OLS fit line, and a dashed reference-exponent line.  The annotated slope
is the sidecar's value verbatim (no re-fitting drift).

Usage: plots/render.py --csv sweep.csv --sidecar sweep.json --out figures/
Exits 2 on schema problems (missing columns, fewer than 3 rows for an id).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

REQUIRED_COLUMNS = {"inequality_id", "n", "R", "lhs", "rhs", "ratio"}
EXIT_SCHEMA = 2


class SchemaError(Exception):
    pass


def load_rows(csv_paths: list[str]) -> dict[str, list[dict]]:
    """Rows grouped by inequality id; validates the header of every file."""
    groups: dict[str, list[dict]] = {}
    for path in csv_paths:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = REQUIRED_COLUMNS - set(reader.fieldnames or [])
            if missing:
                raise SchemaError(f"{path}: missing columns {sorted(missing)}")
            for row in reader:
                groups.setdefault(row["inequality_id"], []).append(
                    {
                        "n": int(row["n"]),
                        "R": float(row["R"]),
                        "ratio": float(row["ratio"]),
                    }
                )
    return groups


def load_sidecars(paths: list[str]) -> dict[str, dict]:
    """Sidecars keyed by inequality id (later files win on collisions)."""
    out: dict[str, dict] = {}
    for path in paths:
        data = json.loads(Path(path).read_text())
        key = data.get("inequality_id")
        if key is None:
            raise SchemaError(f"{path}: sidecar lacks inequality_id")
        out[key] = data
    return out


def ols(xs: list[float], ys: list[float]) -> tuple[float, float]:
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    return slope, my - slope * mx


def render_group(ineq_id: str, rows: list[dict], sidecar: dict, out_dir: Path) -> Path:
    if len(rows) < 3:
        raise SchemaError(f"{ineq_id}: need at least 3 rows, got {len(rows)}")
    if any(r["ratio"] <= 0 for r in rows):
        raise SchemaError(f"{ineq_id}: non-positive ratios cannot be drawn on a log plot")
    xs = [math.log2(r["R"]) for r in rows]
    ys = [math.log2(r["ratio"]) for r in rows]
    slope_fit, intercept = ols(xs, ys)
    slope_annot = sidecar.get("slope", slope_fit)
    ref = sidecar.get("reference_exponent")

    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.scatter(xs, ys, color="tab:blue", zorder=3, label="sweep")
    xline = [min(xs), max(xs)]
    ax.plot(xline, [slope_fit * x + intercept for x in xline], color="tab:blue",
            lw=1.2, label=f"OLS fit ({slope_fit:.3f})")
    if ref is not None:
        y0 = ys[0] - ref * xs[0]
        ax.plot(xline, [ref * x + y0 for x in xline], "--", color="tab:red",
                lw=1.2, label=f"reference {float(ref):.3g}")
    ax.annotate(f"slope = {slope_annot:.3f}", xy=(0.04, 0.92), xycoords="axes fraction",
                fontsize=10, fontweight="bold")
    ax.set_xlabel("log2 R")
    ax.set_ylabel("log2 ratio")
    n = rows[0]["n"]
    ax.set_title(f"{ineq_id} (n={n})")
    ax.legend(fontsize=8, loc="lower left")
    fig.tight_layout()
    out = out_dir / f"{ineq_id}_n{n}.png"
    fig.savefig(out, dpi=130)
    plt.close(fig)
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--csv", nargs="+", required=True, help="sweep CSV file(s)")
    ap.add_argument("--sidecar", nargs="+", required=True, help="JSON sidecar(s)")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--id", default=None, help="only render this inequality id")
    args = ap.parse_args(argv)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        groups = load_rows(args.csv)
        sidecars = load_sidecars(args.sidecar)
        if args.id is not None:
            if args.id not in groups:
                raise SchemaError(f"id {args.id!r} not present in the CSV input")
            groups = {args.id: groups[args.id]}
        if not groups:
            raise SchemaError("no data rows found")
        for ineq_id, rows in sorted(groups.items()):
            out = render_group(ineq_id, rows, sidecars.get(ineq_id, {}), out_dir)
            print(f"wrote {out}")
    except (SchemaError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    return 0


if __name__ == "__main__":
    sys.exit(main())
