#!/usr/bin/env python3
"""Regenerates the synthetic pedestrian fixtures under data/fixtures.

sparse.tsv: walkers in a top and a bottom band, leaving the middle corridor
(where the benchmark start and goal sit) wide open.
dense.tsv: the same bands plus a vertical stream crossing the corridor with
1.0 m spacing, too tight to slip through at a 0.4 m safe distance.
"""

import argparse
import pathlib

FPS = 2.5
SPAN = 60.0          # seconds of recording
WIDTH = 12.0         # band walkers go from x = 0 to x = WIDTH
BAND_Y = (1.0, 9.0)
BAND_SPEED = 1.2
BAND_PERIOD = 2.0
STREAM_X = 6.0
STREAM_SPEED = 1.0
STREAM_SPACING = 1.0
HEIGHT = 10.0


def frames():
    n = int(round(SPAN * FPS))
    return range(n + 1)


def band_rows(first_id):
    rows = []
    agent = first_id
    for lane, y in enumerate(BAND_Y):
        direction = 1 if lane == 0 else -1
        spawn = 0.0
        while spawn < SPAN:
            for f in frames():
                t = f / FPS
                s = (t - spawn) * BAND_SPEED
                if 0.0 <= s <= WIDTH:
                    x = s if direction > 0 else WIDTH - s
                    rows.append((f, agent, x, y))
            agent += 1
            spawn += BAND_PERIOD
    return rows, agent


def stream_rows(first_id):
    rows = []
    agent = first_id
    spawn = -HEIGHT / STREAM_SPEED
    while spawn < SPAN:
        for f in frames():
            t = f / FPS
            y = (t - spawn) * STREAM_SPEED
            if 0.0 <= y <= HEIGHT:
                rows.append((f, agent, STREAM_X, y))
        agent += 1
        spawn += STREAM_SPACING / STREAM_SPEED
    return rows, agent


def write(path, rows, note):
    rows.sort()
    with open(path, "w") as out:
        out.write(f"# {note}\n")
        out.write(f"# source_fps: {FPS}\n")
        for f, a, x, y in rows:
            out.write(f"{f}\t{a}\t{x:.4f}\t{y:.4f}\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "fixtures"))
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bands, next_id = band_rows(0)
    write(out / "sparse.tsv", list(bands), "synthetic: two walker bands, open middle corridor")
    stream, _ = stream_rows(next_id)
    write(out / "dense.tsv", list(bands) + stream, "synthetic: walker bands plus a 1.0 m crossing stream")


if __name__ == "__main__":
    main()
