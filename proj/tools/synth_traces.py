#!/usr/bin/env python3
"""Generate deterministic synthetic VBR video traces in the canonical CSV form.

The shipped traces under data/traces/ were produced with the defaults:

    python3 tools/synth_traces.py --out data/traces

Each codec gets a GOP-structured size sequence (I, P and B frames) whose mean
bitrate matches the target below, with lognormal per-frame noise. The numbers
are stand-ins; real per-frame traces can replace the files as long as they
keep the header `index,t_ms,size_bytes,kind`.

Converting an upstream "verbose" frame trace: keep the frame number, the
display time in ms (or leave it empty to derive it from the frame rate) and
the frame size in bytes, write kind=video, and renumber frames from 0 in
display order.
"""

import argparse
import math
import pathlib
import random

# label -> (file stem, mean bitrate in bit/s, lognormal sigma)
CODECS = {
    "SVC": ("svc", 3.9e6, 0.20),
    "MPEG-4": ("mpeg4", 4.3e6, 0.30),
    "AVC": ("avc", 4.6e6, 0.35),
}

GOP = "IBBPBBPBBPBBPBBP"  # 16 frames
WEIGHT = {"I": 4.0, "P": 1.6, "B": 0.7}


def shortest(x):
    # Matches the shortest round-trip form the simulator writes back.
    text = repr(x)
    return text[:-2] if text.endswith(".0") else text


def synthesize(label, rate_bps, sigma, fps, seconds, seed):
    rng = random.Random(f"{seed}:{label}")
    count = int(round(fps * seconds))
    mean_weight = sum(WEIGHT[c] for c in GOP) / len(GOP)
    mean_frame = rate_bps / fps / 8.0
    # E[lognormal(mu, sigma)] = 1 when mu = -sigma^2 / 2
    mu = -sigma * sigma / 2.0
    for k in range(count):
        base = mean_frame * WEIGHT[GOP[k % len(GOP)]] / mean_weight
        size = max(64, int(round(base * math.exp(rng.gauss(mu, sigma)))))
        yield k, k * 1000.0 / fps, size


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="data/traces")
    ap.add_argument("--fps", type=float, default=30.0)
    ap.add_argument("--seconds", type=float, default=120.0)
    ap.add_argument("--seed", type=int, default=2013)
    args = ap.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for label, (stem, rate, sigma) in CODECS.items():
        path = out / f"{stem}.csv"
        with path.open("w", newline="\n") as f:
            f.write(f"# label: {label}\n")
            f.write("index,t_ms,size_bytes,kind\n")
            for k, t, size in synthesize(label, rate, sigma, args.fps, args.seconds, args.seed):
                f.write(f"{k},{shortest(round(t, 3))},{size},video\n")
        print(path)


if __name__ == "__main__":
    main()
