"""Register a circle to a rounded square and write the elastic geodesic between them.

    python demos/geodesic.py [out.csv]
"""
import sys

import numpy as np

from pairshape import PlanarCurve, from_srvf, geodesic_path, inner, preprocess, register, to_srvf, write_outlines
from pairshape.synthetic import superellipse

m = 100
circle = to_srvf(preprocess(superellipse(2.0), m))
# a rotated square whose samples start at a different corner
square = to_srvf(preprocess(superellipse(8.0, theta=0.4, start=0.3), m))

al = register(circle, square)
angle = np.degrees(np.arctan2(al.rotation[1, 0], al.rotation[0, 0]))
print(f"shape distance {al.distance:.4f}")
print(f"best start index {al.seed_shift}, rotation {angle:.1f} degrees")
print(f"unaligned distance {np.arccos(np.clip(inner(circle, square), -1, 1)):.4f}")

path = geodesic_path(circle, al.apply(square), steps=8)
curves = [PlanarCurve(from_srvf(q).points, True, None, f"step{k}") for k, q in enumerate(path)]
if len(sys.argv) > 1:
    write_outlines(curves, sys.argv[1])
    print(f"wrote {len(curves)} outlines to {sys.argv[1]}")
