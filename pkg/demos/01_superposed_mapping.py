"""
Superposed constellations and the modular coded-symbol map
===========================================================

Two sources send 4-PAM symbols at the same time; the relay sees their sum.
The sum lands on a 7-point line, and the relay maps each point to a coded
symbol with ``j mod 4``.
"""

import numpy as np

from pncqam import build_mapping_table, decode_expected, from_name

c = from_name("pam4", labeling="gray")
table = build_mapping_table(c)

# the superposed points, in units of the base spacing
sup = table.superposed
print("superposed points:", np.round(sup.points.real / c.scale).astype(int))
print("coded symbols    :", table.grid_codes[:, 0])

# how many (s1, s2) pairs fall on each point: a triangle, 1 2 3 4 3 2 1
print("pairs per point  :", [len(p) for p in sup.origin_pairs])

###############################################################################
# A destination that already knows one symbol recovers the other.

s1, s2 = 2, 3
coded = table.coded(s1, s2)
print(f"C({s1}, {s2}) = {coded}; decoded with known s1: {decode_expected(table, coded, s1)}")

###############################################################################
# The same rule works per axis for square QAM. 16-QAM sums fill a 7x7 grid
# and every 4x4 window holds all 16 coded symbols.

t16 = build_mapping_table(from_name("qam16"))
print(t16.grid_codes)
