"""
Checking unique decodability
============================

A coded-symbol map is usable only if fixing either input makes the map
one-to-one in the other. We check this for every supported modulation and
show that XOR-ing the binary labels breaks it for 4-PAM.
"""

from pncqam.pnc_mapping import build_mapping_table, verify_exclusive_law, xor_mapping_table
from pncqam.constellation import QAM_CROSS, SUPPORTED, build_constellation, from_name

for kind, Ms in SUPPORTED.items():
    for M in Ms:
        c = build_constellation(kind, M, "binary" if kind == QAM_CROSS else "gray")
        t = build_mapping_table(c)
        v = verify_exclusive_law(t)
        print(f"{c.name:>8}: ok={v.ok}  coded alphabet={t.coded_alphabet_size:4d}  table ops={t.ops_count}")

###############################################################################
# Cross constellations need a larger coded alphabet, so the relay's packet
# grows by the ratio below before it is re-chunked onto the original
# constellation.

for name in ("qam8", "qam32", "qam128"):
    t = build_mapping_table(from_name(name))
    print(f"{name}: coded bits/symbol={t.coded_bits_per_symbol}, overhead={t.overhead:.4f}")

###############################################################################
# XOR-ing the labels hands two pairs that share one symbol the same coded
# symbol, so a destination knowing that shared symbol cannot tell them apart.

v = verify_exclusive_law(xor_mapping_table(from_name("pam4")))
print("xor 4-PAM ok:", v.ok, "counterexample:", v.counterexample)
