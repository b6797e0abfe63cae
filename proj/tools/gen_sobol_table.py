#!/usr/bin/env python3
"""Emit include/gdfl/detail/sobol_table.hpp from the Joe-Kuo direction numbers.

The source is the new-joe-kuo-6.21201 table as shipped with SciPy
(scipy/stats/_sobol_direction_numbers.npz). Only the first DIMS dimensions are
kept. Each dimension stores its primitive polynomial (with leading and
trailing bits) followed by `degree` initial direction numbers.
"""
import os
import sys

import numpy as np
import scipy

DIMS = int(sys.argv[1]) if len(sys.argv) > 1 else 5000
out = sys.argv[2] if len(sys.argv) > 2 else os.path.join(
    os.path.dirname(__file__), "..", "include", "gdfl", "detail", "sobol_table.hpp")

data = np.load(os.path.join(os.path.dirname(scipy.__file__), "stats", "_sobol_direction_numbers.npz"))
poly = data["poly"][:DIMS]
vinit = data["vinit"][:DIMS]

flat = []
for d in range(DIMS):
    p = int(poly[d])
    deg = max(p.bit_length() - 1, 1)
    flat.append(p)
    flat.extend(int(v) for v in vinit[d, :deg])

with open(out, "w") as fh:
    fh.write("// Generated by tools/gen_sobol_table.py. Do not edit.\n")
    fh.write("// Joe & Kuo direction numbers (new-joe-kuo-6.21201), first %d dimensions.\n" % DIMS)
    fh.write("// Layout per dimension: polynomial, then deg(polynomial) initial numbers m_1..m_s\n")
    fh.write("// (dimension 1 is the van der Corput sequence: polynomial 1, m_1 = 1).\n")
    fh.write("#pragma once\n\n#include <cstddef>\n#include <cstdint>\n\n")
    fh.write("namespace gdfl::detail {\n\n")
    fh.write("inline constexpr std::size_t kSobolMaxDim = %d;\n\n" % DIMS)
    fh.write("inline constexpr std::uint32_t kSobolData[] = {\n")
    for i in range(0, len(flat), 16):
        fh.write("    " + ",".join(str(v) for v in flat[i:i + 16]) + ",\n")
    fh.write("};\n\n}  // namespace gdfl::detail\n")
print(out, len(flat))
