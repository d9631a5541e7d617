# Copyright 2026 The molfield Authors
# SPDX-License-Identifier: Apache-2.0
#
# Independent high-precision evaluation of reference values used by the
# C++ tests. Run: python3 oracles.py > ../oracle_values.hpp
from mpmath import mp, mpf, exp, sqrt, log, log10

mp.dps = 50


def field(atoms, r, beta, p):
    s = mpf(0)
    for a in atoms:
        d2 = sum((mpf(a[i]) - mpf(p[i])) ** 2 for i in range(3))
        s += exp(-mpf(beta) * (d2 / mpf(r) ** 2 - 1))
    return s


vals = {}
vals["kTwoCarbonCentre"] = field([(-1, 0, 0), (1, 0, 0)], "1.70", 2, (0, 0, 0))
vals["kHydrogenCentre"] = field([(0, 0, 0)], "1.10", 2, (0, 0, 0))
# H at the centre of a 3x3x3 grid with 1 A spacing: face, edge and corner voxels.
vals["kHydrogenFace"] = field([(0, 0, 0)], "1.10", 2, (1, 0, 0))
vals["kHydrogenEdge"] = field([(0, 0, 0)], "1.10", 2, (1, 1, 0))
vals["kHydrogenCorner"] = field([(0, 0, 0)], "1.10", 2, (1, 1, 1))
vals["kCullRadiusBeta2Eps1e6"] = sqrt(1 + log(mpf(10) ** 6) / 2)
vals["kBohrPerAngstrom1986"] = 1 / mpf("0.529177249")
# 10 log10(1 / 0.01)
vals["kPsnrOnesVsPointNine"] = 10 * log10(1 / (mpf(1) - mpf("0.9")) ** 2)

print("// Copyright 2026 The molfield Authors")
print("// SPDX-License-Identifier: Apache-2.0")
print()
print("// Generated by tests/oracles/oracles.py (mpmath, 50 digits). Do not edit.")
print()
print("#pragma once")
print()
print("namespace molfield::oracle {")
print()
for k, v in vals.items():
    print(f"inline constexpr double {k} = {mp.nstr(v, 25)};")
print()
print("}  // namespace molfield::oracle")
