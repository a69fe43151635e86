#!/usr/bin/env python3
"""
Quick demonstration of the verification pipeline on the hyperbolic model.
"""

import numpy as np
from dotenv import load_dotenv

load_dotenv()

from base_geometry import curvature_spinors
from flat_oracle import flat_map_F, flat_oracle_check, flat_potential
from geometry_catalog import compactified_partner, create_geometry
from twistor_cr import levi_form

print("=" * 60)
print("Twistor Verification Demo")
print("=" * 60)

# Demo 1: curvature spinors of H^4
print("\n1. Curvature spinors of the hyperbolic half-space:")
print("-" * 60)
hyperbolic = create_geometry("hyperbolic")
spinors = curvature_spinors(hyperbolic, hyperbolic.center)
print(f"   Lambda = {spinors.lam:.10f}  (expected -0.5)")
print(f"   |Psi~| = {np.max(np.abs(spinors.psi_tilde)):.2e}, |Phi| = {np.max(np.abs(spinors.phi)):.2e}")

# Demo 2: the flat model
print("\n2. Flat model: F~(x, pi) and the potential r~ = |pi|^2 x^0:")
print("-" * 60)
x, pi = np.array([0.4, 0.1, -0.2, 0.3]), np.array([1.0 + 0.5j, -0.3j])
image = flat_map_F(x, pi)
print(f"   W = {np.round(image.w, 4)}")
print(f"   r~(W) = {flat_potential(image):.10f}, |pi|^2 x^0 = {np.vdot(pi, pi).real * x[0]:.10f}")

geomX, r = compactified_partner(hyperbolic)
report = flat_oracle_check(geomX, r, samples=3)
for record in report.checks:
    mark = "✅" if record.passed else "❌"
    print(f"   {mark} {record.check}: {record.max_residual:.2e}")

# Demo 3: Levi form of the twistor CR structure over R^3
print("\n3. Levi form over flat R^3 at zeta = (1, i, 0):")
print("-" * 60)
levi = levi_form(create_geometry("flat-r3"), np.zeros(3), np.array([1.0, 1.0j, 0.0]))
print(f"   eigenvalues = {np.round(np.linalg.eigvalsh(levi.matrix), 6)}, signature = {levi.signature}")

print("\n" + "=" * 60)
print("Demo complete!")
print("=" * 60)
print("\nRun every suite with: python verify.py --suite all")
print("Run the flagship check with: python verify.py --geometry hyperbolic --suite flat-oracle")
