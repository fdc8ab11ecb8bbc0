# Annulus profiles on [r, r + 1] approach the strip profile as r grows.
from barostab import BoundaryData, EosSpec
from barostab.steady import decay_order, flat_curved_comparison

gas = EosSpec("isentropic", a=1.0, gamma=2.0)
flow = BoundaryData(rho_B=1.0, u_B_minus=0.1, u_B_plus=0.12, mu=3.0)

rows = flat_curved_comparison(gas, flow, [2, 4, 8, 16, 32], n_cells=2048)
print("    r   max|du|   max|du'|  max|drho|")
for row in rows:
    print(f"{row['r']:5g}  {row['du']:.2e}  {row['ddu']:.2e}  {row['drho']:.2e}")

# Fitted power of r for the combined distance.
print("decay order", decay_order(rows))
