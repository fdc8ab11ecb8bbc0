# Steady states in the three geometries, and the checks that come with them.
import numpy as np

from barostab import BoundaryData, EosSpec, Geometry, solve_steady, steady_residual
from barostab.steady import check_properties, decay_exponents

gas = EosSpec("isentropic", a=1.0, gamma=2.0)
flow = BoundaryData(rho_B=1.0, u_B_minus=0.1, u_B_plus=0.12, mu=3.0)

# Strip: bisection on the integration constant Lambda.
strip = solve_steady(gas, flow, Geometry.strip())
print("strip Lambda", strip.Lambda)
print("strip u(0), u(1)", strip.u_tilde[0], strip.u_tilde[-1])
print("strip residuals", steady_residual(strip, gas))
print(check_properties(strip))

# Annulus [r-, r- + 1]: shooting on the inner slope. Mass flux r^2 rho u is constant.
ring = solve_steady(gas, flow, Geometry.annulus(128.0))
flux = ring.grid ** 2 * ring.rho_tilde * ring.u_tilde
print("annulus slope at r-", ring.du_tilde[0])
print("annulus flux spread", np.ptp(flux) / flux[0])
print(check_properties(ring))

# Exterior of a ball with a hard-sphere gas: inflow from infinity, outflow through the ball.
dense = EosSpec("hard_sphere", a=1.0, beta=3.0, rho_bar=2.0)
sink = BoundaryData(u_B=0.01, rho_inf=1.0, mu=1.0)
ext = solve_steady(dense, sink, Geometry.exterior(1.0, 200.0))
print("exterior rho at the ball", ext.rho_tilde[0])
print("exterior residuals", steady_residual(ext, dense))

# Log-log slopes over the outer decade: expect -4, -2 and -3.
for name, k in decay_exponents(ext).items():
    print(f"  {name:12s} {k:+.3f}")
