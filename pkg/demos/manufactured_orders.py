# Order of accuracy of the finite-volume scheme from manufactured solutions.
#
# Smooth fields rho(r, t) and u(r, t) are pushed through the equations with
# sympy; the leftover terms become source terms, so the fields are exact
# solutions of the forced problem and the error can be measured directly.
from barostab import EosSpec, Geometry, mms_convergence

gas = EosSpec("isentropic", a=1.0, gamma=2.0)

for geometry in (Geometry.strip(), Geometry.annulus(1.0, 2.0)):
    results = mms_convergence(gas, geometry, orders=(1, 2), levels=(32, 64, 128))
    for order, res in results.items():
        errs = " ".join(f"{e:.2e}" for e in res.errors)
        print(f"{geometry.kind:8s} order {order}: errors {errs}  observed {res.observed_order:.2f}")
