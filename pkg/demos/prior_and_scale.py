"""Prior density, penalty and the global scale picked for a problem size."""

import math

from scipy import integrate

from ghslike import ScaleSolveSpec, hs_like_density, penalty, prior_tail_mass, solve_global_scale

for a in (0.01, 1.0):
    print(f"a = {a}")
    for w in (0.01, 0.1, 1.0, 3.0):
        print(f"  omega={w:<5} density={hs_like_density(w, a):9.4f} penalty={penalty(w, a):8.4f}")
    print(f"  P(|omega| > 1) = {prior_tail_mass(1.0, a):.4f}")

for n, p in [(120, 100), (120, 200), (500, 50)]:
    spec = ScaleSolveSpec(n=n, p=p)
    quad = solve_global_scale(spec)
    taylor = solve_global_scale(spec, method="taylor")
    print(f"n={n} p={p}: a={quad:.3e} (quadrature), {taylor:.3e} (taylor)")

# the density is unbounded at the origin yet integrable; integrate over log|omega|
half, _ = integrate.quad(lambda s: hs_like_density(math.exp(s), 1.0) * math.exp(s), -60, 60, limit=400)
print(f"total mass with a=1: {2 * half:.8f}")
