"""
Splitting the representable functor at H0
==========================================

Build and verify the decomposition certificate on the small site, then look
at the endomorphism ring of Mix01. Run with a larger site through
``fquad verify ph0-decomposition --max-dim 4``.
"""
import json

from fquad.decomp import (end_ring, find_idempotents, identity_coords, reverify,
                          site_spaces, swap, verify_ph0)

small = site_spaces(2)
cert = verify_ph0(small)
print("verdict:", cert.verdict)
for row in cert.dims:
    print(row)
print(cert.checks)

# certificates are plain JSON and can be checked again from scratch
blob = json.loads(json.dumps(cert.to_json()))
print("re-verified:", reverify(blob).verdict)

#%%
from fquad.functors import functor_by_name

ring = end_ring(functor_by_name("Mix01"), site_spaces(4))
one, tau = identity_coords(ring), ring.coordinates(swap(0))
print("dim End(Mix01) =", ring.dim)
print("tau^2 == 1:", ring.multiply(tau, tau) == one)
print("idempotents:", find_idempotents(ring))
