# quantization_classes.py - flux integrality and holonomy classes on a torus
#
# The discrete torus is one vertex with two loop edges a, b and the
# commutator face a b a^-1 b^-1.  A magnetic field is a single flux value on
# that face; a connection exists iff the flux is an integer number of quanta
# (2 pi).  Once one connection exists, all others differ by a flat twist,
# and the twist is classified by a character of H1 = Z^2.  The torsion
# complex (face word a a) shows the finite part of the classification.

import numpy as np

from magbloch import (
    Character,
    Complex2,
    CoveringData,
    character_group,
    curvature,
    difference_class,
    holonomy,
    homology,
    is_quantizable,
    synthesize_connection,
    twist,
)

TWO_PI = 2 * np.pi

torus = Complex2(1, [(0, 0, 1.0), (0, 0, 1.0)], [(1, 2, -1, -2)])
covering = CoveringData(2, [[1, 0], [0, 1]])
summary = homology(torus)
print("torus homology: betti =", summary.betti, "torsion =", summary.torsion[1])

# --- which fluxes admit a connection ---------------------------------------
for flux in [0.0, np.pi, TWO_PI, 3 * TWO_PI, -2 * TWO_PI]:
    cert = is_quantizable(torus, [flux], summary)
    print(
        f"flux {flux / TWO_PI:+.2f} quanta: pairings {cert.pairings}"
        f" residues {cert.residues} -> {'ok' if cert.verdict else 'obstructed'}"
    )

# --- synthesize a connection and check its curvature ------------------------
flux = np.array([TWO_PI])
theta = synthesize_connection(torus, flux, summary)
print("synthesized edge angles:", theta)
print("curvature (should be 2 pi == 0 mod 2 pi):", curvature(torus, theta))

# --- the space of quantizations is a 2-torus of characters ------------------
group = character_group(summary)
print("character group: free rank", group.free_rank, "components", group.num_components)

rng = np.random.default_rng(0)
print("twisting by random characters and recovering them:")
for _ in range(3):
    chi = group.sample(rng)
    twisted = twist(torus, summary, theta, chi)
    recovered = difference_class(torus, summary, theta, twisted)
    print(
        "  chi angles", np.round(chi.angles, 6),
        "-> recovered", np.round(recovered.angles, 6),
        "(max err %.2e)" % recovered.angle_distance(chi),
    )
    assert recovered.isclose(chi, tol=1e-9)

# a twist by (pi, 0) flips the holonomy around a and leaves b alone
chi = Character(np.array([np.pi, 0.0]))
twisted = twist(torus, summary, theta, chi)
for name, cycle in [("a", [1, 0]), ("b", [0, 1])]:
    before = holonomy(torus, theta, cycle)
    after = holonomy(torus, twisted, cycle)
    print(f"  holonomy around {name}: {before:+.6f} -> {after:+.6f}")

# --- torsion: the finite components of the classification -------------------
torsion_cx = Complex2(1, [(0, 0, 1.0)], [(1, 1)])
ts = homology(torsion_cx)
print("\ntorsion complex: H1 orders =", ts.h1_torsion_orders)
tgroup = character_group(ts)
classes = list(tgroup.enumerate_torsion())
print("number of quantization classes:", len(classes))
theta0 = np.array([0.3])
for chi in classes:
    twisted = twist(torsion_cx, ts, theta0, chi)
    back = difference_class(torsion_cx, ts, theta0, twisted)
    print("  class", chi.torsion_indices, "edge shift", np.round(twisted - theta0, 6),
          "recovered", back.torsion_indices)
    assert back.torsion_indices == chi.torsion_indices

print("\nall quantization-class checks passed")
