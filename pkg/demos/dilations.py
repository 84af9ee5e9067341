"""Unitary realizations of the networks.

The ideal network dilates to a block-diagonal unitary built from Gram
vectors. The permutation form of a faulty network exists only on the
boundary of its CP region; inside it the generic Kraus isometry is used.
"""
from aqnn import ChannelSpec, ConstraintInfeasible, build_gio_dilation, build_sio_dilation, verify_dilation
from aqnn.dilation import build_dilation_for

ideal = ChannelSpec.ideal(3, uniform=-0.5)
u = build_gio_dilation(ideal)
print(f"GIO dilation: ancilla dim {u.ancilla_dim}, round trip {verify_dilation(u, ideal):.1e}")

boundary = ChannelSpec.faulty(2, 0.2, gamma=0.2, uniform=-0.2)
u = build_sio_dilation(boundary)
print(f"SIO dilation on the boundary: round trip {verify_dilation(u, boundary):.1e}")

interior = ChannelSpec.faulty(2, 0.2, gamma=0.2, uniform=-0.5)
try:
    build_sio_dilation(interior)
except ConstraintInfeasible as exc:
    print("interior point:", exc.diagnostic)
    u = build_dilation_for(interior)
    print(f"generic dilation instead: round trip {verify_dilation(u, interior):.1e}")
