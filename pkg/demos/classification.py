"""Placing the networks in the incoherent-operation hierarchy.

Ideal networks are genuinely incoherent. Faulty ones leak populations, so
they lose that status but keep permutation-form Kraus operators. With the
shift lambda the canonical Kraus operators lose that form, yet an explicit
strictly incoherent decomposition still exists.
"""
from aqnn import ChannelSpec, classify, kraus, sio_structural_check

cases = {
    "ideal": ChannelSpec.ideal(3, uniform=-0.6),
    "faulty": ChannelSpec.faulty(3, 0.3, gamma=0.1, uniform=-0.6),
    "shifted": ChannelSpec.faulty(3, 0.3, gamma=0.1, lambda_shift=0.05, uniform=-0.6),
}
for name, spec in cases.items():
    rep = classify(spec)
    canonical = all(sio_structural_check(kraus(spec)))
    print(f"{name:8s} MIO={rep.is_ncg} GIO={rep.is_gio} "
          f"SIO certificate={rep.sio_certificate is not None} "
          f"canonical Kraus permutation-form={canonical} activates={rep.activates_coherence}")
