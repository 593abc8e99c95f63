#!/usr/bin/env python3
"""Single-attempt walkthrough: enroll a device, then authenticate one frame.

    python scripts/authenticate_demo.py --snr-db 8 --case miss
    python scripts/authenticate_demo.py --snr-db 8 --case noise
    python scripts/authenticate_demo.py --snr-db 8 --case intruder

Prints the full detector diagnostics record as JSON.
"""

import argparse
import json
import sys

import numpy as np

from arrayauth.channel import (
    ChannelConfig,
    generate_scattering_channel,
    most_square_factors,
    noise_only_frame,
    perturbed_transmit_source,
    rebuild_with_source,
    transmit,
)
from arrayauth.detector import DetectorConfig, authenticate
from arrayauth.montecarlo import build_device_profile, frame_reference_energy, noise_variance_for
from arrayauth.montecarlo import ExperimentConfig
from arrayauth.pilot import PilotConfig, generate_pilot_matrix
from arrayauth.registry import Registry, enroll
from arrayauth.signature import ChaoticNoise, standard_complex_normal


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--case", choices=("miss", "noise", "intruder"), default="miss")
    parser.add_argument("--snr-db", type=float, default=8.0)
    parser.add_argument("--m-active", type=int, default=16)
    parser.add_argument("--n-seraph", type=int, default=512)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    profile = build_device_profile(args.seed, 0, args.m_active, 64, 0.0)
    registry = enroll(profile, Registry())
    hv = most_square_factors(args.m_active)
    source = perturbed_transmit_source(hv[0], hv[1], profile.chaotic_noise)
    rng = np.random.default_rng(args.seed + 1)
    h = generate_scattering_channel(
        ChannelConfig(n_seraph=args.n_seraph, path_count=32), source, args.m_active, rng
    )
    e_ref = frame_reference_energy(profile.pilot, profile.chaotic_noise, args.n_seraph, 1.0)
    cfg = ExperimentConfig(scenario="miss", m_active=args.m_active, n_seraph=args.n_seraph)
    var = noise_variance_for(cfg, args.snr_db, e_ref)

    if args.case == "miss":
        y = transmit(h, profile.pilot, args.snr_db, noise_variance=var, rng=rng)
    elif args.case == "noise":
        y = noise_only_frame(args.n_seraph, 64, var, rng, args.snr_db)
    else:
        intr_noise = ChaoticNoise(values=standard_complex_normal(rng, (args.m_active,)), seed=-1)
        h_intr = rebuild_with_source(h, perturbed_transmit_source(hv[0], hv[1], intr_noise))
        intr_pilot = generate_pilot_matrix(PilotConfig(m_antennas=args.m_active, t_bauds=64), rng=rng)
        y = transmit(h_intr, intr_pilot, args.snr_db, noise_variance=var, rng=rng)

    result = authenticate(
        y, profile, registry, {profile.device_id: h}, DetectorConfig(pfa_target=0.01), rng
    )
    record = {"case": args.case, "snr_db": args.snr_db, **result.to_json_dict()}
    print(json.dumps(record, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
