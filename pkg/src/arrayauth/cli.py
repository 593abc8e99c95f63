"""Command-line front end: enrollment, geometry rendering, simulation, inspection.

Exit code 0 only on full success. CSV and registry writes are atomic
(temp file + rename), so interrupted runs never leave partial outputs.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys

from arrayauth import montecarlo
from arrayauth.geometry import ParameterError, PerturbationParams, generate_chaotic_geometry, render_geometry
from arrayauth.pilot import PilotConfig, generate_pilot_matrix
from arrayauth.registry import DeviceProfile, Registry, SchemaError, derive_device_id, enroll, load, save
from arrayauth.seeding import PURPOSE_GEOMETRY, PURPOSE_PILOT, PURPOSE_SIGNATURE, enrollment_seed
from arrayauth.signature import draw_chaotic_noise


def _parse_snr_grid(text: str) -> tuple[float, ...]:
    """Either 'start:stop:step' (inclusive) or a comma-separated list."""
    if ":" in text:
        parts = [float(v) for v in text.split(":")]
        if len(parts) == 2:
            start, stop, step = parts[0], parts[1], 1.0
        elif len(parts) == 3:
            start, stop, step = parts
        else:
            raise ValueError("grid must be start:stop[:step]")
        if step <= 0 or stop < start:
            raise ValueError("grid must have step > 0 and stop >= start")
        count = int(round((stop - start) / step))
        grid = tuple(start + i * step for i in range(count + 1))
        return tuple(g for g in grid if g <= stop + 1e-9)
    return tuple(float(v) for v in text.split(","))


def _load_registry(path: str) -> Registry:
    if not os.path.exists(path):
        return Registry()
    return load(path)


def cmd_enroll(args) -> int:
    reg = _load_registry(args.registry)
    geo_seed = enrollment_seed(args.seed, 0, PURPOSE_GEOMETRY)
    sig_seed = enrollment_seed(args.seed, 0, PURPOSE_SIGNATURE)
    pil_seed = enrollment_seed(args.seed, 0, PURPOSE_PILOT)
    params = PerturbationParams(h_count=args.h_count, v_count=args.v_count, seed=geo_seed)
    geometry = generate_chaotic_geometry(params)
    noise = draw_chaotic_noise(params.m_count, sig_seed)
    pilot_config = PilotConfig(
        m_antennas=params.m_count,
        t_bauds=args.t_bauds,
        activation_threshold=args.nu,
        seed=pil_seed,
    )
    pilot = generate_pilot_matrix(pilot_config)
    device_id = args.device_id or derive_device_id(noise, pilot)
    enrolled_at = args.enrolled_at or (
        datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    )
    profile = DeviceProfile(
        device_id=device_id,
        geometry=geometry,
        chaotic_noise=noise,
        pilot=pilot,
        pilot_config=pilot_config,
        enrolled_at=enrolled_at,
    )
    reg = enroll(profile, reg)
    save(reg, args.registry)
    print(device_id)
    return 0


def cmd_show_registry(args) -> int:
    reg = load(args.registry)
    print(f"registry version {reg.version}, {len(reg.devices)} device(s)")
    for device_id in sorted(reg.devices):
        p = reg.devices[device_id]
        cfg = p.pilot_config
        print(
            f"  {device_id}  {p.geometry.params.h_count}x{p.geometry.params.v_count} elements,"
            f" T={cfg.t_bauds}, nu={cfg.activation_threshold}, enrolled {p.enrolled_at}"
        )
    return 0


def cmd_render_geometry(args) -> int:
    reg = load(args.registry)
    if args.device_id not in reg.devices:
        raise ParameterError(f"device {args.device_id!r} not found in registry")
    svg = render_geometry(reg.devices[args.device_id].geometry)
    tmp = args.out + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(svg)
    os.replace(tmp, args.out)
    print(f"wrote {args.out}")
    return 0


_CONFIG_KEYS = (
    "scenario",
    "snr_grid_db",
    "m_active",
    "n_seraph",
    "pfa_target",
    "trials_per_point",
    "master_seed",
    "t_bauds",
    "path_count",
    "enrolled_count",
    "activation_threshold",
    "probe_count",
    "sigma_h",
    "snr_reference",
    "threads",
    "intruder_mode",
)


def _experiment_config(args) -> montecarlo.ExperimentConfig:
    values = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
        unknown = set(doc) - set(_CONFIG_KEYS)
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        values.update(doc)
    overrides = {
        "scenario": args.scenario,
        "snr_grid_db": _parse_snr_grid(args.snr_grid) if args.snr_grid else None,
        "m_active": args.m_active,
        "n_seraph": args.n_seraph,
        "pfa_target": args.pfa,
        "trials_per_point": args.trials,
        "master_seed": args.seed,
        "t_bauds": args.t_bauds,
        "path_count": args.paths,
        "enrolled_count": args.enrolled,
        "activation_threshold": args.nu,
        "probe_count": args.probes,
        "snr_reference": args.snr_reference,
        "threads": args.threads,
        "intruder_mode": args.intruder_mode,
    }
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    if "scenario" not in values:
        raise ParameterError("a scenario is required (flag or config file)")
    if "snr_grid_db" in values:
        values["snr_grid_db"] = tuple(float(v) for v in values["snr_grid_db"])
    return montecarlo.ExperimentConfig(**values)


def cmd_simulate(args) -> int:
    cfg = _experiment_config(args)
    curve = montecarlo.run_scenario(cfg)
    montecarlo.write_curve_csv(curve, args.out)
    print(f"scenario={cfg.scenario} m_active={cfg.m_active} pfa={cfg.pfa_target} trials/pt={cfg.trials_per_point}")
    print(f"{'snr_db':>8} {'rate':>12} {'ci_low':>12} {'ci_high':>12} {'events':>8}")
    for p in curve.points:
        print(f"{p.snr_db:8.1f} {p.rate:12.6f} {p.ci_low:12.6f} {p.ci_high:12.6f} {p.events:8d}")
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arrayauth", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_enroll = sub.add_parser("enroll", help="generate and enroll a device profile")
    p_enroll.add_argument("--registry", required=True)
    p_enroll.add_argument("--h-count", type=int, default=4)
    p_enroll.add_argument("--v-count", type=int, default=4)
    p_enroll.add_argument("--t-bauds", type=int, default=64)
    p_enroll.add_argument("--nu", type=float, default=0.0, help="activation threshold")
    p_enroll.add_argument("--seed", type=int, default=0)
    p_enroll.add_argument("--device-id", default=None)
    p_enroll.add_argument("--enrolled-at", default=None, help="ISO timestamp override")
    p_enroll.set_defaults(func=cmd_enroll)

    p_show = sub.add_parser("show-registry", help="list enrolled devices")
    p_show.add_argument("--registry", required=True)
    p_show.add_argument("--seed", type=int, default=0)
    p_show.set_defaults(func=cmd_show_registry)

    p_render = sub.add_parser("render-geometry", help="render an enrolled geometry to SVG")
    p_render.add_argument("--registry", required=True)
    p_render.add_argument("--device-id", required=True)
    p_render.add_argument("--out", required=True)
    p_render.add_argument("--seed", type=int, default=0)
    p_render.set_defaults(func=cmd_render_geometry)

    p_sim = sub.add_parser("simulate", help="run a Monte Carlo rate curve and write CSV")
    p_sim.add_argument("--scenario", choices=montecarlo.SCENARIOS, default=None)
    p_sim.add_argument("--snr-grid", default=None, help="start:stop[:step] or comma list, dB")
    p_sim.add_argument("--m-active", type=int, default=None)
    p_sim.add_argument("--n-seraph", type=int, default=None)
    p_sim.add_argument("--pfa", type=float, default=None)
    p_sim.add_argument("--trials", type=int, default=None)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--t-bauds", type=int, default=None)
    p_sim.add_argument("--paths", type=int, default=None)
    p_sim.add_argument("--enrolled", type=int, default=None)
    p_sim.add_argument("--nu", type=float, default=None)
    p_sim.add_argument("--probes", type=int, default=None)
    p_sim.add_argument("--snr-reference", choices=(montecarlo.SNR_REF_FRAME, montecarlo.SNR_REF_ELEMENT), default=None)
    p_sim.add_argument("--intruder-mode", choices=("random", "clone"), default=None)
    p_sim.add_argument("--threads", type=int, default=None)
    p_sim.add_argument("--config", default=None, help="JSON config; explicit flags override")
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, SchemaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
