"""Scenario runner.

Commands::

    skylink static --config c.json [--set key=value ...]
    skylink mobile --config c.json [--set key=value ...]
    skylink gen-net --isd 500 --rings 2 --operators 3 --seed 7 -o net.json
    skylink gen-city --size-m 3000 --resolution 5 --density 0.3 -o city.asc

The config is a single JSON document; ``--set`` overrides dotted paths
(values parsed as JSON when possible). All outputs are CSV files written
in a deterministic order, so a rerun with the same config is
byte-identical. ``SKYLINK_THREADS`` caps kernel parallelism. Exit codes:
0 ok, 1 config error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import metrics, mobility, network, radio_field, terrain
from .channel import ChannelModel


class ConfigError(Exception):
    pass


# -- config handling -----------------------------------------------------------

_STATIC_DEFAULTS = {
    "out_dir": "out",
    "heights_agl": [20.0, 40.0, 80.0, 160.0],
    "loads": [1.0],
    "thresholds_db": [-6.0],
    "resolution": None,  # default: raster resolution
    "channel": {},
    "noise": {},
}

_MOBILE_DEFAULTS = {
    "speed_mps": 15.0,
    "timestep_s": 0.1,
    "t310_s": 0.2,
    "a3_offset_db": 2.0,
    "window_s": 1.0,
    "threshold_db": -6.0,
    "load": 1.0,
    "n_runs": 5000,
    "seed": 1,
    "bounds": None,  # default: raster bounds inset by one cell
}


def load_config(path: str, overrides: list[str]) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, raw = item.partition("=")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = cfg
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"--set path {key!r} crosses a non-object")
        node[parts[-1]] = value
    return cfg


def _merged(base: dict, given) -> dict:
    if given is None:
        given = {}
    if not isinstance(given, dict):
        raise ConfigError("expected an object")
    out = dict(base)
    out.update(given)
    return out


def _load_raster(cfg: dict) -> terrain.DsmRaster:
    spec = cfg.get("raster")
    if isinstance(spec, str):
        try:
            with open(spec) as fh:
                return terrain.load_ascii_grid(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read raster {spec}: {exc}") from None
        except terrain.GridParseError as exc:
            raise ConfigError(f"raster {spec}: {exc}") from None
    if isinstance(spec, dict) and "gen_city" in spec:
        p = spec["gen_city"]
        return terrain.gen_synthetic_city(
            extent=p.get("size_m", 3000.0),
            resolution=p.get("resolution", 5.0),
            building_density=p.get("density", 0.3),
            height_range=p.get("height_max", 40.0),
            seed=p.get("seed", 0),
        )
    raise ConfigError("config needs `raster`: a file path or {\"gen_city\": {...}}")


def _load_deployment(cfg: dict, raster: terrain.DsmRaster) -> network.Deployment:
    spec = cfg.get("deployment")
    if isinstance(spec, str):
        try:
            with open(spec) as fh:
                doc = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read deployment {spec}: {exc}") from None
        try:
            return network.load_deployment(doc, raster)
        except network.DeploymentError as exc:
            raise ConfigError(f"deployment {spec}: {exc}") from None
    if isinstance(spec, dict) and "gen_net" in spec:
        p = spec["gen_net"]
        ops = _gen_operators(raster=raster, **p)
        return network.Deployment(operators=tuple(ops), raster=raster)
    raise ConfigError("config needs `deployment`: a file path or {\"gen_net\": {...}}")


def _operator_sets(cfg: dict, deployment: network.Deployment) -> list[tuple[str, ...]]:
    raw = cfg.get("operator_sets")
    if raw is None:
        raw = [[op.operator_id] for op in deployment.operators]
        raw.append([op.operator_id for op in deployment.operators])
    sets = []
    for entry in raw:
        if not isinstance(entry, list) or not entry:
            raise ConfigError("operator_sets entries must be non-empty arrays")
        for op_id in entry:
            deployment.operator(op_id)  # raises KeyError if unknown
        sets.append(tuple(entry))
    return sets


# -- output management -----------------------------------------------------------


class OutputWriter:
    """Writes output files and removes all of them if the run fails."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.written: list[str] = []
        os.makedirs(out_dir, exist_ok=True)

    def write(self, name: str, text: str) -> str:
        path = os.path.join(self.out_dir, name)
        with open(path, "w") as fh:
            fh.write(text)
        self.written.append(path)
        return path

    def cleanup(self):
        for path in self.written:
            try:
                os.remove(path)
            except OSError:
                pass


# -- subcommands ------------------------------------------------------------------


def _channel_kwargs(scfg: dict) -> dict:
    kwargs = dict(scfg["channel"])
    if isinstance(kwargs.get("model"), str):
        try:
            kwargs["model"] = ChannelModel[kwargs["model"]]
        except KeyError:
            raise ConfigError(f"unknown channel model {kwargs['model']!r}") from None
    return kwargs


def run_static(cfg: dict) -> list[str]:
    raster = _load_raster(cfg)
    deployment = _load_deployment(cfg, raster)
    scfg = _merged(_STATIC_DEFAULTS, cfg)
    heights = scfg["heights_agl"]
    loads = scfg["loads"]
    thresholds = scfg["thresholds_db"]
    op_sets = _operator_sets(cfg, deployment)
    resolution = scfg["resolution"] or raster.resolution
    channel_kwargs = _channel_kwargs(scfg)
    noise_kwargs = dict(scfg["noise"])
    if not heights or not loads or not thresholds or not op_sets:
        raise ConfigError("heights_agl, loads, thresholds_db and operator_sets must be non-empty")

    writer = OutputWriter(scfg["out_dir"])
    try:
        coverage_rows = []
        cdf_entries = []
        assignments_done = set()
        for height in heights:
            for load in loads:
                for op_set in op_sets:
                    field = radio_field.compute_sinr_grid(
                        deployment,
                        raster,
                        float(height),
                        float(resolution),
                        float(load),
                        op_set,
                        channel_kwargs=channel_kwargs,
                        noise_kwargs=noise_kwargs,
                    )
                    label = field.op_set_label
                    writer.write(
                        f"sinr_h{height:g}_load{load:g}_{label}.csv",
                        radio_field.sinr_field_csv(field),
                    )
                    for thr in thresholds:
                        report = metrics.coverage_probability(field, float(thr))
                        zones = metrics.max_outage_zone(field, float(thr))
                        coverage_rows.append((report, zones))
                    cdf_entries.append((field, metrics.sinr_cdf(field)))
                    if len(op_set) == 1 and (op_set[0], height) not in assignments_done:
                        amap = metrics.assignment_map(field)
                        writer.write(
                            f"assignment_{op_set[0]}_h{height:g}.csv",
                            metrics.assignment_csv(amap),
                        )
                        assignments_done.add((op_set[0], height))
        writer.write("coverage.csv", metrics.coverage_csv(coverage_rows))
        writer.write("cdf.csv", metrics.cdf_csv(cdf_entries))
    except Exception:
        writer.cleanup()
        raise
    return writer.written


def run_mobile(cfg: dict) -> list[str]:
    raster = _load_raster(cfg)
    deployment = _load_deployment(cfg, raster)
    scfg = _merged(_STATIC_DEFAULTS, cfg)
    mcfg = _merged(_MOBILE_DEFAULTS, cfg.get("mobile"))
    heights = scfg["heights_agl"]
    op_sets = _operator_sets(cfg, deployment)
    if not heights or not op_sets:
        raise ConfigError("heights_agl and operator_sets must be non-empty")
    n_runs = int(mcfg["n_runs"])
    if n_runs < 1:
        raise ConfigError("mobile.n_runs must be >= 1")
    bounds = mcfg["bounds"]
    if bounds is None:
        x_min, y_min, x_max, y_max = raster.bounds
        r = raster.resolution
        bounds = (x_min + r, y_min + r, x_max - r, y_max - r)
    else:
        bounds = tuple(float(v) for v in bounds)
    params = mobility.ConnectionParams(
        a3_offset_db=float(mcfg["a3_offset_db"]),
        t310_s=float(mcfg["t310_s"]),
        threshold_db=float(mcfg["threshold_db"]),
        load=float(mcfg["load"]),
    )
    channel_kwargs = _channel_kwargs(scfg) or None
    noise_kwargs = dict(scfg["noise"]) or None

    writer = OutputWriter(scfg["out_dir"])
    try:
        all_stats: list[mobility.RunStats] = []
        groups = []
        for height in heights:
            for op_set in op_sets:
                stats = mobility.run_random_flights(
                    deployment,
                    raster,
                    bounds,
                    float(height),
                    op_set,
                    n_runs,
                    params,
                    speed_mps=float(mcfg["speed_mps"]),
                    timestep_s=float(mcfg["timestep_s"]),
                    seed=int(mcfg["seed"]),
                    window_s=float(mcfg["window_s"]),
                    channel_kwargs=channel_kwargs,
                    noise_kwargs=noise_kwargs,
                )
                all_stats.extend(stats)
                groups.append((float(height), "+".join(op_set), mobility.aggregate_runs(stats)))
        writer.write("flights.csv", mobility.flights_csv(all_stats))
        writer.write("rlf_durations.csv", mobility.rlf_durations_csv(all_stats))
        writer.write("summary.csv", mobility.summary_csv(groups))
    except Exception:
        writer.cleanup()
        raise
    return writer.written


def _gen_operators(
    isd: float = 500.0,
    rings: int = 2,
    operators: int = 3,
    seed: int = 0,
    center_x: float = 0.0,
    center_y: float = 0.0,
    antenna_height_agl: float = 35.0,
    downtilt_deg: float = 6.0,
    tx_power_dbm: float = 43.0,
    carrier_hz: float = 1.8e9,
    bandwidth_hz: float = 20e6,
    shift_frac: float = 0.33,
    az_jitter_deg: float = 0.0,
    tilt_jitter_deg: float = 0.0,
    raster: terrain.DsmRaster | None = None,
) -> list[network.OperatorNetwork]:
    """Operators on shifted/rotated hex lattices for inter-operator diversity."""
    ops = []
    for k in range(int(operators)):
        ops.append(
            network.gen_hex_network(
                isd,
                int(rings),
                operator_id=f"op{k + 1}",
                azimuth_offset_deg=k * 120.0 / max(1, int(operators)),
                center=(
                    center_x + k * shift_frac * isd / max(1, int(operators) - 1) if operators > 1 else center_x,
                    center_y + k * 0.5 * shift_frac * isd / max(1, int(operators) - 1) if operators > 1 else center_y,
                ),
                antenna_height_agl=antenna_height_agl,
                downtilt_deg=downtilt_deg,
                tx_power_dbm=tx_power_dbm,
                carrier_hz=carrier_hz,
                bandwidth_hz=bandwidth_hz,
                azimuth_jitter_deg=az_jitter_deg,
                downtilt_jitter_deg=tilt_jitter_deg,
                seed=seed + k,
                raster=raster,
            )
        )
    return ops


def cmd_gen_net(args) -> int:
    ops = _gen_operators(
        isd=args.isd,
        rings=args.rings,
        operators=args.operators,
        seed=args.seed,
        center_x=args.center_x,
        center_y=args.center_y,
        antenna_height_agl=args.antenna_height,
        downtilt_deg=args.downtilt,
        tx_power_dbm=args.tx_power,
        carrier_hz=args.carrier_hz,
        bandwidth_hz=args.bandwidth_hz,
        shift_frac=args.shift_frac,
        az_jitter_deg=args.az_jitter,
        tilt_jitter_deg=args.tilt_jitter,
    )
    deployment = network.Deployment(operators=tuple(ops))
    with open(args.output, "w") as fh:
        fh.write(network.save_deployment(deployment, raster=None))
        fh.write("\n")
    return 0


def cmd_gen_city(args) -> int:
    raster = terrain.gen_synthetic_city(
        extent=args.size_m,
        resolution=args.resolution,
        building_density=args.density,
        height_range=args.height_max,
        seed=args.seed,
    )
    with open(args.output, "w") as fh:
        fh.write(terrain.save_ascii_grid(raster))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skylink", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, func in (("static", run_static), ("mobile", run_mobile)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
        p.set_defaults(runner=func)

    p = sub.add_parser("gen-net")
    p.add_argument("--isd", type=float, default=500.0)
    p.add_argument("--rings", type=int, default=2)
    p.add_argument("--operators", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--center-x", type=float, default=0.0)
    p.add_argument("--center-y", type=float, default=0.0)
    p.add_argument("--antenna-height", type=float, default=35.0)
    p.add_argument("--downtilt", type=float, default=6.0)
    p.add_argument("--tx-power", type=float, default=43.0)
    p.add_argument("--carrier-hz", type=float, default=1.8e9)
    p.add_argument("--bandwidth-hz", type=float, default=20e6)
    p.add_argument("--shift-frac", type=float, default=0.33)
    p.add_argument("--az-jitter", type=float, default=0.0)
    p.add_argument("--tilt-jitter", type=float, default=0.0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(gen=cmd_gen_net)

    p = sub.add_parser("gen-city")
    p.add_argument("--size-m", type=float, default=3000.0)
    p.add_argument("--resolution", type=float, default=5.0)
    p.add_argument("--density", type=float, default=0.3)
    p.add_argument("--height-max", type=float, default=40.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(gen=cmd_gen_city)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if hasattr(args, "gen"):
            return args.gen(args)
        cfg = load_config(args.config, args.overrides)
        written = args.runner(cfg)
        for path in written:
            print(path)
        return 0
    except (ConfigError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
