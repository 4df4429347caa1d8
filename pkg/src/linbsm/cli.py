"""Command-line entry point: ``linbsm {distribution,metrics,table,relay}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import secrets
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import relay
from .detector import PnrConfig, correct_counts, corrected_std, sample
from .metrics import compute_metrics
from .noise import NoiseConfig, noisy_distributions
from .schemes import (
    DETECTION_LABELS,
    PHOTON_NUMBER,
    BellKind,
    SchemeKind,
    build_classifier,
    ideal_distributions,
)
from .serialize import (
    SCHEMA_VERSION,
    SchemaError,
    distribution_csv,
    distribution_to_json,
    dumps,
    label_str,
    num,
    record_to_json,
    relay_csv,
    rounded,
    table_from_json,
    table_to_json,
)

log = logging.getLogger("linbsm")

EXIT_CONFIG = 2
EXIT_RUNTIME = 3

# values reported in the experiment, printed next to simulated metrics
REPORTED_VALUES = {
    SchemeKind.STANDARD: {"p_c": 0.481, "mdf": 0.977, "tvd": 0.072},
    SchemeKind.ENHANCED: {"p_c": 0.579},
}
THEORY_P_C = {SchemeKind.STANDARD: 0.5, SchemeKind.ENHANCED: 0.625}

FILE_NAMES = {
    BellKind.PSI_PLUS: "psi_plus",
    BellKind.PSI_MINUS: "psi_minus",
    BellKind.PHI_PLUS: "phi_plus",
    BellKind.PHI_MINUS: "phi_minus",
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    scheme: SchemeKind = SchemeKind.ENHANCED
    input: Optional[BellKind] = None  # None means all four
    noise: Optional[NoiseConfig] = None
    pnr: Optional[PnrConfig] = None
    shots: Optional[int] = None
    output: Optional[Path] = None
    format: str = "json"
    table: Optional[Path] = None
    workers: int = 1
    # relay
    p_c: list[float] = field(default_factory=list)
    n_max: int = 20
    relay_mode: str = "memoryless"

    @property
    def inputs(self) -> list[BellKind]:
        return list(BellKind) if self.input is None else [self.input]

    def validate(self) -> None:
        if (self.shots is None) != (self.pnr is None):
            raise ConfigError("detector sampling needs --shots; --eta/--k/--seed only apply when sampling")
        if self.shots is not None and self.shots < 1:
            raise ConfigError("--shots must be positive")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.n_max < 1:
            raise ConfigError("--n-max must be >= 1")
        if self.relay_mode not in ("memoryless", "memory"):
            raise ConfigError(f"unknown relay mode {self.relay_mode!r}")


def _parse_input(text: str) -> Optional[BellKind]:
    return None if text == "all" else BellKind.parse(text)


def _load_config_file(path: Path) -> dict[str, Any]:
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config file must hold a JSON object")
    return doc


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge the optional config file with command-line flags (flags win)."""
    doc = _load_config_file(args.config) if getattr(args, "config", None) else {}
    try:
        noise_doc = doc.get("noise")
        pnr_doc = doc.get("pnr")
        cfg = RunConfig(
            scheme=SchemeKind(doc.get("scheme", "enhanced")),
            input=_parse_input(doc.get("input", "all")),
            noise=NoiseConfig(**noise_doc) if noise_doc is not None else None,
            pnr=PnrConfig(**{"seed": 0, **pnr_doc}) if pnr_doc is not None else None,
            shots=doc.get("shots"),
            output=Path(doc["output"]) if doc.get("output") else None,
            format=doc.get("format", "json"),
            table=Path(doc["table"]) if doc.get("table") else None,
            p_c=list(doc.get("p_c", [])),
            n_max=int(doc.get("n_max", 20)),
            relay_mode=doc.get("relay_mode", "memoryless"),
        )
        seed_from_file = pnr_doc is not None and "seed" in pnr_doc

        a = vars(args)
        if a.get("scheme"):
            cfg.scheme = SchemeKind(a["scheme"])
        if a.get("input"):
            cfg.input = _parse_input(a["input"])
        if a.get("output"):
            cfg.output = Path(a["output"])
        if a.get("format"):
            cfg.format = a["format"]
        if a.get("table"):
            cfg.table = Path(a["table"])
        if a.get("workers"):
            cfg.workers = a["workers"]
        if a.get("p_c"):
            cfg.p_c = cfg.p_c + a["p_c"]
        if a.get("n_max") is not None:
            cfg.n_max = a["n_max"]
        if a.get("relay_mode"):
            cfg.relay_mode = a["relay_mode"]

        noise_flags = {
            "v_bell_hv": a.get("v_bell_hv"),
            "v_bell_pm": a.get("v_bell_pm"),
            "v_aux_hv": a.get("v_aux"),
        }
        if a.get("noise") == "experiment" and cfg.noise is None:
            cfg.noise = NoiseConfig()
        elif a.get("noise") == "none":
            cfg.noise = None
        if any(v is not None for v in noise_flags.values()):
            base = cfg.noise or NoiseConfig.ideal()
            cfg.noise = replace(base, **{k: v for k, v in noise_flags.items() if v is not None})

        if a.get("shots") is not None:
            cfg.shots = a["shots"]
        pnr_flags = {"eta": a.get("eta"), "k": a.get("k"), "seed": a.get("seed")}
        if any(v is not None for v in pnr_flags.values()) or (cfg.shots is not None and cfg.pnr is None):
            base = cfg.pnr or PnrConfig()
            cfg.pnr = replace(base, **{k: v for k, v in pnr_flags.items() if v is not None})
        if cfg.pnr is not None and pnr_flags["seed"] is None and not seed_from_file:
            cfg.pnr = replace(cfg.pnr, seed=secrets.randbits(63))
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    cfg.validate()
    return cfg


def _input_seed(seed: int, kind: BellKind) -> int:
    # independent stream per Bell input, stable across runs
    return int(np.random.SeedSequence([seed, list(BellKind).index(kind)]).generate_state(1, np.uint64)[0])


def _exact_distributions(cfg: RunConfig):
    if cfg.noise is None:
        return ideal_distributions(cfg.scheme)
    return noisy_distributions(cfg.scheme, cfg.noise)


def _sampled(cfg: RunConfig, exact, kind: BellKind):
    pnr = replace(cfg.pnr, seed=_input_seed(cfg.pnr.seed, kind))
    rec = sample(exact[kind], pnr, cfg.shots, PHOTON_NUMBER[cfg.scheme], workers=cfg.workers)
    if rec.post_selected == 0:
        return rec, None, None
    corrected = correct_counts(rec)
    freqs = {p: c / rec.post_selected for p, c in rec.raw.items()}
    return rec, corrected, corrected_std(freqs, pnr.k, rec.post_selected)


def _header(cfg: RunConfig, kind: str) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "scheme": cfg.scheme.value,
        "modes": list(DETECTION_LABELS[cfg.scheme]),
        "noise": asdict(cfg.noise) if cfg.noise else None,
        "pnr": asdict(cfg.pnr) if cfg.pnr else None,
        "shots": cfg.shots,
    }


def cmd_distribution(cfg: RunConfig) -> dict[Optional[str], str]:
    """Exact (and optionally sampled + corrected) distributions, one artifact per input."""
    exact = _exact_distributions(cfg)
    out: dict[Optional[str], str] = {}
    for kind in cfg.inputs:
        name = FILE_NAMES[kind] if cfg.input is None else None
        columns = {"exact": exact[kind]}
        doc = {**_header(cfg, "distribution"), "input": kind.value, "exact": distribution_to_json(exact[kind])}
        if cfg.shots is not None:
            rec, corrected, std = _sampled(cfg, exact, kind)
            doc["sampled"] = record_to_json(rec, corrected, std)
            if corrected is not None:
                columns["corrected"] = corrected
                columns["std_error"] = std
        if cfg.format == "csv":
            out[name] = distribution_csv(DETECTION_LABELS[cfg.scheme], columns)
        else:
            out[name] = dumps(doc)
    return out


def cmd_metrics(cfg: RunConfig) -> dict[Optional[str], str]:
    """Metrics report for all four inputs, exact and (with --shots) sampled."""
    if cfg.format == "csv":
        raise ConfigError("metrics are emitted as JSON only")
    if cfg.table is not None:
        try:
            table = table_from_json(json.loads(cfg.table.read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read table {cfg.table}: {exc}") from exc
        if table.n_modes != len(DETECTION_LABELS[cfg.scheme]):
            raise ConfigError("override table does not match the scheme's detection modes")
    else:
        table = build_classifier(cfg.scheme)
    ideal = ideal_distributions(cfg.scheme)
    exact = _exact_distributions(cfg)
    n = PHOTON_NUMBER[cfg.scheme]
    doc = {
        **_header(cfg, "metrics"),
        "theory_p_c": THEORY_P_C[cfg.scheme],
        "reported": REPORTED_VALUES[cfg.scheme],
        "exact": rounded(compute_metrics(exact, table, ideal, n).to_dict()),
    }
    if cfg.shots is not None:
        corrected = {}
        for kind in BellKind:
            _, dist, _ = _sampled(cfg, exact, kind)
            if dist is None:
                raise RuntimeError(f"no shots survived post-selection for {kind.value}")
            corrected[kind] = dist
        doc["sampled"] = rounded(compute_metrics(corrected, table, ideal, n).to_dict())
    return {None: dumps(doc)}


def cmd_table(cfg: RunConfig) -> dict[Optional[str], str]:
    table = build_classifier(cfg.scheme)
    ideal = ideal_distributions(cfg.scheme)
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(DETECTION_LABELS[cfg.scheme]) + ["label"] + [k.value for k in BellKind])
        for p, label in sorted(table.entries.items()):
            w.writerow(list(p) + [label_str(label)] + [repr(num(ideal[k].get(p, 0.0))) for k in BellKind])
        return {None: buf.getvalue()}
    doc = table_to_json(table, ideal, scheme=cfg.scheme.value, modes=list(DETECTION_LABELS[cfg.scheme]))
    return {None: dumps(doc)}


def cmd_relay(cfg: RunConfig) -> dict[Optional[str], str]:
    curves = relay.preset_curves(cfg.n_max, cfg.relay_mode)
    curves += [relay.curve(p, cfg.n_max, f"user_{p:g}", cfg.relay_mode) for p in cfg.p_c]
    if cfg.format == "csv":
        return {c.label: relay_csv(c) for c in curves}
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "relay",
        "mode": cfg.relay_mode,
        "curves": [rounded(c.to_dict()) for c in curves],
    }
    return {None: dumps(doc)}


def write_artifacts(artifacts: dict[Optional[str], str], output: Optional[Path], fmt: str) -> None:
    single = list(artifacts) == [None]
    if output is None:
        for name, text in artifacts.items():
            if not single:
                sys.stdout.write(f"# {name}\n")
            sys.stdout.write(text)
        return
    if single:
        output.parent.mkdir(parents=True, exist_ok=True)
        output.write_text(artifacts[None])
        return
    output.mkdir(parents=True, exist_ok=True)
    for name, text in artifacts.items():
        (output / f"{name}.{fmt}").write_text(text)


COMMANDS = {
    "distribution": cmd_distribution,
    "metrics": cmd_metrics,
    "table": cmd_table,
    "relay": cmd_relay,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linbsm", description="Linear-optical Bell-state measurement simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file with RunConfig fields; flags override it")
    common.add_argument("--output", help="output file, or directory when several artifacts are produced")
    common.add_argument("--format", choices=["json", "csv"])

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--scheme", choices=[s.value for s in SchemeKind])
    sim.add_argument("--input", choices=[k.value for k in BellKind] + ["all"])
    sim.add_argument("--noise", choices=["none", "experiment"], help="start from the experiment's quoted visibilities")
    sim.add_argument("--v-bell-hv", type=float)
    sim.add_argument("--v-bell-pm", type=float)
    sim.add_argument("--v-aux", type=float)
    sim.add_argument("--eta", type=float)
    sim.add_argument("--k", type=int)
    sim.add_argument("--shots", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--workers", type=int, default=None)

    sub.add_parser("distribution", parents=[common, sim], help="detection-pattern distributions")
    m = sub.add_parser("metrics", parents=[common, sim], help="p_c, p_f, p_amb, MDF and distance")
    m.add_argument("--table", help="classification table JSON overriding the derived one")
    t = sub.add_parser("table", parents=[common], help="pattern classification table")
    t.add_argument("--scheme", choices=[s.value for s in SchemeKind])
    r = sub.add_parser("relay", parents=[common], help="entanglement-swapping chain success curves")
    r.add_argument("--p-c", type=float, action="append", help="extra BSM success probability (repeatable)")
    r.add_argument("--n-max", type=int)
    r.add_argument("--relay-mode", choices=["memoryless", "memory"])
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        cfg = build_config(args)
        artifacts = COMMANDS[args.command](cfg)
    except (ConfigError, SchemaError) as exc:
        print(f"linbsm: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"linbsm: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        write_artifacts(artifacts, cfg.output, cfg.format)
    except OSError as exc:
        print(f"linbsm: cannot write output: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":
    sys.exit(main())
