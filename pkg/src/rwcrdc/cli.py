"""Experiment driver.

Runs seeded simulation trials of the remove-win priority queue and/or the
add-win baseline over a generated workload, optionally sweeping one knob
(rate, delay, or replicas_per_dc) across a list of values, and writes CSV
reports.  Also replays the three scripted scenarios (--figures) and asserts
their documented end states.

Every option can come from a flat key=value config file (--config); flags
win over the file.  Outputs are deterministic for a given config and seed:
trial i runs with seed+i, and no timestamps or environment details leak
into the files.

CSV files written to --out:
  trials.csv    one row per (sweep point, system, trial)
  summary.csv   per-(sweep point, system) means over trials
  overhead.csv  metadata-overhead time series for trial 0 of each cell
  probes.csv    per-probe errors for trial 0 of each cell

Each file starts with '#' comment lines recording the effective config and
the scale factor relative to the 20,000,000-op reference experiment.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

from . import figures
from .experiment import SYSTEMS, run_trial
from .metrics import replay_oracle
from .simnet import DelayModel
from .workload import MIXES, WorkloadConfig

REFERENCE_OPS = 20_000_000

DEFAULTS = {
    "crdc": "both",
    "pattern": "inc_dominant",
    "rate": 10_000.0,
    "ops": 100_000,
    "dcs": 3,
    "replicas_per_dc": 3,
    "inter_delay": "50,10",
    "intra_delay": "10,2",
    "trials": 1,
    "seed": 0,
    "sweep": None,
    "out": "out",
}

SWEEPABLE = ("rate", "delay", "replicas_per_dc")


def _parse_pair(text):
    try:
        mean, std = (float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            "expected MEAN,STD (e.g. 50,10), got %r" % text)
    if mean <= 0 or std < 0:
        raise argparse.ArgumentTypeError("delay mean must be >0, std >=0")
    return (mean, std)


def _parse_sweep(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError("expected KNOB=v1,v2,..., got %r" % text)
    knob, _, values = text.partition("=")
    knob = knob.strip().replace("-", "_")
    if knob not in SWEEPABLE:
        raise argparse.ArgumentTypeError(
            "cannot sweep %r (one of: %s)" % (knob, ", ".join(SWEEPABLE)))
    try:
        vals = [float(v) for v in values.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("non-numeric sweep value in %r" % values)
    if not vals:
        raise argparse.ArgumentTypeError("empty sweep value list")
    return (knob, vals)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rwcrdc",
        description="Replicated priority-queue experiment driver (CSV output).")
    p.add_argument("--config", metavar="FILE",
                   help="flat key=value config file; flags override it")
    p.add_argument("--crdc", choices=("rmv_win", "add_win", "both"))
    p.add_argument("--pattern", choices=tuple(MIXES))
    p.add_argument("--rate", type=float, help="operations per second")
    p.add_argument("--ops", type=int, help="total update operations per trial")
    p.add_argument("--dcs", type=int, help="number of data centers")
    p.add_argument("--replicas-per-dc", type=int, dest="replicas_per_dc")
    p.add_argument("--inter-delay", type=_parse_pair, metavar="MEAN,STD",
                   dest="inter_delay", help="inter-DC delay (ms)")
    p.add_argument("--intra-delay", type=_parse_pair, metavar="MEAN,STD",
                   dest="intra_delay", help="intra-DC delay (ms)")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--sweep", type=_parse_sweep, metavar="KNOB=v1,v2,...",
                   help="vary one knob: %s" % ", ".join(SWEEPABLE))
    p.add_argument("--figures", action="store_true",
                   help="replay the documented scenario scripts and exit")
    p.add_argument("--out", metavar="DIR", help="output directory")
    return p


def _read_config(path):
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SystemExit("%s:%d: expected key=value, got %r"
                                 % (path, lineno, raw.strip()))
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


_CONFIG_PARSERS = {
    "rate": float, "ops": int, "dcs": int, "replicas_per_dc": int,
    "trials": int, "seed": int,
    "inter_delay": _parse_pair, "intra_delay": _parse_pair,
    "sweep": _parse_sweep,
}


def resolve_config(args) -> dict:
    cfg = dict(DEFAULTS)
    cfg["inter_delay"] = _parse_pair(cfg["inter_delay"])
    cfg["intra_delay"] = _parse_pair(cfg["intra_delay"])
    if args.config:
        for key, raw in _read_config(args.config).items():
            if key not in DEFAULTS:
                raise SystemExit("%s: unknown config key %r" % (args.config, key))
            try:
                cfg[key] = _CONFIG_PARSERS.get(key, str)(raw)
            except argparse.ArgumentTypeError as exc:
                raise SystemExit("%s: %s: %s" % (args.config, key, exc))
    for key in DEFAULTS:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            cfg[key] = flag_value
    if cfg["crdc"] not in ("rmv_win", "add_win", "both"):
        raise SystemExit("invalid crdc %r" % cfg["crdc"])
    if cfg["pattern"] not in MIXES:
        raise SystemExit("invalid pattern %r" % cfg["pattern"])
    for key in ("ops", "dcs", "replicas_per_dc", "trials"):
        if int(cfg[key]) < 1:
            raise SystemExit("%s must be >= 1" % key)
    if cfg["rate"] <= 0:
        raise SystemExit("rate must be > 0")
    return cfg


def _sweep_points(cfg):
    """Yield (sweep_value, per-point overrides) pairs.

    The replica sweep models each replica serving its own clients: the
    per-replica issue rate stays at the configured base, so the total
    rate scales with the replica count.
    """
    if not cfg["sweep"]:
        yield ("default", {})
        return
    knob, values = cfg["sweep"]
    for v in values:
        if knob == "rate":
            yield (v, {"rate": v})
        elif knob == "replicas_per_dc":
            yield (v, {"replicas_per_dc": int(v),
                       "rate": cfg["rate"] * v / cfg["replicas_per_dc"]})
        else:  # delay: value d is the inter-DC mean; the rest scale with it
            yield (v, {"inter_delay": (v, v / 5.0),
                       "intra_delay": (v / 5.0, v / 25.0)})


def _header_lines(cfg):
    ordered = ["crdc", "pattern", "rate", "ops", "dcs", "replicas_per_dc",
               "inter_delay", "intra_delay", "trials", "seed", "sweep"]
    lines = ["# config: " + " ".join("%s=%s" % (k, cfg[k]) for k in ordered)]
    lines.append("# scale_factor: %.6g of the %d-op reference run"
                 % (cfg["ops"] / REFERENCE_OPS, REFERENCE_OPS))
    return lines


class _Writer:
    """CSV writer with shared '#' header comments."""

    def __init__(self, path, header_lines, columns):
        self._fh = open(path, "w", newline="")
        for line in header_lines:
            self._fh.write(line + "\n")
        self._csv = csv.writer(self._fh)
        self._csv.writerow(columns)

    def row(self, values):
        self._csv.writerow(values)

    def close(self):
        self._fh.close()


def run_experiments(cfg) -> int:
    os.makedirs(cfg["out"], exist_ok=True)
    header = _header_lines(cfg)
    systems = list(SYSTEMS) if cfg["crdc"] == "both" else [cfg["crdc"]]

    trials_w = _Writer(
        os.path.join(cfg["out"], "trials.csv"), header,
        ["sweep_value", "system", "trial", "seed", "x_bar", "f",
         "probes_scored", "probes_empty", "probes_rejected", "rejected_ops",
         "final_overhead_per_element"])
    summary_w = _Writer(
        os.path.join(cfg["out"], "summary.csv"), header,
        ["sweep_value", "system", "trials", "x_bar_mean", "f_mean",
         "final_overhead_mean"])
    overhead_w = _Writer(
        os.path.join(cfg["out"], "overhead.csv"), header,
        ["sweep_value", "system", "t_ms", "overhead_per_element",
         "metadata_units", "elements"])
    probes_w = _Writer(
        os.path.join(cfg["out"], "probes.csv"), header,
        ["sweep_value", "system", "probe_index", "replica",
         "returned_pri", "true_pri", "abs_err"])

    try:
        for sweep_value, overrides in _sweep_points(cfg):
            point = dict(cfg)
            point.update(overrides)
            wl = WorkloadConfig(pattern=point["pattern"],
                                total_ops=int(point["ops"]),
                                rate=float(point["rate"]))
            delay = DelayModel(inter_dc=point["inter_delay"],
                               intra_dc=point["intra_delay"])
            for system in systems:
                results = []
                for i in range(int(point["trials"])):
                    wl_i = WorkloadConfig(
                        pattern=wl.pattern, total_ops=wl.total_ops,
                        rate=wl.rate, seed=int(point["seed"]) + i)
                    res = run_trial(system, wl_i, int(point["dcs"]),
                                    int(point["replicas_per_dc"]), delay,
                                    seed=int(point["seed"]) + i,
                                    keep_log=(i == 0))
                    results.append(res)
                    trials_w.row([sweep_value, system, i, res.seed,
                                  "%.6f" % res.report.x_bar,
                                  "%.6f" % res.report.f,
                                  res.report.probes_scored,
                                  res.report.probes_empty,
                                  res.report.probes_rejected,
                                  res.report.rejected_ops,
                                  "%.6f" % res.final_overhead])
                n = len(results)
                summary_w.row([sweep_value, system, n,
                               "%.6f" % (sum(r.report.x_bar for r in results) / n),
                               "%.6f" % (sum(r.report.f for r in results) / n),
                               "%.6f" % (sum(r.final_overhead for r in results) / n)])
                first = results[0]
                for s in first.overhead:
                    overhead_w.row([sweep_value, system, "%.3f" % s.t_ms,
                                    "%.6f" % s.overhead_per_element,
                                    s.metadata_units, s.elements])
                truths = replay_oracle(first.log)
                for j, (probe, truth) in enumerate(
                        zip(first.log.probes(), truths)):
                    returned = probe.result[1] if probe.result else ""
                    true_pri = truth[1] if truth else ""
                    err = (abs(returned - true_pri)
                           if probe.result and truth else "")
                    probes_w.row([sweep_value, system, j, probe.replica,
                                  returned, true_pri, err])
                print("sweep=%s system=%s trials=%d x_bar=%.4f f=%.4f"
                      % (sweep_value, system, n,
                         sum(r.report.x_bar for r in results) / n,
                         sum(r.report.f for r in results) / n))
    finally:
        for w in (trials_w, summary_w, overhead_w, probes_w):
            w.close()
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.figures:
        for name in figures.verify_all():
            print("scenario %s: ok" % name)
        return 0
    cfg = resolve_config(args)
    try:
        return run_experiments(cfg)
    except (AssertionError, RuntimeError) as exc:
        print("fatal: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
