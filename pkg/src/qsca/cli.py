"""Batch front-end: generate, schedule, trace, attack, defend, benchmark.

Every verb is deterministic under fixed seeds. Exit codes: 0 success,
1 domain error (one diagnostic line on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import devicegen
from .attacks import (
    CandidateEntry,
    CandidateList,
    ReconstructionParams,
    distinguishability,
    identify_uc,
    reconstruct,
    uc_accuracy,
)
from .circuit import Circuit, apply_layout, enumerate_layouts, format_circuit, parse_circuit
from .defense import substitute
from .device import BasisPulseLibrary, Device
from .devicegen import TopologyShape, gen_device, gen_random_circuit, gen_textbook
from .errors import QscaError
from .metrics import MetricKind, circuit_dist
from .scheduler import Schedule, schedule, schedule_span
from .tracegen import (
    add_noise,
    per_channel_power,
    read_trace_csv,
    read_traces_json,
    scalar_stats,
    total_power,
    write_trace_csv,
    write_traces_json,
)

_SHAPES = {"line": TopologyShape.LINE, "t": TopologyShape.TSHAPE, "h": TopologyShape.HSHAPE}


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_device_library(args) -> tuple[Device, BasisPulseLibrary]:
    device = Device.load(args.device)
    lib = BasisPulseLibrary.load(args.library)
    return device, lib


def _read_circuit(path) -> Circuit:
    path = Path(path)
    if not path.exists():
        raise QscaError(f"circuit file {path} does not exist")
    if path.suffix == ".json":
        return Circuit.load(path)
    return parse_circuit(path.read_text(), name=path.stem)


def _cmd_gen_device(args) -> int:
    out = _out_dir(args)
    device, lib = gen_device(_SHAPES[args.shape], args.qubits, args.seed)
    device.save(out / "device.json")
    lib.save(out / "library.json")
    return 0


def _cmd_gen_circuit(args) -> int:
    out = _out_dir(args)
    if args.algo == "random":
        device = Device.load(args.device)
        c = gen_random_circuit(device, args.gates, args.seed, args.rz_fraction)
    else:
        c = gen_textbook(args.algo, args.n, args.param)
    name = args.name or c.name or "circuit"
    (out / f"{name}.qc").write_text(format_circuit(c))
    return 0


def _cmd_schedule(args) -> int:
    out = _out_dir(args)
    device, lib = _load_device_library(args)
    c = _read_circuit(args.circuit)
    if args.layout:
        layout = {i: phys for i, phys in enumerate(json.loads(args.layout))}
        c = apply_layout(c, layout, device)
    s = schedule(c, lib, device)
    s.save(out / "sched.json")
    return 0


def _cmd_trace(args) -> int:
    out = _out_dir(args)
    device, lib = _load_device_library(args)
    s = Schedule.load(args.sched, device)
    per_channel = per_channel_power(s)
    total = total_power(s)
    if args.noise_sigma > 0:
        per_channel = {
            ch: add_noise(tr, args.noise_sigma, args.seed + i)
            for i, (ch, tr) in enumerate(per_channel.items())
        }
        total = add_noise(total, args.noise_sigma, args.seed + len(per_channel))
    write_trace_csv(total, out / "trace.csv")
    write_traces_json(per_channel, out / "traces.json")
    stats = scalar_stats(total) if len(total) else None
    summary = {
        "span": schedule_span(s),
        "energy": stats.energy if stats else 0.0,
        "mean_power": stats.mean_power if stats else 0.0,
        "duration": len(total),
    }
    (out / "stats.json").write_text(json.dumps(summary, indent=2) + "\n")
    return 0


def _candidate_entries(device, lib, circuits) -> CandidateList:
    entries = []
    for cid, circ in circuits:
        s = schedule(circ, lib, device)
        tr = total_power(s)
        entries.append(
            CandidateEntry(
                id=cid, circuit=circ, schedule=s, trace=tr, stats=scalar_stats(tr)
            )
        )
    return CandidateList(entries)


def _load_candidates(args, device, lib) -> CandidateList:
    paths = sorted(Path(args.circuits).glob("*.qc"))
    if not paths:
        raise QscaError(f"no .qc circuits under {args.circuits}")
    return _candidate_entries(device, lib, [(p.stem, _read_circuit(p)) for p in paths])


def _cmd_attack_uc(args) -> int:
    out = _out_dir(args)
    device, lib = _load_device_library(args)
    candidates = _load_candidates(args, device, lib)
    metric = MetricKind(args.metric)

    def quantity(entry):
        if metric is MetricKind.TRACE:
            return entry.trace
        return getattr(entry.stats, metric.value)

    def dist_to(measured, entry):
        if metric is MetricKind.TRACE:
            return circuit_dist(measured, entry.trace)
        return abs(float(measured) - float(quantity(entry)))

    by_id = {e.id: e for e in candidates}
    rows = []
    if args.measured:
        measured_trace = read_trace_csv(args.measured)
        measured = (
            measured_trace
            if metric is MetricKind.TRACE
            else getattr(scalar_stats(measured_trace), metric.value)
        )
        best = identify_uc(measured, candidates, metric)
        rows.append([best, metric.value, repr(dist_to(measured, by_id[best])), ""])
    else:
        for entry in candidates:
            own = quantity(entry)
            got = identify_uc(own, candidates, metric)
            rows.append(
                [
                    entry.id,
                    metric.value,
                    repr(dist_to(own, by_id[got])),
                    "yes" if got == entry.id else "no",
                ]
            )
        rows.append(["accuracy", metric.value, repr(uc_accuracy(candidates, metric)), ""])

    with open(out / "uc_report.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", "metric", "distance", "correct"])
        w.writerows(rows)
    return 0


def _cmd_distinguish(args) -> int:
    out = _out_dir(args)
    device, lib = _load_device_library(args)
    candidates = _load_candidates(args, device, lib)
    value = distinguishability(candidates)
    with open(out / "distances.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["scenario", "label", "min_norm_dist"])
        w.writerow(["set", Path(args.circuits).name, repr(value)])
    sys.stdout.write(f"{value!r}\n")
    return 0


def _cmd_attack_rp(args) -> int:
    out = _out_dir(args)
    device, lib = _load_device_library(args)
    traces_path = Path(args.traces)
    if traces_path.is_dir():
        traces_path = traces_path / "traces.json"
    traces = read_traces_json(traces_path)
    boundary = (
        (args.boundary_hi, args.boundary_lo)
        if args.boundary_hi is not None
        else args.boundary
    )
    params = ReconstructionParams(
        boundary=boundary,
        tolerance=args.tolerance,
        smooth_window=args.smooth_window,
        merge_gap=args.merge_gap,
        min_run=args.min_run,
        control_boundary=args.control_boundary,
    )
    rec = reconstruct(traces, lib, device, params)
    rec.save(out / "recon.json")
    return 0


def _cmd_defend(args) -> int:
    out = _out_dir(args)
    c = _read_circuit(args.circuit)
    defended = substitute(c, args.prob, args.seed)
    name = (c.name or "circuit") + "_defended"
    (out / f"{name}.qc").write_text(format_circuit(defended))
    return 0


# ---------------------------------------------------------------------------
# bench


def _legal_layouts(circ: Circuit, device: Device, count: int, seed: int) -> list[dict]:
    """Seeded sample of connectivity-preserving layouts (routing is out of
    scope, so layouts breaking a cx edge are skipped)."""
    picked = []
    for layout in enumerate_layouts(circ.num_qubits, device, limit=10**9, seed=seed):
        try:
            apply_layout(circ, layout, device)
        except QscaError:
            continue
        picked.append(layout)
    if not picked:
        raise QscaError(f"no legal layouts for {circ.name} on {device.name}")
    if count >= len(picked):
        return picked
    rng = np.random.default_rng(seed)
    idx = rng.permutation(len(picked))[:count]
    return [picked[i] for i in sorted(idx)]


def _bench_trace_job(payload):
    device, lib, cid, circ = payload
    s = schedule(circ, lib, device)
    tr = total_power(s)
    return CandidateEntry(id=cid, circuit=circ, schedule=s, trace=tr, stats=scalar_stats(tr))


def _bench_entries(device, lib, jobs) -> list[CandidateEntry]:
    workers = int(os.environ.get("QSCA_WORKERS", "1"))
    payloads = [(device, lib, cid, circ) for cid, circ in jobs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_bench_trace_job, payloads, chunksize=8))
    return [_bench_trace_job(p) for p in payloads]


def bench_corpus(config: dict, device: Device) -> tuple[list[Circuit], list[list[dict]]]:
    """Seeded base circuits plus their legal layout expansions for bench runs."""
    corpus_cfg = config.get("corpus", {})
    size = corpus_cfg.get("size", 30)
    gate_lo, gate_hi = corpus_cfg.get("gates", [5, 20])
    seed = corpus_cfg.get("seed", 1)
    rz_fraction = corpus_cfg.get("rz_fraction", 0.0)
    logical_lo, logical_hi = corpus_cfg.get("logical_qubits", [2, 3])
    cx_free_fraction = corpus_cfg.get("cx_free_fraction", 0.5)

    rng = np.random.default_rng(seed)
    base: list[Circuit] = []
    for i in range(size):
        n_logical = int(rng.integers(logical_lo, logical_hi + 1))
        line = Device(
            name="logical_line",
            num_qubits=n_logical,
            edges=devicegen.topology_edges(TopologyShape.LINE, n_logical) if n_logical >= 2 else (),
        )
        c = gen_random_circuit(
            line,
            int(rng.integers(gate_lo, gate_hi + 1)),
            seed=seed * 1000 + i,
            rz_fraction=rz_fraction,
        )
        if rng.random() < cx_free_fraction:
            # single-qubit-only circuits collide heavily on duration while
            # their traces stay distinct; keeps the duration-vs-trace gap visible
            ops = tuple(
                op if op.gate != "cx" else type(op)("x", (op.qubits[0],)) for op in c.ops
            )
            c = Circuit(c.num_qubits, ops, name=c.name)
        base.append(Circuit(c.num_qubits, c.ops, name=f"c{i:03d}"))

    layout_counts = config.get("layout_counts", [1, 2, 4, 8, 16, 32])
    layout_seed = config.get("layout_seed", 11)
    max_count = max(layout_counts)
    layouts_per_circuit = [
        _legal_layouts(c, device, max_count, layout_seed + i) for i, c in enumerate(base)
    ]
    return base, layouts_per_circuit


def run_bench(config: dict, out: Path) -> None:
    """Layout-expanded UC accuracy plus per-scenario distinguishability tables."""
    dev_cfg = config.get("device", {})
    device, lib = gen_device(
        _SHAPES[dev_cfg.get("shape", "h")],
        dev_cfg.get("qubits", 7),
        dev_cfg.get("seed", 0),
    )
    base, layouts_per_circuit = bench_corpus(config, device)
    layout_counts = config.get("layout_counts", [1, 2, 4, 8, 16, 32])
    layout_seed = config.get("layout_seed", 11)
    metrics = [MetricKind(m) for m in config.get("metrics", [m.value for m in MetricKind])]

    accuracy_rows = []
    for count in layout_counts:
        jobs = []
        for i, c in enumerate(base):
            for li, layout in enumerate(layouts_per_circuit[i][:count]):
                jobs.append((f"{c.name}/L{li}", apply_layout(c, layout, device)))
        entries = _bench_entries(device, lib, jobs)
        candidates = CandidateList(entries)
        for metric in metrics:
            accuracy_rows.append([count, metric.value, repr(uc_accuracy(candidates, metric))])

    with open(out / "accuracy.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["layouts", "metric", "accuracy"])
        w.writerows(accuracy_rows)

    distance_rows = []
    scen_cfg = config.get("scenarios", {})

    co_cfg = scen_cfg.get("co", {"algos": ["bv", "dj", "gs"], "n": [1, 2, 3]})
    for algo in co_cfg.get("algos", []):
        for n in co_cfg.get("n", []):
            if algo == "bv":
                co_dev, co_lib = devicegen.star_device(n, seed=0)
            else:
                nq = max(n, 2)
                co_dev, co_lib = gen_device(TopologyShape.LINE, nq, 0)
            params = range(1, 1 << n) if algo == "dj" else range(1 << n)
            jobs = []
            for p in params:
                c = gen_textbook(algo, n, p)
                layout = {q: q for q in range(c.num_qubits)}
                jobs.append((c.name, apply_layout(c, layout, co_dev)))
            entries = _bench_entries(co_dev, co_lib, jobs)
            if len(entries) >= 2:
                value = distinguishability(CandidateList(entries))
                distance_rows.append(["co", f"{algo}/n{n}", repr(value)])

    ca_cfg = scen_cfg.get("ca", {"structures": 4, "gates": 24, "qubits": 3})
    n_struct = ca_cfg.get("structures", 4)
    ca_line, ca_lib_unused = gen_device(TopologyShape.LINE, ca_cfg.get("qubits", 3), 0)
    ansatz_jobs = []
    for k in range(n_struct):
        c = gen_random_circuit(ca_line, ca_cfg.get("gates", 24), seed=900 + k, rz_fraction=0.3)
        layout = {q: q for q in range(c.num_qubits)}
        ansatz_jobs.append((f"ansatz{k}", apply_layout(c, layout, ca_line)))
    ca_entries = _bench_entries(ca_line, ca_lib_unused, ansatz_jobs)
    if len(ca_entries) >= 2:
        distance_rows.append(["ca", f"{n_struct}-structures", repr(distinguishability(CandidateList(ca_entries)))])

    qm_cfg = scen_cfg.get("qm", {"circuit_gates": 16, "layouts": 6})
    qm_circ = gen_random_circuit(
        Device(name="l2", num_qubits=2, edges=((0, 1), (1, 0))),
        qm_cfg.get("circuit_gates", 16),
        seed=77,
    )
    qm_layouts = _legal_layouts(qm_circ, device, qm_cfg.get("layouts", 6), layout_seed)
    qm_jobs = [
        (f"qm/L{i}", apply_layout(qm_circ, layout, device))
        for i, layout in enumerate(qm_layouts)
    ]
    qm_entries = _bench_entries(device, lib, qm_jobs)
    if len(qm_entries) >= 2:
        distance_rows.append(["qm", qm_circ.name, repr(distinguishability(CandidateList(qm_entries)))])

    qp_cfg = scen_cfg.get("qp", {"devices": 3, "circuit_gates": 16})
    qp_entries = []
    for k in range(qp_cfg.get("devices", 3)):
        qp_dev, qp_lib = gen_device(
            _SHAPES[dev_cfg.get("shape", "h")], dev_cfg.get("qubits", 7), seed=100 + k
        )
        circ = gen_random_circuit(qp_dev, qp_cfg.get("circuit_gates", 16), seed=88)
        qp_entries += _bench_entries(qp_dev, qp_lib, [(f"qp/dev{k}", circ)])
    if len(qp_entries) >= 2:
        distance_rows.append(["qp", f"{len(qp_entries)}-devices", repr(distinguishability(CandidateList(qp_entries)))])

    with open(out / "distances.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["scenario", "label", "min_norm_dist"])
        w.writerows(distance_rows)


def _cmd_bench(args) -> int:
    out = _out_dir(args)
    config = json.loads(Path(args.config).read_text()) if args.config else {}
    run_bench(config, out)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsca", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("gen-device", help="generate a synthetic device + library")
    p.add_argument("--shape", choices=sorted(_SHAPES), required=True)
    p.add_argument("--qubits", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_device)

    p = sub.add_parser("gen-circuit", help="generate a random or textbook circuit")
    p.add_argument("--algo", choices=["random", "bv", "dj", "gs"], default="random")
    p.add_argument("--device", help="device.json (random circuits)")
    p.add_argument("--gates", type=int, default=20)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--rz-fraction", type=float, default=0.0)
    p.add_argument("--n", type=int, default=2, help="textbook data qubits")
    p.add_argument("--param", type=int, default=0, help="textbook oracle parameter")
    p.add_argument("--name")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_circuit)

    p = sub.add_parser("schedule", help="lower a circuit to pulses")
    p.add_argument("--circuit", required=True)
    p.add_argument("--device", required=True)
    p.add_argument("--library", required=True)
    p.add_argument("--layout", help="JSON list: physical qubit per logical index")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_schedule)

    p = sub.add_parser("trace", help="synthesize power traces from a schedule")
    p.add_argument("--sched", required=True)
    p.add_argument("--device", required=True)
    p.add_argument("--library", required=True)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_trace)

    p = sub.add_parser("attack-uc", help="identify a circuit from a candidate list")
    p.add_argument("--device", required=True)
    p.add_argument("--library", required=True)
    p.add_argument("--circuits", required=True, help="directory of candidate .qc files")
    p.add_argument("--measured", help="trace.csv of the victim (self-test if omitted)")
    p.add_argument("--metric", choices=[m.value for m in MetricKind], default="trace")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_attack_uc)

    p = sub.add_parser("distinguish", help="min pairwise normalized distance of a set")
    p.add_argument("--device", required=True)
    p.add_argument("--library", required=True)
    p.add_argument("--circuits", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_distinguish)

    p = sub.add_parser("attack-rp", help="reconstruct a circuit from per-channel traces")
    p.add_argument("--device", required=True)
    p.add_argument("--library", required=True)
    p.add_argument("--traces", required=True, help="traces.json (or directory holding it)")
    p.add_argument("--boundary", type=float)
    p.add_argument("--boundary-hi", type=float, help="staged x threshold")
    p.add_argument("--boundary-lo", type=float, help="staged sx threshold")
    p.add_argument("--tolerance", type=int, default=2)
    p.add_argument("--smooth-window", type=int, default=1)
    p.add_argument("--merge-gap", type=int, default=0)
    p.add_argument("--min-run", type=int, default=0)
    p.add_argument("--control-boundary", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_attack_rp)

    p = sub.add_parser("defend", help="virtual-rz substitution pass")
    p.add_argument("--circuit", required=True)
    p.add_argument("--prob", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_defend)

    p = sub.add_parser("bench", help="layout-expanded accuracy and distance tables")
    p.add_argument("--config", help="bench config JSON")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verb == "attack-rp":
        staged = (args.boundary_hi is None) != (args.boundary_lo is None)
        if staged:
            parser.error("--boundary-hi and --boundary-lo must be given together")
        if args.boundary is None and args.boundary_hi is None:
            parser.error("need --boundary or --boundary-hi/--boundary-lo")
    try:
        return args.func(args)
    except QscaError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
