import csv
import json

import numpy as np
import pytest

from qsca.cli import main
from qsca.device import BasisPulseLibrary, Device, sample_envelope


def run(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def dev_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("dev")
    assert run("gen-device", "--shape", "h", "--qubits", "7", "--seed", "0", "--out", str(out)) == 0
    return out


class TestGenDevice:
    def test_writes_device_and_library(self, dev_dir):
        device = Device.load(dev_dir / "device.json")
        assert device.num_qubits == 7
        assert len(device.edges) == 12
        lib = BasisPulseLibrary.load(dev_dir / "library.json")
        assert lib.get("x", (0,)) is not None

    def test_deterministic_bytes(self, dev_dir, tmp_path):
        assert run("gen-device", "--shape", "h", "--qubits", "7", "--seed", "0", "--out", str(tmp_path)) == 0
        assert (tmp_path / "device.json").read_bytes() == (dev_dir / "device.json").read_bytes()
        assert (tmp_path / "library.json").read_bytes() == (dev_dir / "library.json").read_bytes()

    def test_usage_error_exit_2(self, capsys):
        with pytest.raises(SystemExit) as err:
            run("gen-device", "--shape", "q", "--qubits", "7", "--seed", "0", "--out", "x")
        assert err.value.code == 2


class TestPipeline:
    def test_schedule_trace_and_rp(self, dev_dir, tmp_path):
        circ_dir = tmp_path / "c"
        assert run(
            "gen-circuit", "--algo", "random", "--device", str(dev_dir / "device.json"),
            "--gates", "12", "--seed", "3", "--out", str(circ_dir), "--name", "victim",
        ) == 0
        qc = circ_dir / "victim.qc"
        assert qc.exists()

        sched_dir = tmp_path / "s"
        assert run(
            "schedule", "--circuit", str(qc), "--device", str(dev_dir / "device.json"),
            "--library", str(dev_dir / "library.json"), "--out", str(sched_dir),
        ) == 0
        sched = json.loads((sched_dir / "sched.json").read_text())
        assert sched["device"] == "synth_h7_s0"
        assert sched["items"]

        trace_dir = tmp_path / "t"
        assert run(
            "trace", "--sched", str(sched_dir / "sched.json"),
            "--device", str(dev_dir / "device.json"),
            "--library", str(dev_dir / "library.json"), "--out", str(trace_dir),
        ) == 0
        assert (trace_dir / "trace.csv").exists()
        assert (trace_dir / "traces.json").exists()

        lib = BasisPulseLibrary.load(dev_dir / "library.json")
        sx_min = min(
            float((sample_envelope(lib.get("sx", (q,)).pulses[0].shape).real ** 2
                   + sample_envelope(lib.get("sx", (q,)).pulses[0].shape).imag ** 2).max())
            for q in range(7)
        )
        rp_dir = tmp_path / "r"
        assert run(
            "attack-rp", "--device", str(dev_dir / "device.json"),
            "--library", str(dev_dir / "library.json"),
            "--traces", str(trace_dir),
            "--boundary", repr(0.5 * sx_min), "--tolerance", "2",
            "--out", str(rp_dir),
        ) == 0
        recon = json.loads((rp_dir / "recon.json").read_text())
        want = [
            (g["gate"], tuple(g["qubits"]), g["start"])
            for g in sched["gates"]
            if g["gate"] in ("x", "sx", "cx")
        ]
        got = [(g["gate"], tuple(g["qubits"]), g["start"]) for g in recon["gates"]]
        assert sorted(got) == sorted(want)

    def test_missing_circuit_is_domain_error(self, dev_dir, tmp_path, capsys):
        code = run(
            "schedule", "--circuit", str(tmp_path / "missing.qc"),
            "--device", str(dev_dir / "device.json"),
            "--library", str(dev_dir / "library.json"), "--out", str(tmp_path),
        )
        assert code == 1
        err = capsys.readouterr().err
        assert err.startswith("error:") and err.count("\n") == 1

    def test_attack_uc_self_report(self, dev_dir, tmp_path):
        circ_dir = tmp_path / "cands"
        for seed in range(4):
            assert run(
                "gen-circuit", "--algo", "random", "--device", str(dev_dir / "device.json"),
                "--gates", "10", "--seed", str(seed), "--out", str(circ_dir),
                "--name", f"cand{seed}",
            ) == 0
        out = tmp_path / "uc"
        assert run(
            "attack-uc", "--device", str(dev_dir / "device.json"),
            "--library", str(dev_dir / "library.json"),
            "--circuits", str(circ_dir), "--metric", "trace", "--out", str(out),
        ) == 0
        with open(out / "uc_report.csv") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["id", "metric", "distance", "correct"]
        body = rows[1:-1]
        assert all(r[3] == "yes" and float(r[2]) == 0.0 for r in body)
        assert rows[-1][0] == "accuracy"
        assert float(rows[-1][2]) == 1.0

    def test_distinguish(self, dev_dir, tmp_path, capsys):
        circ_dir = tmp_path / "set"
        for seed in (11, 12):
            assert run(
                "gen-circuit", "--algo", "random", "--device", str(dev_dir / "device.json"),
                "--gates", "8", "--seed", str(seed), "--out", str(circ_dir),
                "--name", f"v{seed}",
            ) == 0
        out = tmp_path / "d"
        assert run(
            "distinguish", "--device", str(dev_dir / "device.json"),
            "--library", str(dev_dir / "library.json"),
            "--circuits", str(circ_dir), "--out", str(out),
        ) == 0
        value = float(capsys.readouterr().out.strip())
        assert value > 0

    def test_defend_round_trip(self, dev_dir, tmp_path):
        circ_dir = tmp_path / "c2"
        assert run(
            "gen-circuit", "--algo", "random", "--device", str(dev_dir / "device.json"),
            "--gates", "10", "--seed", "5", "--out", str(circ_dir), "--name", "orig",
        ) == 0
        out = tmp_path / "def"
        assert run(
            "defend", "--circuit", str(circ_dir / "orig.qc"),
            "--prob", "1.0", "--seed", "0", "--out", str(out),
        ) == 0
        from qsca.circuit import parse_circuit
        from qsca.defense import equivalent_up_to_phase

        orig = parse_circuit((circ_dir / "orig.qc").read_text())
        defended = parse_circuit((out / "orig_defended.qc").read_text())
        assert equivalent_up_to_phase(orig, defended)

    def test_gen_textbook_circuit(self, tmp_path):
        out = tmp_path / "tb"
        assert run(
            "gen-circuit", "--algo", "bv", "--n", "3", "--param", "5",
            "--seed", "0", "--out", str(out),
        ) == 0
        assert (out / "bv3_101.qc").exists()


class TestBench:
    def test_bench_outputs_and_determinism(self, tmp_path):
        config = {
            "device": {"shape": "h", "qubits": 7, "seed": 0},
            "corpus": {"size": 6, "gates": [4, 10], "seed": 1, "logical_qubits": [2, 3]},
            "layout_counts": [1, 2, 4],
            "metrics": ["trace", "duration"],
            "scenarios": {
                "co": {"algos": ["bv", "dj"], "n": [1, 2]},
                "ca": {"structures": 3, "gates": 12, "qubits": 3},
                "qm": {"circuit_gates": 8, "layouts": 4},
                "qp": {"devices": 2, "circuit_gates": 8},
            },
        }
        cfg = tmp_path / "bench.json"
        cfg.write_text(json.dumps(config))
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        assert run("bench", "--config", str(cfg), "--out", str(out_a)) == 0
        assert run("bench", "--config", str(cfg), "--out", str(out_b)) == 0
        assert (out_a / "accuracy.csv").read_bytes() == (out_b / "accuracy.csv").read_bytes()
        assert (out_a / "distances.csv").read_bytes() == (out_b / "distances.csv").read_bytes()

        with open(out_a / "accuracy.csv") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["layouts", "metric", "accuracy"]
        by_key = {(int(r[0]), r[1]): float(r[2]) for r in rows[1:]}
        for count in (1, 2, 4):
            assert by_key[(count, "duration")] <= by_key[(count, "trace")]

        with open(out_a / "distances.csv") as f:
            drows = list(csv.reader(f))
        scenarios = {r[0] for r in drows[1:]}
        assert {"co", "ca", "qm", "qp"} <= scenarios
        dj = [r for r in drows if r[0] == "co" and r[1].startswith("dj")]
        assert all(float(r[2]) == 0.0 for r in dj)
        bv = [r for r in drows if r[0] == "co" and r[1].startswith("bv")]
        assert all(float(r[2]) > 0.0 for r in bv)

    def test_bench_accuracy_matches_brute_force(self, tmp_path):
        """bench's accuracy values equal an independent recomputation on a
        small (<= 64 candidates) corpus."""
        from qsca.attacks import CandidateEntry
        from qsca.circuit import apply_layout
        from qsca.cli import bench_corpus, run_bench
        from qsca.devicegen import TopologyShape, gen_device
        from qsca.metrics import MetricKind, circuit_dist
        from qsca.scheduler import schedule
        from qsca.tracegen import scalar_stats, total_power

        config = {
            "device": {"shape": "h", "qubits": 7, "seed": 0},
            "corpus": {"size": 8, "gates": [4, 10], "seed": 2, "logical_qubits": [2, 3]},
            "layout_counts": [1, 4],
            "metrics": ["trace", "energy", "mean_power", "duration"],
            "scenarios": {"co": {"algos": [], "n": []}},
        }
        run_bench(config, tmp_path)
        with open(tmp_path / "accuracy.csv") as f:
            rows = list(csv.reader(f))[1:]
        reported = {(int(r[0]), r[1]): float(r[2]) for r in rows}

        device, lib = gen_device(TopologyShape.HSHAPE, 7, 0)
        base, layouts = bench_corpus(config, device)
        for count in (1, 4):
            entries = []
            for i, c in enumerate(base):
                for li, layout in enumerate(layouts[i][:count]):
                    s = schedule(apply_layout(c, layout, device), lib, device)
                    tr = total_power(s)
                    entries.append(
                        CandidateEntry(
                            id=f"{c.name}/L{li}", circuit=c, schedule=s,
                            trace=tr, stats=scalar_stats(tr),
                        )
                    )
            assert len(entries) <= 64
            for metric in MetricKind:
                def q(e):
                    if metric is MetricKind.TRACE:
                        return e.trace
                    return getattr(e.stats, metric.value)

                n = len(entries)
                dmat = np.zeros((n, n))
                for i, a in enumerate(entries):
                    for j, b in enumerate(entries):
                        dmat[i, j] = (
                            circuit_dist(q(a), q(b))
                            if metric is MetricKind.TRACE
                            else abs(q(a) - q(b))
                        )
                brute = sum(1 for i in range(n) if int(np.argmin(dmat[i])) == i) / n
                assert reported[(count, metric.value)] == brute

    def test_bench_workers_env_is_deterministic(self, tmp_path, monkeypatch):
        config = {
            "device": {"shape": "line", "qubits": 3, "seed": 0},
            "corpus": {"size": 4, "gates": [3, 6], "seed": 5, "logical_qubits": [2, 2]},
            "layout_counts": [1, 2],
            "metrics": ["trace"],
            "scenarios": {"co": {"algos": [], "n": []}},
        }
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(config))
        out_seq = tmp_path / "seq"
        assert run("bench", "--config", str(cfg), "--out", str(out_seq)) == 0
        monkeypatch.setenv("QSCA_WORKERS", "2")
        out_par = tmp_path / "par"
        assert run("bench", "--config", str(cfg), "--out", str(out_par)) == 0
        assert (out_seq / "accuracy.csv").read_bytes() == (out_par / "accuracy.csv").read_bytes()
        assert (out_seq / "distances.csv").read_bytes() == (out_par / "distances.csv").read_bytes()
