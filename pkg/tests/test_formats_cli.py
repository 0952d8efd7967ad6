import numpy as np
import pytest

from sinrsched import formats
from sinrsched.bridging import omega_bound
from sinrsched.cli import main
from sinrsched.power import power_ceiling
from sinrsched.separation import phi_star
from sinrsched.simulator import BacklogTrace, gen_random_topology

MINIMAL = """# two nodes, one link
nodes 2
links 1
r 1.0 5.0
N 0 0.0 0.0
N 1 3.0 4.0
L 7 0 1
"""


class TestTopologyFormat:
    def test_minimal(self):
        t = formats.parse_topology(MINIMAL)
        assert len(t.links) == 1 and t.links[0].id == 7 and t.links[0].length == 5.0

    def test_missing_node(self):
        with pytest.raises(formats.FormatError, match="line 7.*missing node 9"):
            formats.parse_topology(MINIMAL.replace("L 7 0 1", "L 7 0 9"))

    def test_duplicate_node(self):
        with pytest.raises(formats.FormatError, match="line 6: duplicate node id 0"):
            formats.parse_topology(MINIMAL.replace("N 1 3.0 4.0", "N 0 3.0 4.0"))

    def test_length_out_of_range(self):
        with pytest.raises(formats.FormatError, match="line 7.*outside"):
            formats.parse_topology(MINIMAL.replace("N 1 3.0 4.0", "N 1 30.0 4.0"))

    def test_header_count(self):
        with pytest.raises(formats.FormatError, match="line 2"):
            formats.parse_topology(MINIMAL.replace("nodes 2", "nodes 3"))

    def test_garbage(self):
        with pytest.raises(formats.FormatError, match="line 2"):
            formats.parse_topology("r 1 5\nQ 1 2\n")

    def test_round_trip(self):
        for seed in range(100):
            t = gen_random_topology(seed=seed)
            assert formats.parse_topology(formats.serialize_topology(t)) == t


class TestTraceFormat:
    def test_empty(self):
        tr = BacklogTrace(np.array([], dtype=np.int64), np.array([], dtype=np.int64), np.array([]))
        assert formats.serialize_trace(tr) == formats.TRACE_HEADER + "\n"

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        tr = BacklogTrace(rng.integers(0, 9999, 50), rng.integers(0, 5, 50), rng.uniform(0, 30, 50))
        text = formats.serialize_trace(tr)
        assert len(text.splitlines()) == 51
        back = formats.parse_trace(text)
        assert back.per_slot_total.sum() == tr.per_slot_total.sum()
        assert np.array_equal(back.max_power, tr.max_power)

    def test_bad_header(self):
        with pytest.raises(formats.FormatError):
            formats.parse_trace("a,b,c\n")


class TestScheduleFormat:
    def test_round_trip(self):
        text = formats.serialize_schedule([3, 1], {3: 0.1 + 0.2, 1: 2.5})
        s = formats.parse_schedule(text)
        assert s.link_ids == [3, 1] and s.powers == {3: 0.1 + 0.2, 1: 2.5}

    def test_weights(self):
        assert formats.parse_weights("0 3\n# c\n1 2.5\n") == {0: 3.0, 1: 2.5}
        with pytest.raises(formats.FormatError, match="line 1"):
            formats.parse_weights("0\n")


@pytest.fixture
def topo_file(tmp_path):
    path = tmp_path / "topo.txt"
    assert main(["gen", "--seed", "2", "-o", str(path)]) == 0
    return path


class TestCli:
    def test_bounds(self, capsys):
        assert main(["bounds", "--sigma", "27", "--rmin", "1", "--rmax", "2"]) == 0
        out = dict(line.split(" ", 1) for line in capsys.readouterr().out.splitlines())
        assert int(out["omega"]) == omega_bound(27, 3, 2, 0.5) == 1052
        assert float(out["phi_star"]) == phi_star(27, 2, 3)
        assert float(out["power_ceiling"]) == power_ceiling(2, 27, 0.01, 1, 2, phi_star(27, 2, 3), 3)

    def test_gen_deterministic(self, tmp_path, topo_file):
        other = tmp_path / "again.txt"
        main(["gen", "--seed", "2", "-o", str(other)])
        assert other.read_bytes() == topo_file.read_bytes()

    def test_schedule_and_check(self, tmp_path, topo_file, capsys):
        topo = formats.parse_topology(topo_file.read_text())
        weights = tmp_path / "w.txt"
        weights.write_text("".join(f"{l.id} {10 + l.id}\n" for l in topo.links))
        for policy in ("alg2", "alg3", "greedy", "weight"):
            sched = tmp_path / f"{policy}.txt"
            args = ["schedule", "--policy", policy, "--topology", str(topo_file), "--weights", str(weights)]
            assert main(args + ["-o", str(sched)]) == 0
            assert main(["check", "--topology", str(topo_file), "--schedule", str(sched)]) == 0
        assert "feasible" in capsys.readouterr().out

    def test_check_infeasible(self, tmp_path, capsys):
        topo = tmp_path / "t.txt"
        topo.write_text(
            "r 1 5\nN 0 0 0\nN 1 1 0\nN 2 0 1.5\nN 3 1 1.5\nL 0 0 1\nL 1 2 3\n"
        )
        sched = tmp_path / "s.txt"
        sched.write_text("0\n1\nP 0 1.0\nP 1 1.0\n")
        assert main(["check", "--topology", str(topo), "--schedule", str(sched)]) == 1
        assert capsys.readouterr().out.strip() == "infeasible"

    def test_check_needs_powers(self, tmp_path, topo_file):
        sched = tmp_path / "s.txt"
        sched.write_text("0\n")
        assert main(["check", "--topology", str(topo_file), "--schedule", str(sched)]) == 2
        assert main(["check", "--topology", str(topo_file), "--schedule", str(sched), "--power", "uniform"]) == 0

    def test_run_trace(self, tmp_path, topo_file):
        out = tmp_path / "trace.csv"
        args = ["run", "--topology", str(topo_file), "--lam", "0.1", "--horizon", "200", "-o", str(out)]
        assert main(args) == 0
        first = out.read_bytes()
        trace = formats.parse_trace(first.decode())
        assert len(trace) == 200
        assert main(args) == 0 and out.read_bytes() == first

    def test_sweep(self, capsys):
        args = ["sweep", "--policy", "alg3", "--horizon", "2000", "--grid", "0.0,0.9"]
        assert main(args) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "lambda,verdict,slope,mean_backlog,final_backlog"
        assert lines[-1] == "capacity 0.0"

    def test_unreadable_file(self, capsys):
        assert main(["check", "--topology", "/nonexistent", "--schedule", "/nonexistent"]) == 2
        assert "error" in capsys.readouterr().err

    def test_unknown_flag(self):
        with pytest.raises(SystemExit) as err:
            main(["bounds", "--bogus"])
        assert err.value.code != 0
