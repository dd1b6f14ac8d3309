import json
import math

import numpy as np
import pytest

from scatent import cli
from scatent.angular import HalfInt
from scatent.entanglement import eoe
from scatent.hilbert import StateVector, state_to_json
from scatent.partialwave import ChannelSpaceSpec, build_space
from scatent.spinmodel import ChannelPhases, InStateParams, eoe_closed_form, out_state

PI = math.pi


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("text,expected", [
    ("pi", PI), ("pi/4", PI / 4), ("-pi/4", -PI / 4), ("3pi/4", 3 * PI / 4),
    ("3*pi/4", 3 * PI / 4), ("0.5", 0.5), ("2 * pi", 2 * PI), ("π/2", PI / 2),
])
def test_parse_angle(text, expected):
    assert cli.parse_angle(text) == pytest.approx(expected, abs=1e-15)


def test_parse_angle_degrees():
    assert cli.parse_angle("45", degrees=True) == pytest.approx(PI / 4)
    assert cli.parse_angle("pi/4", degrees=True) == pytest.approx(PI / 4)
    with pytest.raises(cli.InputError):
        cli.parse_angle("quarter")


class TestEoe:
    def test_perfect(self, capsys):
        code, out, _ = run(capsys, "eoe", "--theta", "pi", "--delta0", "pi/4", "--delta1", "0")
        assert code == 0
        closed, oracle, diff = out.splitlines()[1].split(",")
        assert closed == "1.000000" and oracle == "1.000000" and float(diff) < 1e-10

    def test_theta_zero(self, capsys):
        code, out, _ = run(capsys, "eoe", "--theta", "0", "--delta0", "pi/4")
        assert out.splitlines()[1].startswith("0.000000,0.000000")

    def test_spot_value(self, capsys):
        code, out, _ = run(capsys, "eoe", "--theta", "pi/2", "--delta0", "pi/4", "--format", "json")
        data = json.loads(out)
        assert data["eoe_closed_form"] == pytest.approx(0.354579, abs=1e-6)
        assert data["abs_diff"] < 1e-10

    def test_bit_identical_with_library(self, capsys):
        _, out, _ = run(capsys, "eoe", "--theta", "1.1", "--phi", "0.4", "--delta0", "0.3",
                        "--delta1", "1.2", "--format", "json")
        data = json.loads(out)
        ph = ChannelPhases.spin_half(0.3, 1.2)
        assert data["eoe_closed_form"] == eoe_closed_form(1.1, ph.delta_delta)
        assert data["eoe_schmidt"] == eoe(out_state(InStateParams(1.1, 0.4), ph), {"spin_A"})

    def test_degrees(self, capsys):
        _, out, _ = run(capsys, "eoe", "--degrees", "--theta", "180", "--delta0", "45", "--format", "json")
        assert json.loads(out)["eoe_closed_form"] == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("argv,needle", [
        (["--theta", "4"], "theta"),
        (["--theta=-pi/4"], "theta"),
        (["--phi", "13"], "phi"),
        (["--theta", "abc"], "angle"),
    ])
    def test_invalid(self, capsys, argv, needle):
        code, _, err = run(capsys, "eoe", *argv)
        assert code == 2 and needle in err


class TestOutState:
    def test_perfect_entangler(self, capsys):
        _, out, _ = run(capsys, "out-state", "--theta", "pi", "--delta0", "pi/4")
        data = json.loads(out)
        amps = np.array([complex(*a) for a in data["amps"]])
        target = np.array([0, 1, -1j, 0]) / math.sqrt(2)
        assert abs(abs(np.vdot(target, amps)) - 1) < 1e-12
        assert [f["name"] for f in data["factors"]] == ["spin_A", "spin_B"]

    def test_theta_zero(self, capsys):
        _, out, _ = run(capsys, "out-state", "--delta0", "0.4", "--delta1", "0.9")
        amps = np.array([complex(*a) for a in json.loads(out)["amps"]])
        np.testing.assert_allclose(amps, [np.exp(1.8j), 0, 0, 0], atol=1e-15)

    def test_half_pi_eighth(self, capsys):
        _, out, _ = run(capsys, "out-state", "--theta", "pi/2", "--delta0", "pi/8")
        amps = np.array([complex(*a) for a in json.loads(out)["amps"]])
        e = np.exp(1j * PI / 4)
        np.testing.assert_allclose(amps, [1 / math.sqrt(2), (1 + e) / (2 * math.sqrt(2)),
                                          (1 - e) / (2 * math.sqrt(2)), 0], atol=1e-15)


class TestScan:
    def test_default_grid(self, capsys, tmp_path):
        path = tmp_path / "scan.csv"
        code, out, _ = run(capsys, "scan", "-o", str(path))
        assert code == 0
        lines = path.read_text().splitlines()
        assert len(lines) == 65341 + 1
        assert "max_eoe=1.000000" in out
        assert "theta=3.14159 delta_delta=-0.785398; theta=3.14159 delta_delta=0.785398" in out

    def test_zero_dd(self, capsys):
        code, out, _ = run(capsys, "scan", "--dd-steps", "1", "--dd", "0", "--theta-steps", "7", "--phi-steps", "3")
        rows = out.splitlines()[1:]
        assert len(rows) == 21 and all(r.endswith(",0") for r in rows)

    def test_workers_byte_identical(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(capsys, "scan", "--theta-steps", "37", "--phi-steps", "2", "-o", str(a))
        run(capsys, "scan", "--theta-steps", "37", "--phi-steps", "2", "--workers", "4", "-o", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_json(self, capsys, tmp_path):
        path = tmp_path / "scan.json"
        run(capsys, "scan", "--theta-steps", "3", "--dd-steps", "9", "--format", "json", "-o", str(path))
        rows = json.loads(path.read_text())
        assert len(rows) == 27 and set(rows[0]) == {"theta_rad", "phi_rad", "delta_delta_rad", "eoe_bits"}

    def test_unwritable(self, capsys, tmp_path):
        code, _, err = run(capsys, "scan", "--theta-steps", "2", "-o", str(tmp_path / "nope" / "x.csv"))
        assert code == 2 and "cannot write" in err

    def test_bad_steps(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["scan", "--theta-steps", "0"])
        assert exc.value.code == 2


def test_perfect(capsys):
    code, out, _ = run(capsys, "perfect", "--format", "json")
    rows = json.loads(out)
    assert code == 0
    assert sorted({round(r["canonical_delta_delta_rad"], 12) for r in rows}) == [round(-PI / 4, 12), round(PI / 4, 12)]


def test_cg_table(capsys):
    _, out, _ = run(capsys, "cg-table", "--j1", "1", "--j2", "1")
    rows = [line.split(",") for line in out.splitlines()[1:]]
    row = next(r for r in rows if r[1:6] == ["0", "1", "0", "0", "0"])
    assert row[6:8] == ["-1", "1/3"]
    assert len(rows) == 18  # <1 0 1 0|1 0> vanishes


def write_json(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def instate_file(tmp_path, spec, orbital_index, spins):
    factors = build_space(spec)
    o = np.zeros(factors[0].dim)
    o[orbital_index] = 1
    return write_json(tmp_path / "in.json", state_to_json(StateVector(factors, np.kron(o, spins))))


class TestPartialWave:
    def test_s_wave_perfect_entangler(self, capsys, tmp_path):
        cfg = write_json(tmp_path / "c.json", {"l_max": 0, "sA": "1/2", "sB": "1/2", "W": 1.0,
                                                "central": {"0,0": PI / 4, "0,1": 0}})
        spec = ChannelSpaceSpec(0, HalfInt(1), HalfInt(1))
        inp = instate_file(tmp_path, spec, 0, [0, 1, 0, 0])
        code, out, _ = run(capsys, "partial-wave", "--config", cfg, "--instate", inp,
                           "--cut", "spin_A", "--reduce", "0", "--format", "json")
        assert code == 0
        data = json.loads(out)
        assert data["reports"][0]["entropy_bits"] == pytest.approx(1.0, abs=1e-12)
        assert data["reduction"]["abs_diff"] == 0.0

    def test_zero_phases(self, capsys, tmp_path):
        cfg = write_json(tmp_path / "c.json", {"l_max": 1, "sA": "1/2", "sB": "1/2",
                                                "central": {f"{l},{s}": 0 for l in (0, 1) for s in (0, 1)}})
        spec = ChannelSpaceSpec(1, HalfInt(1), HalfInt(1))
        v = np.array([0.6, 0.8j])
        spins = np.kron(v, v[::-1].conj())
        inp = instate_file(tmp_path, spec, 2, spins)
        code, out, _ = run(capsys, "partial-wave", "--config", cfg, "--instate", inp)
        rows = out.splitlines()[1:]
        assert len(rows) == 3
        assert all(float(r.split(",")[1]) == 0 for r in rows)

    def test_l1_reduction(self, capsys, tmp_path, rng):
        central = {f"{l},{s}": float(rng.uniform(0, PI)) for l in (0, 1) for s in (0, 1)}
        cfg = write_json(tmp_path / "c.json", {"l_max": 1, "sA": "1/2", "sB": "1/2", "central": central})
        spec = ChannelSpaceSpec(1, HalfInt(1), HalfInt(1))
        a = rng.normal(size=2) + 1j * rng.normal(size=2)
        b = rng.normal(size=2) + 1j * rng.normal(size=2)
        inp = instate_file(tmp_path, spec, 1, np.kron(a / np.linalg.norm(a), b / np.linalg.norm(b)))
        code, out, _ = run(capsys, "partial-wave", "--config", cfg, "--instate", inp,
                           "--reduce", "1", "--format", "json")
        red = json.loads(out)["reduction"]
        assert code == 0 and red["abs_diff"] < 1e-12 and red["reduced_spin_eoe"] > 0

    def test_blocks_config(self, capsys, tmp_path):
        cfg = write_json(tmp_path / "c.json", {"l_max": 0, "sA": "1/2", "sB": "1/2",
                                                "blocks": {"0": [[[0, 1]]], "1": [[1]]}})
        inp = instate_file(tmp_path, ChannelSpaceSpec(0, HalfInt(1), HalfInt(1)), 0, [0, 1, 0, 0])
        code, out, _ = run(capsys, "partial-wave", "--config", cfg, "--instate", inp,
                           "--cut", "spin_A", "--format", "json")
        # blocks e^{2i delta}: singlet i, triplet 1 -> delta_0 = pi/4, delta_1 = 0
        assert code == 0 and json.loads(out)["reports"][0]["entropy_bits"] == pytest.approx(1.0, abs=1e-12)

    def test_non_unitary_block_exit_3(self, capsys, tmp_path):
        cfg = write_json(tmp_path / "c.json", {"l_max": 0, "sA": "1/2", "sB": "1/2",
                                                "blocks": {"0": [[2]], "1": [[1]]}})
        inp = instate_file(tmp_path, ChannelSpaceSpec(0, HalfInt(1), HalfInt(1)), 0, [0, 1, 0, 0])
        code, _, err = run(capsys, "partial-wave", "--config", cfg, "--instate", inp)
        assert code == 3 and "unitary" in err

    @pytest.mark.parametrize("cfg", [
        {"l_max": 0, "sA": "1/2", "sB": "1/2"},
        {"l_max": 0, "sA": "1/2", "sB": "1/2", "central": {"0,0": 0}},
        {"l_max": 0, "sA": "1/3", "sB": "1/2", "central": {"0,0": 0, "0,1": 0}},
    ])
    def test_malformed_config_exit_2(self, capsys, tmp_path, cfg):
        path = write_json(tmp_path / "c.json", cfg)
        inp = instate_file(tmp_path, ChannelSpaceSpec(0, HalfInt(1), HalfInt(1)), 0, [0, 1, 0, 0])
        assert run(capsys, "partial-wave", "--config", path, "--instate", inp)[0] == 2

    def test_mismatched_instate(self, capsys, tmp_path):
        cfg = write_json(tmp_path / "c.json", {"l_max": 1, "sA": "1/2", "sB": "1/2",
                                                "central": {f"{l},{s}": 0 for l in (0, 1) for s in (0, 1)}})
        inp = instate_file(tmp_path, ChannelSpaceSpec(0, HalfInt(1), HalfInt(1)), 0, [0, 1, 0, 0])
        code, _, err = run(capsys, "partial-wave", "--config", cfg, "--instate", inp)
        assert code == 2 and "do not match" in err

    def test_reduce_needs_single_sector(self, capsys, tmp_path):
        cfg = write_json(tmp_path / "c.json", {"l_max": 1, "sA": "1/2", "sB": "1/2",
                                                "central": {f"{l},{s}": 0.1 * l + 0.2 * s for l in (0, 1) for s in (0, 1)}})
        spec = ChannelSpaceSpec(1, HalfInt(1), HalfInt(1))
        factors = build_space(spec)
        o = np.array([1, 1, 0, 0]) / math.sqrt(2)
        path = write_json(tmp_path / "in.json", state_to_json(StateVector(factors, np.kron(o, [0, 1, 0, 0]))))
        code, _, err = run(capsys, "partial-wave", "--config", cfg, "--instate", path, "--reduce", "0")
        assert code == 2 and "confined" in err
