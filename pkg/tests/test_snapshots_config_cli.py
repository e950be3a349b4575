"""Snapshot persistence, configuration parsing, and the command line."""

import csv
import struct

import numpy as np
import pytest

from nematicflow import (
    ConfigError,
    GridSpec,
    SnapshotFormatError,
    SnapshotSizeError,
    State,
    generate_initial,
    load,
    parse_config,
    persist,
    read_snapshot,
    write_snapshot,
)
from nematicflow import cli, experiments


def _state(grid, seed=0, t=0.0):
    u, d = generate_initial(grid, profile="random", seed=seed)
    return State(grid, u, d, t)


class TestSnapshotRoundTrip:
    def test_state_round_trip_is_bit_exact(self, grid32, tmp_path):
        """persist/load reproduces every coefficient and the time."""
        state = _state(grid32, seed=1, t=0.625)
        path = tmp_path / "state.lcsf"
        persist(state, path)
        back = load(path)
        assert back.t == 0.625
        assert np.array_equal(back.u.x.coeffs, state.u.x.coeffs)
        assert np.array_equal(back.u.y.coeffs, state.u.y.coeffs)
        assert np.array_equal(back.d.x.coeffs, state.d.x.coeffs)
        assert np.array_equal(back.d.y.coeffs, state.d.y.coeffs)

    def test_header_layout(self, grid16, tmp_path):
        """Magic, version, grid size, and component count sit up front."""
        path = tmp_path / "h.lcsf"
        persist(_state(grid16), path)
        raw = path.read_bytes()
        magic, version, n, ncomp = struct.unpack_from("<4sIII", raw, 0)
        assert magic == b"LCSF"
        assert version == 1
        assert n == 16
        assert ncomp == 5
        assert len(raw) == 16 + 5 * 16 * 16 * 16

    def test_raw_component_io(self, tmp_path):
        """write_snapshot/read_snapshot carry arbitrary component lists."""
        rng = np.random.default_rng(3)
        arrays = [rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
                  for _ in range(2)]
        path = tmp_path / "raw.lcsf"
        write_snapshot(path, arrays, 8)
        back, n = read_snapshot(path)
        assert n == 8
        assert len(back) == 2
        assert np.array_equal(back[0], arrays[0])
        assert np.array_equal(back[1], arrays[1])

    def test_grid_mismatch_raises(self, grid32, grid16, tmp_path):
        """Loading against the wrong grid is refused, not silently resized."""
        path = tmp_path / "m.lcsf"
        persist(_state(grid32), path)
        with pytest.raises(SnapshotSizeError):
            load(path, grid=grid16)

    def test_component_shape_mismatch_raises(self, tmp_path):
        with pytest.raises(SnapshotSizeError):
            write_snapshot(tmp_path / "bad.lcsf",
                           [np.zeros((4, 4), dtype=complex)], 8)


class TestSnapshotErrors:
    def test_bad_magic_names_the_offset(self, tmp_path):
        path = tmp_path / "bad.lcsf"
        path.write_bytes(b"XXXX" + b"\x00" * 28)
        with pytest.raises(SnapshotFormatError, match="offset 0"):
            read_snapshot(path)

    def test_bad_version_names_the_offset(self, tmp_path):
        path = tmp_path / "bad.lcsf"
        path.write_bytes(struct.pack("<4sIII", b"LCSF", 9, 8, 1)
                         + b"\x00" * (8 * 8 * 16))
        with pytest.raises(SnapshotFormatError, match="offset 4"):
            read_snapshot(path)

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "short.lcsf"
        path.write_bytes(b"LC")
        with pytest.raises(SnapshotFormatError, match="truncated header"):
            read_snapshot(path)

    def test_truncated_component_names_the_offset(self, tmp_path):
        path = tmp_path / "trunc.lcsf"
        path.write_bytes(struct.pack("<4sIII", b"LCSF", 1, 8, 1) + b"\x00" * 100)
        with pytest.raises(SnapshotFormatError, match="truncated component 0"):
            read_snapshot(path)

    def test_wrong_component_count_for_states(self, tmp_path):
        path = tmp_path / "c.lcsf"
        write_snapshot(path, [np.zeros((8, 8), dtype=complex)] * 3, 8)
        with pytest.raises(SnapshotFormatError, match="5 components"):
            load(path)


class TestConfigParsing:
    def test_full_config_round_trip(self, tmp_path):
        """Every section lands in the corresponding dataclass."""
        path = tmp_path / "full.ini"
        path.write_text(
            "[grid]\nn = 32\npadding = 2.0\n"
            "[time]\ndt = 1e-3\nt_end = 0.01\nscheme = imex2\ncadence = 5\n"
            "[coefficients]\npreset = ansatz\nnu = 2.0\n"
            "[initial]\nprofile = random\nseed = 9\ndecay = 2.75\n"
            "amplitude_u = 0.4\namplitude_d = 0.2\ndirector = 0.8,0.6\n"
            "[twin]\nmode = perturb\ndelta = 1e-6\nseed = 4\n"
            "[verify]\nn_trials = 50\nseed = 123\ngrids = 32,64\n"
            "[output]\ndir = results\n"
        )
        cfg = parse_config(path)
        assert cfg.grid.n_modes == 32
        assert cfg.solver.dt == 1e-3
        assert cfg.solver.scheme == "imex2"
        assert cfg.solver.record_cadence == 5
        assert cfg.coeffs.nu == 2.0
        assert cfg.initial.seed == 9
        assert cfg.initial.director == (0.8, 0.6)
        assert cfg.twin.mode == "perturb"
        assert cfg.twin.delta == 1e-6
        assert cfg.verify.grids == (32, 64)
        assert cfg.output_dir == "results"

    def test_minimal_config_defaults(self, tmp_path):
        """An empty file still yields usable defaults."""
        path = tmp_path / "min.ini"
        path.write_text("")
        cfg = parse_config(path)
        assert cfg.grid is None
        assert cfg.solver is None
        assert cfg.coeffs.is_ansatz
        assert cfg.initial.profile == "random"
        assert cfg.verify.grids == (64, 128)

    def test_unknown_section_and_key_raise(self, tmp_path):
        p1 = tmp_path / "s.ini"
        p1.write_text("[physics]\nq = 1\n")
        with pytest.raises(ConfigError, match="unknown config section"):
            parse_config(p1)
        p2 = tmp_path / "k.ini"
        p2.write_text("[grid]\nnn = 32\n")
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config(p2)

    def test_missing_file_raises(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            parse_config(tmp_path / "nope.ini")

    def test_explicit_coefficients_are_all_or_none(self, tmp_path):
        path = tmp_path / "mu.ini"
        path.write_text("[coefficients]\nmu1 = 1.0\nmu2 = -1.0\n")
        with pytest.raises(ConfigError, match="all of mu1..mu6"):
            parse_config(path)

    def test_explicit_coefficient_set(self, tmp_path):
        path = tmp_path / "mu6.ini"
        path.write_text(
            "[coefficients]\nmu1 = 0.5\nmu2 = -2.0\nmu3 = 0.0\n"
            "mu4 = 1.0\nmu5 = 1.5\nmu6 = 0.75\n"
        )
        cfg = parse_config(path)
        assert cfg.coeffs.mu2 == -2.0
        assert not cfg.coeffs.is_ansatz

    def test_invalid_values_become_config_errors(self, tmp_path):
        """Validation failures inside nested dataclasses keep the error type."""
        for body in (
            "[grid]\nn = 7\n",
            "[time]\ndt = 1e-3\n",
            "[time]\ndt = 1e-3\nt_end = 1.0\nscheme = rk9\n",
            "[coefficients]\npreset = isotropic\n",
            "[initial]\nprofile = vortex\n",
            "[twin]\nmode = mirrored\n",
            "[twin]\nmode = perturb\ndelta = -1.0\n",
            "[initial]\ndirector = 1,2,3\n",
        ):
            path = tmp_path / "bad.ini"
            path.write_text(body)
            with pytest.raises(ConfigError):
                parse_config(path)


def _write_run_config(path, n=16, dt="2e-3", t_end="0.01", extra=""):
    path.write_text(
        f"[grid]\nn = {n}\n"
        f"[time]\ndt = {dt}\nt_end = {t_end}\ncadence = 2\n"
        "[coefficients]\npreset = ansatz\nnu = 1.0\n"
        "[initial]\nprofile = random\nseed = 3\n"
        + extra
    )


def _read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


class TestCli:
    def test_run_writes_trace_and_snapshot(self, tmp_path):
        cfg = tmp_path / "run.ini"
        _write_run_config(cfg)
        out = tmp_path / "out"
        rc = cli.main(["run", "--config", str(cfg), "--out", str(out),
                       "--quiet"])
        assert rc == 0
        header, rows = _read_csv(out / "trace.csv")
        assert header == ["t", "E_total", "E_kin", "E_elastic", "D_total",
                          "D_term1", "D_term2", "D_term3", "D_term4",
                          "D_term5", "div_residual"]
        assert len(rows) == 4  # t = 0, 2 cadence points, final
        final = load(out / "final.lcsf")
        assert final.t == pytest.approx(0.01, rel=1e-12)

    def test_run_seed_override_changes_the_data(self, tmp_path):
        cfg = tmp_path / "run.ini"
        _write_run_config(cfg)
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        assert cli.main(["run", "--config", str(cfg), "--out", str(out_a),
                         "--quiet"]) == 0
        assert cli.main(["run", "--config", str(cfg), "--out", str(out_b),
                         "--seed", "99", "--quiet"]) == 0
        sa = load(out_a / "final.lcsf")
        sb = load(out_b / "final.lcsf")
        assert not np.array_equal(sa.u.x.coeffs, sb.u.x.coeffs)

    def test_twin_writes_functional_traces(self, tmp_path):
        cfg = tmp_path / "twin.ini"
        _write_run_config(
            cfg, extra="[twin]\nmode = perturb\ndelta = 1e-5\nseed = 7\n")
        out = tmp_path / "out"
        rc = cli.main(["twin", "--config", str(cfg), "--out", str(out),
                       "--quiet"])
        assert rc == 0
        header, rows = _read_csv(out / "twin.csv")
        assert header[:3] == ["t", "Phi", "frakD"]
        assert len(rows) >= 2
        phi0 = float(rows[0][1])
        assert phi0 > 0.0
        _, osg = _read_csv(out / "osgood.csv")
        assert (out / "osgood_summary.txt").exists()
        assert load(out / "final_a.lcsf").t == pytest.approx(0.01, rel=1e-12)
        assert load(out / "final_b.lcsf").t == pytest.approx(0.01, rel=1e-12)

    def test_twin_identical_mode_reports_zero_phi(self, tmp_path):
        cfg = tmp_path / "twin.ini"
        _write_run_config(cfg, extra="[twin]\nmode = identical\n")
        out = tmp_path / "out"
        assert cli.main(["twin", "--config", str(cfg), "--out", str(out),
                         "--quiet"]) == 0
        _, rows = _read_csv(out / "twin.csv")
        assert all(float(r[1]) == 0.0 for r in rows)

    def test_decompose_from_snapshot(self, tmp_path, grid16):
        cfg = tmp_path / "d.ini"
        _write_run_config(cfg)
        snap = tmp_path / "s.lcsf"
        persist(_state(grid16, seed=5), snap)
        out = tmp_path / "out"
        rc = cli.main(["decompose", "--config", str(cfg), "--out", str(out),
                       "--snapshot", str(snap), "--quiet"])
        assert rc == 0
        for comp in ("u_x", "u_y", "d_x", "d_y"):
            header, rows = _read_csv(out / f"decompose_{comp}.csv")
            assert header == ["q", "block_l2", "weighted_block_l2"]
            assert len(rows) >= 3

    def test_verify_subset_passes(self, tmp_path):
        cfg = tmp_path / "v.ini"
        cfg.write_text("[verify]\nn_trials = 30\nseed = 11\ngrids = 16\n")
        out = tmp_path / "out"
        rc = cli.main(["verify", "--config", str(cfg), "--out", str(out),
                       "--checks", "cancel,skew", "--quiet"])
        assert rc == 0
        header, rows = _read_csv(out / "verify_16.csv")
        assert header == ["lemma", "param", "ratio_max", "ratio_median",
                          "verdict"]
        assert rows
        assert all(r[4] == "true" for r in rows)

    def test_verify_unknown_check_is_a_config_error(self, tmp_path):
        cfg = tmp_path / "v.ini"
        cfg.write_text("[verify]\nn_trials = 30\ngrids = 16\n")
        rc = cli.main(["verify", "--config", str(cfg), "--out",
                       str(tmp_path / "o"), "--checks", "everything",
                       "--quiet"])
        assert rc == 2

    def test_missing_config_exits_2(self, tmp_path):
        rc = cli.main(["run", "--config", str(tmp_path / "absent.ini"),
                       "--out", str(tmp_path), "--quiet"])
        assert rc == 2

    def test_run_without_time_section_exits_2(self, tmp_path):
        cfg = tmp_path / "no_time.ini"
        cfg.write_text("[grid]\nn = 16\n")
        rc = cli.main(["run", "--config", str(cfg), "--out", str(tmp_path),
                       "--quiet"])
        assert rc == 2

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_divergent_run_exits_3(self, tmp_path):
        cfg = tmp_path / "explode.ini"
        cfg.write_text(
            "[grid]\nn = 16\n"
            "[time]\ndt = 0.5\nt_end = 50.0\n"
            "[initial]\nprofile = random\nseed = 1\n"
            "amplitude_u = 30.0\namplitude_d = 30.0\n"
        )
        rc = cli.main(["run", "--config", str(cfg), "--out", str(tmp_path),
                       "--quiet"])
        assert rc == 3

    def test_failed_verification_exits_4(self, tmp_path, monkeypatch):
        """The wiring maps a False verdict to exit code 4."""
        cfg = tmp_path / "v.ini"
        cfg.write_text("[verify]\nn_trials = 30\ngrids = 16\n")
        monkeypatch.setattr(experiments, "verify_experiment",
                            lambda *a, **k: False)
        rc = cli.main(["verify", "--config", str(cfg), "--out",
                       str(tmp_path / "o"), "--quiet"])
        assert rc == 4
