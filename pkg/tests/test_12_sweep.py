import math
from dataclasses import replace

import pytest

from ergocert.ergotropy import exact_ergotropy
from ergocert.exception import ConfigurationError
from ergocert.exception import DimensionMismatch
from ergocert.exception import DimensionTooLarge
from ergocert.exception import EmptyInput
from ergocert.harness.sweep import SweepConfig
from ergocert.harness.sweep import _check_k_list
from ergocert.harness.sweep import _realization
from ergocert.harness.sweep import aggregate_median_iqr
from ergocert.harness.sweep import default_k_list
from ergocert.harness.sweep import run_certify_file
from ergocert.harness.sweep import run_sweep
from ergocert.measurement import simulate_plan
from ergocert.measurement import write_records
from ergocert.model import SpinChainParams
from ergocert.model import build_spin_chain
from ergocert.model import make_reference_state
from ergocert.pauli import hierarchical_order
from ergocert.sdp import SdpSolver
from ergocert.sdp import SdpStatus

XXZ = {"J1": 1.0, "Delta": 0.5}


def _config(**kwargs):
    kwargs.setdefault("preset", "XXZ")
    kwargs.setdefault("state", "GHZ")
    kwargs.setdefault("couplings", XXZ)
    kwargs.setdefault("n", 2)
    kwargs.setdefault("realizations", 2)
    kwargs.setdefault("seed", 3)
    return SweepConfig(**kwargs)


def _xxz(n=2):
    return build_spin_chain(SpinChainParams.from_preset("XXZ", n, **XXZ))


class _StalledSolver(SdpSolver):
    def solve_linear(self, problem):
        sol = super(_StalledSolver, self).solve_linear(problem)
        return replace(sol, status=SdpStatus.MAX_ITERATIONS)


class TestAggregate(object):
    def test_quartiles(self):
        assert aggregate_median_iqr([1, 2, 3, 4]) == (2.5, 1.75, 3.25)

    def test_single(self):
        assert aggregate_median_iqr([0.5]) == (0.5, 0.5, 0.5)

    def test_empty(self):
        with pytest.raises(EmptyInput):
            aggregate_median_iqr([])


class TestSweepConfig(object):
    def test_realizations(self):
        with pytest.raises(ConfigurationError):
            _config(realizations=0)

    def test_shots_need_delta(self):
        with pytest.raises(ConfigurationError):
            _config(shots=100)

    def test_large(self):
        with pytest.raises(DimensionTooLarge):
            _config(n=4)
        assert _config(n=4, allow_slow=True).n == 4
        with pytest.raises(DimensionTooLarge):
            _config(n=6, allow_slow=True)

    def test_from_conf(self):
        conf = {
            "hamiltonian": {"preset": "ANNNI", "n": 3, "couplings": {"J1": 1.0, "J2": -1.0, "B": 0.5}},
            "state": {"kind": "EXTREMAL_SUPERPOSITION"},
            "sweep": {"realizations": 5, "seed": 11, "shots": None, "monotone": True},
        }
        config = SweepConfig.from_conf(conf)
        assert config.realizations == 5
        assert config.monotone
        assert config.shots is None
        assert config.params().J2 == -1.0

    def test_k_list(self):
        assert default_k_list(2) == list(range(1, 16))
        assert _check_k_list([5, 1, 5, 3], 2) == [1, 3, 5]
        with pytest.raises(ConfigurationError):
            _check_k_list([16], 2)
        with pytest.raises(EmptyInput):
            _check_k_list([], 2)


class TestRunSweep(object):
    def test_exact_data(self, tmp_path):
        config = _config()
        out = tmp_path / "sweep.csv"
        rows = run_sweep(config, k_list=[1, 5, 15], out=str(out))
        exact = exact_ergotropy(make_reference_state("GHZ", n=2), _xxz()).value
        assert [r.K for r in rows] == [1, 5, 15]
        assert all(r.exact == pytest.approx(exact) for r in rows)
        assert all(r.feasibility_failures == 0 for r in rows)
        assert rows[-1].median == pytest.approx(exact, abs=1e-5)
        assert all(r.q25 <= r.median <= r.q75 for r in rows)

        text = out.read_text()
        assert text.startswith("# schema=1\n")
        assert "K,median,q25,q75,exact,feasibility_failures,solver_failures\n" in text
        assert "# seeds=base:3 realizations:0-1" in text

    def test_reproducible(self, tmp_path):
        config = _config()
        run_sweep(config, k_list=[2, 6], out=str(tmp_path / "a.csv"))
        run_sweep(config, k_list=[2, 6], out=str(tmp_path / "b.csv"))
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_workers(self):
        one = run_sweep(_config(), k_list=[3, 7])
        two = run_sweep(_config(workers=2), k_list=[3, 7])
        assert one == two

    def test_monotone(self):
        config = _config(monotone=True, realizations=1)
        values = _realization((config, list(range(1, 16)), 0, SdpSolver()))
        assert all(b >= a for a, b in zip(values, values[1:]))
        rows = run_sweep(_config(monotone=True), k_list=[1, 4, 8, 15])
        medians = [r.median for r in rows]
        assert all(b >= a for a, b in zip(medians, medians[1:]))

    def test_solver_failures_counted(self):
        rows = run_sweep(_config(), k_list=[3, 15], solver=_StalledSolver())
        assert [r.solver_failures for r in rows] == [2, 2]
        assert [r.feasibility_failures for r in rows] == [0, 0]
        assert all(math.isnan(r.median) for r in rows)

    def test_shots(self):
        config = _config(shots=4096, delta=0.05)
        rows = run_sweep(config, k_list=[4, 15])
        for row in rows:
            if row.feasibility_failures + row.solver_failures < config.realizations:
                assert 0.0 <= row.median <= row.exact + 1e-6
            else:
                assert math.isnan(row.median)


class TestCertifyFile(object):
    @pytest.fixture(autouse=True)
    def create_hamiltonian(self):
        self.ham = _xxz()

    def test_ghz_records(self, tmp_path):
        rho = make_reference_state("GHZ", n=2)
        labels = [p.label for p in hierarchical_order(2, 4)]
        path = str(tmp_path / "ghz.csv")
        write_records(simulate_plan(rho, labels, 2 ** 14, 0.1, 5), path)
        out = tmp_path / "bounds.csv"
        summary = run_certify_file(path, self.ham, out=str(out))
        assert len(summary.rows) == 15
        assert summary.infeasible_count == 0
        assert 0.0 < summary.best_bound <= exact_ergotropy(rho, self.ham).value + 1e-6
        assert summary.last_update_K is not None
        bounds = [r.bound for r in summary.rows]
        assert all(b >= a for a, b in zip(bounds, bounds[1:]))
        text = out.read_text()
        assert "K,bound,unitary_updated,infeasible,advice\n" in text
        assert "# best_bound=" in text

    def test_single_record(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text("# delta=0.1\npauli,estimate,shots\nXX,1.0,1\n")
        summary = run_certify_file(str(path), self.ham)
        assert len(summary.rows) == 1
        assert summary.best_bound == pytest.approx(0.0, abs=1e-9)

    def test_infeasible_prefix(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("# delta=0.1\npauli,estimate,shots\nXX,1.0,1000000\nZI,1.0,1000000\n")
        summary = run_certify_file(str(path), self.ham)
        first, second = summary.rows
        assert not first.infeasible
        assert second.infeasible
        assert second.bound == first.bound
        assert second.advice == pytest.approx(0.2902, abs=2e-3)
        assert summary.infeasible_count == 1

    def test_delta_override(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text("pauli,estimate,shots\nXX,1.0,4\n")
        assert run_certify_file(str(path), self.ham, delta=0.2).delta == 0.2

    def test_dimension(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text("# delta=0.1\npauli,estimate,shots\nXX,1.0,4\n")
        with pytest.raises(DimensionMismatch):
            run_certify_file(str(path), _xxz(3))
