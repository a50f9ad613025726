import io
from copy import deepcopy

import numpy as np
import pytest
import yaml

from ergocert.certification import Linear
from ergocert.certification import MinPurity
from ergocert.certification_context import CertificationContext
from ergocert.exception import ConfigurationError
from ergocert.exception import DimensionTooLarge
from ergocert.model.state import DensityMatrix
from ergocert.sdp import SdpSolver
from ergocert.template_handler import Jinja2TemplateHandler

conf = {
    "hamiltonian": {"preset": "XXZ", "n": 2, "couplings": {"J1": 1.0, "Delta": 0.5}},
    "state": {"kind": "GHZ"},
    "solver": {"class": "ergocert.sdp.SdpSolver", "kwargs": {"tol_gap": 1e-8}},
    "certification": {"objective": "min_purity"},
}

conf_yaml = """
hamiltonian:
  preset: MFI
  n: 2
  couplings:
    B: 0.5
    G: 0.5
    Delta: 1.0
state:
  kind: GIBBS
  beta: -1.0
solver:
  class: ergocert.sdp.SdpSolver
  kwargs:
    max_iterations: 150
certification:
  objective: linear
  observable: hamiltonian
"""


def test_components():
    context = CertificationContext(conf)
    assert isinstance(context.solver, SdpSolver)
    assert context.solver.tol_gap == 1e-8
    assert context.params.Jy == 1.0
    assert np.allclose(context.hamiltonian.energies, [-1.5, -0.5, -0.5, 2.5])
    assert isinstance(context.state, DensityMatrix)
    assert context.state.purity() == pytest.approx(1.0)
    assert isinstance(context.objective, MinPurity)
    assert isinstance(context.template_handler, Jinja2TemplateHandler)


def test_yaml_configuration():
    _conf = yaml.safe_load(io.StringIO(conf_yaml))
    context = CertificationContext(_conf)
    assert context.solver.max_iterations == 150
    assert context.params.G == 0.5
    assert isinstance(context.objective, Linear)
    assert np.allclose(context.objective.observable, context.hamiltonian.matrix)
    # beta < 0 puts more weight on the higher levels
    p = np.real(np.diag(context.hamiltonian.eigenvectors.conj().T @ context.state.matrix @ context.hamiltonian.eigenvectors))
    assert p[-1] > p[0]


def test_solver_class_object():
    _conf = deepcopy(conf)
    _conf["solver"] = {"class": SdpSolver, "kwargs": {"tol_feas": 1e-9}}
    context = CertificationContext(_conf)
    assert context.solver.tol_feas == 1e-9


def test_default_solver():
    context = CertificationContext({})
    assert isinstance(context.solver, SdpSolver)
    assert context.hamiltonian is None
    assert context.state is None


def test_given_solver():
    solver = SdpSolver(max_iterations=10)
    context = CertificationContext(conf, solver=solver)
    assert context.solver is solver


def test_energies():
    context = CertificationContext({"hamiltonian": {"energies": [0.0, 1.0]}})
    assert context.hamiltonian.dim == 2
    assert context.params is None


def test_missing_n():
    with pytest.raises(ConfigurationError):
        CertificationContext({"hamiltonian": {"preset": "XXZ"}})


def test_unknown_preset():
    _conf = deepcopy(conf)
    _conf["hamiltonian"]["preset"] = "HUBBARD"
    with pytest.raises(ConfigurationError):
        CertificationContext(_conf)


def test_max_qubits():
    _conf = deepcopy(conf)
    _conf["hamiltonian"]["n"] = 4
    _conf["max_qubits"] = 3
    with pytest.raises(DimensionTooLarge):
        CertificationContext(_conf)


def test_require():
    context = CertificationContext({"hamiltonian": conf["hamiltonian"]})
    context.require("hamiltonian")
    with pytest.raises(ConfigurationError):
        context.require("hamiltonian", "state")


def test_unknown_objective():
    _conf = deepcopy(conf)
    _conf["certification"]["objective"] = "max_entropy"
    with pytest.raises(ConfigurationError):
        CertificationContext(_conf)


def test_template_dir(tmp_path):
    (tmp_path / "hello.txt").write_text("E = {{ value|fmt('.3f') }}")
    _conf = deepcopy(conf)
    _conf["template_dir"] = str(tmp_path)
    context = CertificationContext(_conf)
    assert context.render("hello.txt", value=0.5) == "E = 0.500"


def test_packaged_templates():
    context = CertificationContext(conf)
    out = context.render(
        "certify_file.txt",
        records="data.csv",
        summary={
            "delta": 0.003,
            "rows": [],
            "infeasible_count": 0,
            "best_bound": 0.25,
            "last_update_K": None,
        },
        exact=None,
    )
    assert "Best bound    0.25" in out
    assert "Last update   -" in out
