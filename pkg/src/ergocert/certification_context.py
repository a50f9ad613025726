import logging

from ergocert import MAX_QUBITS
from ergocert.certification import make_objective
from ergocert.exception import ConfigurationError
from ergocert.model.spin_chain import HamiltonianData
from ergocert.model.spin_chain import SpinChainParams
from ergocert.model.spin_chain import build_spin_chain
from ergocert.model.state import make_reference_state
from ergocert.sdp import SdpSolver
from ergocert.template_handler import Jinja2TemplateHandler
from ergocert.template_handler import make_environment
from ergocert.util import instantiate

logger = logging.getLogger(__name__)

DEFAULT_SOLVER = {"class": SdpSolver, "kwargs": {}}


def init_service(conf, **extra):
    kwargs = dict(conf.get("kwargs", {}))
    kwargs.update(extra)
    return instantiate(conf["class"], **kwargs)


class CertificationContext:
    """
    Everything a command needs, built from one configuration dict::

        {
            "hamiltonian": {"preset": "XXZ", "n": 3,
                            "couplings": {"J1": 1.0, "Delta": 0.5}},
            "state": {"kind": "GIBBS", "beta": -1.0},
            "solver": {"class": "ergocert.sdp.SdpSolver",
                       "kwargs": {"tol_gap": 1e-7}},
            "certification": {"objective": "min_purity"},
            "sweep": {"realizations": 20, "seed": 7},
            "template_dir": "templates"
        }

    Every section is optional; components whose section is missing stay
    None (the solver and template handler fall back to defaults).
    """

    def __init__(self, conf, solver=None, template_handler=None):
        self.conf = conf
        self.solver = solver
        self.template_handler = template_handler

        # Default values, to be changed below depending on configuration
        self.allow_slow = False
        self.max_qubits = MAX_QUBITS
        self.params = None
        self.hamiltonian = None
        self.state = None
        self.objective = None

        for param in ["allow_slow", "max_qubits"]:
            try:
                setattr(self, param, conf[param])
            except KeyError:
                pass

        for item in ["solver", "hamiltonian", "state", "objective", "template_handler"]:
            _func = getattr(self, "do_{}".format(item), None)
            if _func:
                _func()

    def do_solver(self):
        if self.solver is None:
            self.solver = init_service(self.conf.get("solver") or DEFAULT_SOLVER)

    def do_hamiltonian(self):
        _conf = self.conf.get("hamiltonian")
        if not _conf:
            return

        if "energies" in _conf:
            self.hamiltonian = HamiltonianData.from_energies(_conf["energies"])
            return

        try:
            n = int(_conf["n"])
        except KeyError:
            raise ConfigurationError("The hamiltonian section needs 'n'")
        self.params = SpinChainParams.from_preset(
            _conf.get("preset", "GENERAL"), n, **_conf.get("couplings", {})
        )
        self.hamiltonian = build_spin_chain(self.params, max_qubits=self.max_qubits)
        logger.info("Hamiltonian {} on {} qubits".format(_conf.get("preset", "GENERAL"), n))

    def do_state(self):
        _conf = self.conf.get("state")
        if not _conf:
            return

        self.state = make_reference_state(
            _conf.get("kind", "GHZ"),
            hamiltonian=self.hamiltonian,
            n=_conf.get("n"),
            beta=_conf.get("beta"),
            weight=_conf.get("weight", 1.0),
        )

    def do_objective(self):
        _conf = self.conf.get("certification", {})
        self.objective = make_objective(
            _conf.get("objective", "min_purity"),
            hamiltonian=self.hamiltonian,
            observable=_conf.get("observable"),
        )

    def do_template_handler(self):
        if self.template_handler is not None:
            return
        try:
            self.template_handler = self.conf["template_handler"]
        except KeyError:
            try:
                loader = self.conf["template_loader"]
            except KeyError:
                loader = make_environment(self.conf.get("template_dir"))
            self.template_handler = Jinja2TemplateHandler(loader)

    def require(self, *items):
        """Raise ConfigurationError unless the named components exist."""
        for item in items:
            if getattr(self, item, None) is None:
                raise ConfigurationError("No '{}' configured".format(item))

    def render(self, template, **kwargs):
        return self.template_handler.render(template, **kwargs)
