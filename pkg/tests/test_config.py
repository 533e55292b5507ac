from argparse import Namespace
from dataclasses import replace
from fractions import Fraction

import pytest

from core.config import RunConfig, config_manager
from main import build_parser


def test_defaults_are_valid():
    assert config_manager.validate_config()
    assert config_manager.get_config().quadrature.base_points == 64


@pytest.mark.parametrize("changes", [
    {"rank": 7}, {"q": 1}, {"n": -1}, {"x": (1, 2, 3)}, {"x": (-1, 0)},
    {"c1": Fraction(3, 2)}, {"rank": 3, "c1": Fraction(1, 3)}, {"method": "magic"},
    {"eta": 1.0}, {"threads": 0},
])
def test_invalid_requests_are_rejected(changes):
    config_manager.config.run = replace(RunConfig(), **changes)
    assert not config_manager.validate_config()


def test_apply_arguments_from_parser():
    args = build_parser().parse_args(["density", "--rank", "3", "--n", "5", "--x", "1,0,1", "--tol", "1e-10"])
    config = config_manager.apply_arguments(args)
    assert config.run.command == "density"
    assert config.run.x == (1, 0, 1)
    assert config.quadrature.tolerance == 1e-10
    assert config_manager.validate_config()


def test_rational_weight_argument():
    args = build_parser().parse_args(["density", "--c1", "1/3"])
    assert config_manager.apply_arguments(args).run.c1 == Fraction(1, 3)


def test_debug_forces_debug_level():
    config = config_manager.apply_arguments(Namespace(command="table", debug=True, log_level=None))
    assert config.service.log_level == "DEBUG"
    assert config.service.debug


def test_run_dict():
    config_manager.apply_arguments(Namespace(command="density", n=4, x=[2, 1]))
    run = config_manager.get_run_dict()
    assert run["lambda"] == [2, 1]
    assert run["n"] == 4
