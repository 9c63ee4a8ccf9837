from pathlib import Path

import pytest

from viscofem.assembly import ElasticParams
from viscofem.config import ConfigError, RunConfig, dump_config, load_config


def test_defaults_and_overrides():
    cfg = load_config(None, ["mesh.n=8", "kernel.terms=0.3:2, 0.1:5", "problem.mu0=1.5"])
    assert cfg.mesh.n == 8
    assert cfg.kernel_spec().terms == ((0.3, 2.0), (0.1, 5.0))
    assert cfg.params() == ElasticParams(1.5, 0.0)
    assert RunConfig().params() is None


def test_file_and_dump_round_trip(tmp_path):
    cfg = load_config(None, ["adapt.theta=0.3", "kernel.kind=powerlaw", "output.dir=res"])
    path = tmp_path / "run.ini"
    path.write_text(dump_config(cfg))
    again = load_config(str(path))
    assert again == cfg
    assert again.kernel_spec().kind == "powerlaw"


@pytest.mark.parametrize("item", ["mesh.nope=1", "nosection.n=1", "mesh.n=abc", "meshn=3", "kernel.terms"])
def test_bad_overrides_name_the_key(item):
    with pytest.raises(ConfigError):
        load_config(None, [item])


def test_bad_kernel_settings():
    for items in (["kernel.terms=0.4"], ["kernel.terms=a:b"], ["kernel.kind=gauss"]):
        with pytest.raises(ConfigError):
            load_config(None, items).kernel_spec()


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/run.ini")


def test_readme_example_parses(tmp_path):
    text = (Path(__file__).resolve().parent.parent / "README.md").read_text()
    block = text.split("```ini\n", 1)[1].split("```", 1)[0]
    (tmp_path / "r.ini").write_text(block)
    cfg = load_config(str(tmp_path / "r.ini"))
    assert cfg.goal.weight == "sin_half" and cfg.problem.mu0 is None and cfg.estimator.mode == "L1_kernel"
