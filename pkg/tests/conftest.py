import json
from pathlib import Path

import pytest

from stepe import datagen
from stepe.config import RunConfig, parse_config
from stepe.runner import run_suite

FIXTURES = Path(__file__).parent / "fixtures"
ROOT = Path(__file__).parent.parent

_criteria = {}


@pytest.fixture
def tiny_ds():
    ds = datagen.make_blobs(K=3, d=4, n_train=90, n_test=30, separation=3.0, seed=5)
    return datagen.inject_noise(ds, datagen.NoiseSpec("symmetric", 0.2, seed=6))


@pytest.fixture
def tiny_cfg():
    cfg = RunConfig()
    cfg.dataset.K, cfg.dataset.d = 3, 4
    cfg.dataset.n_train, cfg.dataset.n_test = 120, 45
    cfg.dataset.separation = 3.0
    cfg.dataset.noise_rate = 0.25
    cfg.schedule.T_warm, cfg.schedule.T_total = 2, 6
    cfg.run.arch, cfg.run.hidden = "mlp", 8
    cfg.opt.batch_size = 32
    cfg.run.seeds = [13, 21]
    return cfg.validate()


@pytest.fixture
def per_seed_results():
    with open(FIXTURES / "per_seed_results.json", encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def benchmark(tmp_path_factory):
    """The full blobs-n40 suite (6 methods x 3 seeds), trained once per session."""
    cfg = parse_config(ROOT / "configs" / "blobs-n40.cfg")
    out = tmp_path_factory.mktemp("blobs-n40")
    summary = run_suite(cfg, out=out)
    return cfg, out, summary


# one PASS/FAIL line per acceptance criterion in the terminal summary

def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = "::test_criterion_"
    if marker not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    key = name[len("test_criterion_"):]
    number = key.split("_", 1)[0]
    ok = report.passed or (report.skipped and hasattr(report, "wasxfail"))
    _criteria.setdefault(number, []).append((key, ok))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria, key=int):
        for key, ok in _criteria[number]:
            terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  ({key})")
