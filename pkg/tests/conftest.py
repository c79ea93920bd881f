import pytest

from afosmc.config import Config
from afosmc.harness import Reference, run_many

TRIANGLE = Reference("triangle", 1.0, 1.0, 4.0)


@pytest.fixture(scope="session")
def default_config():
    return Config()


@pytest.fixture(scope="session")
def default_runs(default_config):
    """Traces of every case on the default sine references plus the 1 Hz triangle.

    Keyed by ``(reference label, case id)``; values are ``(trace, settle_skip)``.
    """
    cfg = default_config
    refs = list(cfg.references) + [TRIANGLE]
    cfg = Config(references=tuple(refs))
    jobs = [(i, c) for i in range(len(refs)) for c in (1, 2, 3)]
    traces = run_many([cfg.scenario(c, i) for i, c in jobs])
    return {(refs[i].label, c): (tr, cfg.skip_for(i)) for (i, c), tr in zip(jobs, traces)}
