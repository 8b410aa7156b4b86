import sys
import time
from functools import lru_cache
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from sta.analyze import project  # noqa: E402
from sta.core import TrainConfig  # noqa: E402
from sta.data import normalize, resolve_dataset  # noqa: E402
from sta.train import fit, init_model  # noqa: E402

ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@lru_cache(maxsize=None)
def default_run(name: str, kappa: float):
    """Full default-config run, shared across acceptance criteria."""
    dataset = normalize(resolve_dataset(name))
    config = TrainConfig(kappa=kappa)
    start = time.perf_counter()
    model, history = fit(dataset, config)
    seconds = time.perf_counter() - start
    return dict(
        dataset=dataset,
        config=config,
        init=init_model(config, dataset),
        model=model,
        history=history,
        projection=project(model, dataset),
        seconds=seconds,
    )


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split(".")[0])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}: {detail}")
