import numpy as np
import pytest

from exprclone import synthetic as syn
from exprclone.face_model import FeaturePoint, FeaturePointSet

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        key = (marker.args[0], marker.args[1])
        passed = report.outcome == "passed"
        _ACCEPTANCE.setdefault(key, []).append((item.name, passed))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (num, title), results in sorted(_ACCEPTANCE.items()):
        ok = all(p for _, p in results)
        terminalreporter.write_line(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {title}")
        if not ok:
            for name, p in results:
                if not p:
                    terminalreporter.write_line(f"               failed: {name}")


def point_set(xy, size=(100, 100), organ="nose"):
    return FeaturePointSet(
        [FeaturePoint(i, organ, float(x), float(y)) for i, (x, y) in enumerate(xy)], size
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def faces():
    """Source neutral/smile and target neutral, images and landmarks."""
    src_n, src_e, tgt = syn.SOURCE, syn.smile(syn.SOURCE), syn.TARGET
    return {
        "src_neutral_img": syn.render(src_n),
        "src_neutral_pts": syn.make_points(src_n),
        "src_exp_img": syn.render(src_e),
        "src_exp_pts": syn.make_points(src_e),
        "tgt_img": syn.render(tgt),
        "tgt_pts": syn.make_points(tgt),
    }


@pytest.fixture(scope="session")
def basis():
    from exprclone.eigenface import train_basis

    return train_basis(syn.training_set(syn.TARGET))
