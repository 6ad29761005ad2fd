import numpy as np
import pytest

from tightframe import UnitVectorSystem


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_system(rng, dim, count):
    return UnitVectorSystem.random(dim, count, rng)


def random_spd(rng, n, floor=1e-2):
    a = rng.standard_normal((n, n))
    return a @ a.T + floor * np.eye(n)


def random_psd(rng, n, rank, trace):
    a = rng.standard_normal((n, rank))
    m = a @ a.T
    return m * (trace / np.trace(m))


def random_tangent(rng, x):
    w = rng.standard_normal(x.shape)
    return w - np.einsum("ij,ij->i", w, x)[:, None] * x


def gram_schmidt(vectors):
    """Orthonormalize rows, dropping (near-)dependent ones."""
    out = []
    for v in np.asarray(vectors, dtype=float):
        w = v.copy()
        for q in out:
            w -= (w @ q) * q
        nrm = np.linalg.norm(w)
        if nrm > 1e-8:
            out.append(w / nrm)
    return np.array(out)


_ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Record a one-line verdict for an acceptance criterion."""
    entry = {"name": request.node.name, "detail": "", "passed": False}
    _ACCEPTANCE.append(entry)

    def report(detail):
        entry["detail"] = detail

    yield report
    entry["passed"] = not getattr(request.node, "_failed", False)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and rep.failed:
        item._failed = True


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for e in _ACCEPTANCE:
        mark = "PASS" if e["passed"] else "FAIL"
        terminalreporter.write_line(f"[{mark}] {e['name']}: {e['detail']}")
