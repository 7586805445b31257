import pytest

from cmc_lab import representation as rp
from cmc_lab import singularities as sg
from cmc_lab import surfaces as sf

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # one pass/fail line per acceptance criterion, shown even under capture
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def delaunay_t_k2():
    return sf.delaunay_timelike(2.0, 0.5)


@pytest.fixture(scope="session")
def delaunay_s_km1():
    return sf.delaunay_spacelike(-1.0, 0.5)


@pytest.fixture(scope="session")
def lightlike_i():
    return sf.delaunay_lightlike("i", 0.5)


@pytest.fixture(scope="session")
def lightlike_ii():
    return sf.delaunay_lightlike("ii", 0.5)


@pytest.fixture(scope="session")
def conj_k2():
    return sf.conjugate_of("delaunay_timelike", k=2.0, H=0.5)


@pytest.fixture(scope="session")
def fold_model():
    return sf.standard_model("fold")


@pytest.fixture(scope="session")
def cusp25_model():
    return sf.standard_model("cusp25")


@pytest.fixture(scope="session")
def cuspidal_edge_model():
    return sf.standard_model("cuspidal_edge")


@pytest.fixture(scope="session")
def cone_model():
    return sf.standard_model("cone")


@pytest.fixture(scope="session")
def conj_k2_records(conj_k2):
    return sg.trace_singular_curve(conj_k2, box=(-0.4, 0.4, 0.1, 2.1), n_grid=25)


@pytest.fixture(scope="session")
def delaunay_t_records(delaunay_t_k2):
    return sg.trace_singular_curve(delaunay_t_k2, box=(-0.8, 0.8, 0.1, 2.0), n_grid=17)


@pytest.fixture(scope="session")
def profile_t_k2(delaunay_t_k2):
    return rp.conformal_profile_chart(delaunay_t_k2, 0.2, 1.5)


@pytest.fixture(scope="session")
def gauss_data_t_k2(profile_t_k2):
    prof = profile_t_k2
    s0, s1 = prof.s_of_r(0.3), prof.s_of_r(1.3)
    return rp.gauss_data_from_surface(prof, s0, s1, 0.0, 1.2, 25, 13)
