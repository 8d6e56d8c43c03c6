import math

import pytest

from oam_interferometry import ExperimentConfig, quadrature_mean, run_lossless


@pytest.fixture(scope="session", autouse=True)
def quadrature_convention_calibration():
    """Pin the displacement/variance conventions before anything else runs.

    At zero gain the pipeline mean must be sqrt(2)|alpha|cos(theta + 2 l phi)
    exactly; every closed form in the suite presumes this normalisation, so a
    mismatch here must fail the whole session fast.
    """
    points = [(1, 1.0, 0.0, 0.3), (2, 1.7, 0.9, 1.1), (3, 0.6, -0.4, 2.2)]
    for ell, amag, theta, phi in points:
        config = ExperimentConfig(g=0.0, ell=ell, alpha_mag=amag, theta=theta, phi=phi)
        expected = math.sqrt(2.0) * amag * math.cos(theta + 2.0 * ell * phi)
        assert abs(quadrature_mean(run_lossless(config)) - expected) < 1e-12


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        print(f"\n[acceptance] {name}: {'PASS' if report.passed else 'FAIL'}")
