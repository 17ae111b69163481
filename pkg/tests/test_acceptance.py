import pytest

from acceptance import (
    CHECKS,
    check_engine_cross_validation,
    check_kac_asymptotics,
    check_kac_constant,
    check_kac_matrix,
    check_kostlan_exactness,
    check_noncentral,
    check_sin_exp,
    check_systems,
    run_acceptance,
)

COLUMNS = ["criterion", "observed", "target", "tolerance", "passed", "seconds"]


def test_analytic_checks_pass():
    checks = (check_kac_constant, check_kac_asymptotics, check_kostlan_exactness, check_sin_exp, check_kac_matrix)
    report = run_acceptance(quick=True, checks=checks)
    assert list(report.columns) == COLUMNS
    assert len(report) == 1 + 3 + 4 + 1 + 1
    assert report["passed"].all(), report.loc[~report["passed"], "criterion"].tolist()


def test_cross_validation_and_means():
    report = run_acceptance(quick=True, checks=(check_engine_cross_validation, check_noncentral))
    assert report["passed"].all(), report.loc[~report["passed"], "criterion"].tolist()


def test_systems_checks():
    report = run_acceptance(quick=True, checks=(check_systems,))
    assert report["passed"].all(), report.loc[~report["passed"], "criterion"].tolist()


def test_failures_are_reported():
    def failing(samples):
        return [{"criterion": "always wrong", "observed": 1.0, "target": 0.0, "tolerance": 0.0, "passed": False}]

    report = run_acceptance(quick=True, checks=(failing,))
    assert not report["passed"].any()
    assert report["seconds"].iloc[0] >= 0.0


@pytest.mark.slow
def test_full_acceptance():
    report = run_acceptance(quick=False, checks=CHECKS)
    assert report["passed"].all(), report.loc[~report["passed"], "criterion"].tolist()
