"""Deviation bounds, inversions, and the MGF envelope.

The frozen constants below come from evaluating the closed forms at
50 digits with C_r = sqrt(2) + 1 (the exact Geometric(1/2) power sum at
r = 1/2) and rounding to the nearest float.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entrobound import (
    AdmissibilityError,
    BernsteinConstants,
    EntropyInterval,
    Geometric,
    MomentCertificate,
    ResourceCapError,
    SQRT_PI,
    Zeta,
    bernstein_constants,
    certify_moment,
    chernoff_lambda_star,
    deviation_bound,
    entropy_interval,
    epsilon_for,
    heterogeneous_deviation_bound,
    mgf_exact,
    mgf_log_bound,
    min_sample_size,
    select_r,
)

EXACT_GEOM_CERT = MomentCertificate(
    r=0.5, C_r=2.414213562373095, slack=0.0, truncation_index=0, provenance="ratio"
)

# frozen evaluations at C_r = sqrt(2) + 1, r = 1/2
C1_EXACT = 10.896593154804973
BOUND_N100_EPS_HALF = 0.28784035779606438
BOUND_N1000_EPS_HALF = 7.6251237699037650e-09
EPS_FOR_N1E6 = 0.0063474308375444889
LAMBDA_STAR_N100_T50 = 0.07753985785210438
MGF_LOG_BOUND_QUARTER = 0.34051853608765541
MGF_EXACT_PLUS_QUARTER = 1.0259713891429513
MGF_EXACT_MINUS_QUARTER = 1.0371285081720181


def exact_constants() -> BernsteinConstants:
    return bernstein_constants(EXACT_GEOM_CERT)


# -- arithmetic oracles --------------------------------------------------------


def test_bernstein_constants_values():
    constants = exact_constants()
    assert constants.c1 == pytest.approx(C1_EXACT, rel=1e-15)
    assert constants.c2 == 4.0


def test_deviation_bound_values():
    constants = exact_constants()
    assert deviation_bound(constants, 100, 0.5) == pytest.approx(
        BOUND_N100_EPS_HALF, rel=1e-14
    )
    assert deviation_bound(constants, 1000, 0.5) == pytest.approx(
        BOUND_N1000_EPS_HALF, rel=1e-13
    )


def test_deviation_bound_above_one_is_returned_verbatim():
    constants = exact_constants()
    value = deviation_bound(constants, 1, 0.1)
    assert value > 1.0  # vacuous but legal


def test_deviation_bound_validation():
    constants = exact_constants()
    with pytest.raises(ValueError):
        deviation_bound(constants, 0, 0.5)
    with pytest.raises(ValueError):
        deviation_bound(constants, 100, 0.0)
    with pytest.raises(ValueError):
        deviation_bound(constants, 100, math.inf)


def test_extreme_radius_does_not_overflow():
    constants = exact_constants()
    assert deviation_bound(constants, 1, 1e9) == 0.0


def test_min_sample_size_value():
    assert min_sample_size(exact_constants(), 0.5, 0.05) == 191


def test_epsilon_for_value():
    assert epsilon_for(exact_constants(), 10**6, 0.05) == pytest.approx(
        EPS_FOR_N1E6, rel=1e-14
    )


def test_chernoff_lambda_star_value():
    assert chernoff_lambda_star(EXACT_GEOM_CERT, 100, 50.0) == pytest.approx(
        LAMBDA_STAR_N100_T50, rel=1e-14
    )


def test_mgf_log_bound_value():
    assert mgf_log_bound(EXACT_GEOM_CERT, 0.25) == pytest.approx(
        MGF_LOG_BOUND_QUARTER, rel=1e-14
    )
    # symmetric in lambda
    assert mgf_log_bound(EXACT_GEOM_CERT, -0.25) == mgf_log_bound(EXACT_GEOM_CERT, 0.25)


def test_mgf_log_bound_domain():
    for lam in (0.5, -0.5, 0.7, math.nan):
        with pytest.raises(ValueError):
            mgf_log_bound(EXACT_GEOM_CERT, lam)
    assert mgf_log_bound(EXACT_GEOM_CERT, 0.0) == 0.0


def test_constants_validation():
    with pytest.raises(ValueError):
        BernsteinConstants(c1=-1.0, c2=4.0)
    with pytest.raises(ValueError):
        BernsteinConstants(c1=1.0, c2=0.0)


# -- monotonicity and inversions ------------------------------------------------


@given(
    n=st.integers(1, 10_000),
    eps=st.floats(0.01, 3.0),
)
@settings(max_examples=100, deadline=None)
def test_bound_decreases_in_n_and_eps(n, eps):
    constants = exact_constants()
    value = deviation_bound(constants, n, eps)
    assert 0.0 <= value <= 2.0
    assert deviation_bound(constants, n + 1, eps) <= value
    assert deviation_bound(constants, n, eps * 1.1) <= value


@given(
    eps=st.floats(0.01, 3.0),
    delta=st.floats(1e-6, 1.99),
)
@settings(max_examples=100, deadline=None)
def test_min_sample_size_round_trip(eps, delta):
    constants = exact_constants()
    n = min_sample_size(constants, eps, delta)
    assert deviation_bound(constants, n, eps) <= delta
    if n > 1:
        assert deviation_bound(constants, n - 1, eps) > delta


@given(
    n=st.integers(1, 10**7),
    delta=st.floats(1e-6, 1.99),
)
@settings(max_examples=100, deadline=None)
def test_epsilon_for_round_trip(n, delta):
    constants = exact_constants()
    eps = epsilon_for(constants, n, delta)
    assert deviation_bound(constants, n, eps) == pytest.approx(delta, rel=1e-9)


def test_inversion_domain():
    constants = exact_constants()
    with pytest.raises(ValueError):
        min_sample_size(constants, 0.5, 0.0)
    with pytest.raises(ValueError):
        min_sample_size(constants, 0.5, 2.0)
    with pytest.raises(ValueError):
        epsilon_for(constants, 100, 2.5)
    # near-vacuous targets are legal and give tiny n
    assert min_sample_size(constants, 0.5, 1.999) == 1


@given(
    n=st.integers(1, 10**6),
    t=st.floats(1e-3, 1e6),
)
@settings(max_examples=100, deadline=None)
def test_chernoff_tilt_stays_inside_domain(n, t):
    lam = chernoff_lambda_star(EXACT_GEOM_CERT, n, t)
    assert 0.0 < lam < EXACT_GEOM_CERT.r


# -- heterogeneous draws ---------------------------------------------------------


def test_heterogeneous_matches_homogeneous_for_equal_certificates():
    certs = [EXACT_GEOM_CERT] * 100
    assert heterogeneous_deviation_bound(certs, 100, 0.5) == deviation_bound(
        exact_constants(), 100, 0.5
    )


def test_heterogeneous_uses_mean_constant():
    a = EXACT_GEOM_CERT
    b = MomentCertificate(r=0.5, C_r=4.0, slack=0.0, truncation_index=0, provenance="ratio")
    mixed = heterogeneous_deviation_bound([a, b], 2, 0.5)
    mean_c = (a.C_r + b.C_r) / 2.0
    constants = BernsteinConstants(c1=2.0 * mean_c / (SQRT_PI * 0.25), c2=4.0)
    assert mixed == pytest.approx(deviation_bound(constants, 2, 0.5), rel=1e-15)


def test_heterogeneous_rejects_mixed_orders():
    a = EXACT_GEOM_CERT
    b = MomentCertificate(r=0.4, C_r=3.0, slack=0.0, truncation_index=0, provenance="ratio")
    with pytest.raises(AdmissibilityError, match="mixed"):
        heterogeneous_deviation_bound([a, b], 2, 0.5)


def test_heterogeneous_requires_one_certificate_per_draw():
    with pytest.raises(ValueError, match="one certificate per draw"):
        heterogeneous_deviation_bound([EXACT_GEOM_CERT] * 3, 4, 0.5)


# -- exact MGF intervals ----------------------------------------------------------


@pytest.fixture(scope="module")
def geom_mgf_setup():
    model = Geometric(0.5)
    cert = certify_moment(model, r=0.5, eps=1e-9)
    interval = entropy_interval(model, cert, 1e-12)
    return model, cert, interval


def test_mgf_exact_frozen_values(geom_mgf_setup):
    model, cert, interval = geom_mgf_setup
    lo, hi = mgf_exact(model, cert, interval, 0.25, tol=1e-9)
    assert hi - lo <= 1e-9
    assert lo - 1e-12 <= MGF_EXACT_PLUS_QUARTER <= hi + 1e-12
    lo, hi = mgf_exact(model, cert, interval, -0.25, tol=1e-9)
    assert hi - lo <= 1e-9
    assert lo - 1e-12 <= MGF_EXACT_MINUS_QUARTER <= hi + 1e-12


def test_mgf_exact_at_zero_is_one(geom_mgf_setup):
    model, cert, interval = geom_mgf_setup
    assert mgf_exact(model, cert, interval, 0.0) == (1.0, 1.0)


def test_mgf_exact_domain(geom_mgf_setup):
    model, cert, interval = geom_mgf_setup
    with pytest.raises(ValueError):
        mgf_exact(model, cert, interval, 0.5)
    with pytest.raises(ValueError):
        mgf_exact(model, cert, interval, 0.25, tol=0.0)


def test_mgf_exact_entropy_floor(geom_mgf_setup):
    model, cert, _ = geom_mgf_setup
    sloppy = EntropyInterval(lower=1.0, upper=2.0, tolerance=1.0)
    with pytest.raises(ResourceCapError, match="entropy interval"):
        mgf_exact(model, cert, sloppy, 0.25, tol=1e-9)


def test_mgf_envelope_dominates_exact_values(geom_mgf_setup):
    model, cert, interval = geom_mgf_setup
    for lam in np.linspace(-0.45, 0.45, 19):
        lam = float(lam)
        lo, _ = mgf_exact(model, cert, interval, lam, tol=1e-9)
        assert math.exp(mgf_log_bound(cert, lam)) >= lo


def test_mgf_envelope_holds_at_tight_slack_upper_endpoint(geom_mgf_setup):
    # the envelope evaluated near the edge of its domain still dominates
    model, cert, interval = geom_mgf_setup
    lam = 0.499
    lo, hi = mgf_exact(model, cert, interval, lam, tol=1e-6)
    assert math.exp(mgf_log_bound(cert, lam)) >= hi


# -- order selection ---------------------------------------------------------------


def test_select_r_defaults(geom_half, zeta_two):
    assert select_r(geom_half) == 0.5
    assert select_r(zeta_two) == 0.25


def test_select_r_with_target_minimises_grid_objective(geom_half):
    target = 0.3
    chosen = select_r(geom_half, eps=1e-6, target_eps=target)
    assert 0.0 < chosen < 1.0

    def objective(r: float) -> float:
        constants = bernstein_constants(certify_moment(geom_half, r=r, eps=1e-6))
        return constants.c1 + constants.c2 * target

    best = objective(chosen)
    for i in range(1, 22):
        assert best <= objective(1.0 * i / 22.0) + 1e-12


def test_select_r_target_validation(geom_half):
    with pytest.raises(ValueError):
        select_r(geom_half, target_eps=0.0)


def test_select_r_reports_total_failure():
    with pytest.raises(ResourceCapError):
        select_r(Zeta(1.05), eps=1e-6, target_eps=0.5)
