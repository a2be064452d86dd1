import math

import numpy as np
import pytest

from inexact_pgm.oracle.certificate import InvalidCertificateError, NonFiniteOracleOutput, OracleCertificate, \
    OracleEval, dual_certificate_shifted, majorize_amgm, majorized_constants, restrict_to_ball
from inexact_pgm.oracle.certify import BoxPairSampler, CertificationInputError, L1BallPairSampler, \
    certify_holder_condition, certify_oracle
from inexact_pgm.oracle.handles import ExactOracle, HolderOracle, MinibatchOracle, NoisyGradientOracle, \
    SaddleOracle, ShiftedPointOracle
from inexact_pgm.oracle.holder import HolderFunction, HolderParameterError, eval_holder, holder_smoothing_constant
from inexact_pgm.oracle.smooth import MinibatchScaling, OracleInputError, SaddleProblem, eval_minibatch, \
    eval_noisy_gradient, eval_saddle, eval_shifted_point, spectral_norm
from inexact_pgm.problems.holder import generate_holder_instance
from inexact_pgm.problems.objective import LinearObjective, ProblemSpecError
from inexact_pgm.problems.quadratic import QuadraticProblem, generate_quadratic_instance
from tests.utilities import canonical_logsum

PAIRS = 1000
TOLERANCE = 1e-7


@pytest.fixture(scope="module")
def logsum():
    return canonical_logsum()


@pytest.fixture(scope="module")
def quadratic():
    return generate_quadratic_instance(8, conditioning=10.0, seed=3)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def certify_handle(oracle, delta, problem, sampler):
    rng = np.random.default_rng(11)
    return certify_oracle(lambda y: oracle.evaluate(y, delta, rng), problem.value, sampler, PAIRS, TOLERANCE)


def test_majorize_amgm_examples():
    assert majorize_amgm(0.7, 0.0, 5.0) == (0.0, 0.7)
    assert majorize_amgm(1.0, 1.0, 1.0) == pytest.approx((0.5, 0.5))
    assert majorize_amgm(2.0, 1.0, 4.0) == pytest.approx((2.0, 0.5))


# Sample many (delta, q, rho, r) tuples.
# Expect delta r^q to stay below the quadratic plus the additive constant
def test_majorize_amgm_dominates(rng):
    for _ in range(10 ** 5):
        delta = rng.uniform(0.0, 5.0)
        degree = rng.uniform(0.0, 1.9)
        rho = rng.uniform(0.1, 10.0)
        r = rng.uniform(0.0, 100.0)
        quad_coeff, additive = majorize_amgm(delta, degree, rho)
        upper = quad_coeff * r ** 2 + additive
        assert delta * r ** degree <= upper + 1e-10 * (1.0 + upper)


def test_majorize_amgm_rejects_bad_args():
    with pytest.raises(InvalidCertificateError):
        majorize_amgm(1.0, 2.0, 1.0)
    with pytest.raises(InvalidCertificateError):
        majorize_amgm(1.0, 1.0, 0.0)
    with pytest.raises(InvalidCertificateError):
        majorize_amgm(-1.0, 1.0, 1.0)


def test_majorized_constants():
    lipschitz, additive = majorized_constants(OracleCertificate(2.0, 3.0, 1.0), 4.0)
    assert lipschitz == pytest.approx(7.0)
    assert additive == pytest.approx(0.5)


def test_certificate_validation():
    with pytest.raises(InvalidCertificateError):
        OracleCertificate(-0.1, 1.0, 1.0)
    with pytest.raises(InvalidCertificateError):
        OracleCertificate(0.1, 0.0, 1.0)
    with pytest.raises(InvalidCertificateError):
        OracleCertificate(0.1, 1.0, 2.0)


def test_oracle_eval_rejects_non_finite_output():
    certificate = OracleCertificate(0.0, 1.0, 1.0)
    with pytest.raises(NonFiniteOracleOutput):
        OracleEval(np.zeros(2), math.nan, np.zeros(2), certificate)
    with pytest.raises(NonFiniteOracleOutput):
        OracleEval(np.zeros(2), 0.0, np.array([0.0, math.inf]), certificate)
    with pytest.raises(NonFiniteOracleOutput):
        OracleEval(np.zeros(2), 0.0, np.zeros(3), certificate)


def test_restrict_to_ball():
    restricted = restrict_to_ball(OracleCertificate(0.1, 2.0, 1.0), 4.0, 0.0)
    assert restricted.delta == pytest.approx(0.8)
    assert restricted.lipschitz == 2.0
    assert restricted.degree == 0.0
    with pytest.raises(InvalidCertificateError):
        restrict_to_ball(OracleCertificate(0.1, 2.0, 0.5), 4.0, 0.0)
    with pytest.raises(InvalidCertificateError):
        restrict_to_ball(OracleCertificate(0.1, 2.0, 1.0), 4.0, 1.5)


def test_noisy_gradient_one_dimensional(rng):
    problem = QuadraticProblem.from_operator(np.eye(1), np.zeros(1))
    evaluation = eval_noisy_gradient(problem, np.array([1.0]), 0.1, rng)
    assert abs(evaluation.gradient[0] - 1.0) <= 0.1 + 1e-15
    assert evaluation.value == pytest.approx(0.5)
    assert evaluation.certificate == OracleCertificate(0.1, 1.0, 1.0)


def test_zero_accuracy_is_exact(logsum, quadratic, rng):
    x = np.full(logsum.dim, 0.01)
    assert np.array_equal(eval_noisy_gradient(logsum, x, 0.0, rng).gradient, logsum.gradient(x))
    y = np.linspace(-1.0, 1.0, quadratic.dim)
    assert np.array_equal(eval_shifted_point(quadratic, y, 0.0, rng).gradient, quadratic.gradient(y))


def test_noise_stays_within_bound(logsum, rng):
    x = np.zeros(logsum.dim)
    for _ in range(200):
        evaluation = eval_noisy_gradient(logsum, x, 0.3, rng)
        assert np.linalg.norm(evaluation.gradient - logsum.gradient(x)) <= 0.3 * (1.0 + 1e-12)


def test_negative_bounds_are_rejected(quadratic, rng):
    x = np.zeros(quadratic.dim)
    with pytest.raises(OracleInputError):
        eval_noisy_gradient(quadratic, x, -0.1, rng)
    with pytest.raises(OracleInputError):
        eval_shifted_point(quadratic, x, -0.1, rng)


def test_shifted_point_certificate(quadratic, rng):
    x = np.ones(quadratic.dim)
    evaluation = eval_shifted_point(quadratic, x, 0.2, rng)
    assert evaluation.value == quadratic.value(x)
    assert evaluation.certificate.lipschitz == quadratic.lipschitz
    assert evaluation.certificate.delta == pytest.approx(0.2 * quadratic.lipschitz)


def test_minibatch_examples():
    components = [LinearObjective(np.array([1.0])), LinearObjective(np.array([3.0]))]
    claimed = OracleCertificate(0.5, 1.0, 1.0)
    x = np.array([2.0])
    assert eval_minibatch(components, x, [0], claimed).gradient[0] == pytest.approx(1.0)
    assert eval_minibatch(components, x, [0, 1], claimed).gradient[0] == pytest.approx(2.0)
    summed = eval_minibatch(components, x, [0, 1], claimed, MinibatchScaling.SUM)
    assert summed.gradient[0] == pytest.approx(4.0)
    assert summed.value == pytest.approx(8.0)
    assert eval_minibatch(components, x, [0, 1], claimed).value == pytest.approx(4.0)


def test_minibatch_rejects_bad_batches():
    components = [LinearObjective(np.array([1.0])), LinearObjective(np.array([3.0]))]
    claimed = OracleCertificate(0.5, 1.0, 1.0)
    with pytest.raises(OracleInputError):
        eval_minibatch(components, np.zeros(1), [], claimed)
    with pytest.raises(OracleInputError):
        eval_minibatch(components, np.zeros(1), [2], claimed)
    with pytest.raises(OracleInputError):
        MinibatchOracle(components, 3, 1.0)


# Draw the full batch through the handle.
# Expect the exact mean gradient and the caller's accuracy in the certificate
def test_minibatch_handle_full_batch(rng):
    components = [LinearObjective(np.array([1.0, 0.0])), LinearObjective(np.array([0.0, 2.0]))]
    oracle = MinibatchOracle(components, 2, 1.0)
    evaluation = oracle.evaluate(np.zeros(2), 0.25, rng)
    assert np.allclose(evaluation.gradient, [0.5, 1.0])
    assert evaluation.certificate.delta == 0.25
    assert oracle.claimed_lipschitz(0.25) == 1.0


def test_saddle_one_dimensional(rng):
    saddle = SaddleProblem(np.eye(1), np.zeros(1), 1.0)
    x = np.array([0.7])
    assert saddle.value(x) == pytest.approx(0.5 * 0.49)
    assert saddle.gradient(x) == pytest.approx([0.7])
    evaluation = eval_saddle(saddle, x, 0.05, rng)
    assert abs(evaluation.gradient[0] - 0.7) <= 0.05 + 1e-15
    assert evaluation.certificate.delta == pytest.approx(0.05)
    assert evaluation.certificate.lipschitz == pytest.approx(1.0)
    assert np.array_equal(eval_saddle(saddle, x, 0.0, rng).gradient, saddle.gradient(x))


def test_saddle_validation():
    with pytest.raises(OracleInputError):
        SaddleProblem(np.eye(2), np.zeros(2), 0.0)
    with pytest.raises(OracleInputError):
        SaddleProblem(np.eye(2), np.zeros(3), 1.0)
    with pytest.raises(ProblemSpecError):
        SaddleProblem(np.zeros((2, 2)), np.zeros(2), 1.0)
    with pytest.raises(ProblemSpecError):
        SaddleProblem(np.array([[1.0, np.inf], [0.0, 1.0]]), np.zeros(2), 1.0)


def test_spectral_norm():
    assert spectral_norm(np.diag([2.0, 1.0, 0.5])) == pytest.approx(2.0, rel=1e-9)


def test_holder_smoothing_constant_examples():
    assert holder_smoothing_constant(3.0, 1.0, 0.5, 0.1) == 3.0
    assert holder_smoothing_constant(2.0, 0.0, 0.0, 0.5) == pytest.approx(4.0)


# Evaluate L(delta) for nu = q = 0.5, H = 1, delta = 0.1.
# Expect the upper model to dominate the Hölder growth on a dense grid of radii
def test_holder_smoothing_constant_dominates():
    lipschitz = holder_smoothing_constant(1.0, 0.5, 0.5, 0.1)
    radii = np.linspace(1e-6, 100.0, 200001)
    growth = radii ** 1.5 / 1.5
    model = 0.5 * lipschitz * radii ** 2 + 0.1 * radii ** 0.5
    assert np.all(growth <= model * (1.0 + 1e-12))
    # The constant is the smallest one: the gap closes somewhere on the grid
    assert np.min(model - growth) < 1e-6


def test_holder_smoothing_constant_grows_as_delta_shrinks():
    values = [holder_smoothing_constant(1.0, 0.5, 0.5, delta) for delta in (0.4, 0.2, 0.1, 0.05)]
    assert all(later >= earlier for earlier, later in zip(values, values[1:]))


def test_holder_smoothing_constant_errors():
    with pytest.raises(HolderParameterError):
        holder_smoothing_constant(1.0, 0.5, 1.5, 0.1)
    with pytest.raises(HolderParameterError):
        holder_smoothing_constant(1.0, 0.5, 0.5, 0.0)
    with pytest.raises(HolderParameterError):
        holder_smoothing_constant(0.0, 0.5, 0.5, 0.1)


def test_eval_holder_example():
    holder = HolderFunction(0.5, 2.0, np.zeros(2))
    evaluation = eval_holder(holder, np.array([1.0, -1.0]), 0.75, 0.2)
    assert np.allclose(evaluation.gradient, [1.0, -1.0])
    assert evaluation.certificate.convex_lower_bound
    assert evaluation.certificate.lipschitz == pytest.approx(holder_smoothing_constant(2.0, 0.5, 0.75, 0.2))


def test_certify_rejects_zero_pairs(quadratic):
    oracle = ExactOracle(quadratic)
    with pytest.raises(CertificationInputError):
        certify_oracle(lambda y: oracle.evaluate(y, 0.0, None), quadratic.value,
                       L1BallPairSampler(quadratic.dim, 4.0), 0)


def test_exact_oracle_certifies(quadratic):
    report = certify_handle(ExactOracle(quadratic, convex=True), 0.0, quadratic,
                            L1BallPairSampler(quadratic.dim, 4.0, seed=1))
    assert report.certified
    assert report.min_lower_gap >= -TOLERANCE
    assert report.violating_pair is None


@pytest.mark.parametrize("degree", [0.0, 0.5, 1.0])
@pytest.mark.parametrize("level", [0.1, 1.0, 3.0])
def test_noisy_gradient_certifies_on_ball(logsum, degree, level):
    oracle = NoisyGradientOracle(logsum, degree, ball_radius=4.0)
    delta = level * 8.0 ** (1.0 - degree)
    report = certify_handle(oracle, delta, logsum, L1BallPairSampler(logsum.dim, 4.0, seed=2))
    assert report.certified, report.max_violation


def test_shifted_point_certifies(quadratic):
    oracle = ShiftedPointOracle(quadratic)
    report = certify_handle(oracle, 0.3, quadratic, L1BallPairSampler(quadratic.dim, 4.0, seed=3))
    assert report.certified, report.max_violation


# Replace the certificate of the shifted-point oracle by the degree-0 pair of the classical analysis.
# Expect it to certify as well
def test_dual_certificate_shifted_certifies(quadratic):
    shift = 0.2
    oracle = ShiftedPointOracle(quadratic)
    rng = np.random.default_rng(5)
    claimed = dual_certificate_shifted(quadratic.lipschitz, shift)
    assert claimed.degree == 0.0 and claimed.lipschitz == pytest.approx(2.0 * quadratic.lipschitz)

    def evaluate(y):
        evaluation = oracle.evaluate(y, quadratic.lipschitz * shift, rng)
        return OracleEval(evaluation.point, evaluation.value, evaluation.gradient, claimed)

    report = certify_oracle(evaluate, quadratic.value, L1BallPairSampler(quadratic.dim, 4.0, seed=4), PAIRS, TOLERANCE)
    assert report.certified, report.max_violation


def test_saddle_oracle_certifies():
    saddle = SaddleProblem(np.diag([2.0, 1.0, 0.5]), np.array([0.3, -0.2, 0.1]), 2.0)
    assert SaddleOracle(saddle).claimed_lipschitz(0.1) == pytest.approx(2.0, rel=1e-9)
    report = certify_handle(SaddleOracle(saddle), 0.1, saddle, L1BallPairSampler(saddle.dim, 4.0, seed=5))
    assert report.certified, report.max_violation


@pytest.mark.parametrize("degree, delta", [(0.75, 0.2), (0.5, 0.1), (0.0, 0.05), (1.25, 0.3)])
def test_holder_oracle_certifies(degree, delta):
    holder = generate_holder_instance(4, 0.5, seed=0)
    report = certify_handle(HolderOracle(holder, degree), delta, holder, BoxPairSampler(holder.dim, 4.0, seed=6))
    assert report.certified, report.max_violation
    assert report.min_lower_gap >= -TOLERANCE


def test_holder_condition_certifies():
    holder = generate_holder_instance(4, 0.5, seed=0)
    report = certify_holder_condition(holder, BoxPairSampler(holder.dim, 4.0, seed=7), PAIRS, TOLERANCE)
    assert report.certified, report.max_violation


# Claim a tenth of the actual noise level on a quadratic whose L is tight.
# Expect a refutation together with the violating pair
def test_understated_noise_is_refuted():
    problem = generate_quadratic_instance(2, conditioning=1.0, seed=0)
    oracle = NoisyGradientOracle(problem, 1.0)
    rng = np.random.default_rng(8)

    def understated(y):
        evaluation = oracle.evaluate(y, 0.5, rng)
        return OracleEval(evaluation.point, evaluation.value, evaluation.gradient,
                          OracleCertificate(0.05, evaluation.certificate.lipschitz, 1.0))

    report = certify_oracle(understated, problem.value, L1BallPairSampler(2, 4.0, seed=9), PAIRS, TOLERANCE)
    assert not report.certified
    assert report.max_violation > TOLERANCE
    x, y = report.violating_pair
    assert x.shape == (2,) and y.shape == (2,)


# Restrict a degree-1 certificate to a domain of diameter below one.
# Expect every lower degree to certify there too
def test_degree_monotonicity_on_small_domain(quadratic):
    oracle = NoisyGradientOracle(quadratic, 1.0)
    rng = np.random.default_rng(10)
    for degree in (0.0, 0.5, 0.9):
        def lowered(y):
            evaluation = oracle.evaluate(y, 0.2, rng)
            certificate = evaluation.certificate
            return OracleEval(evaluation.point, evaluation.value, evaluation.gradient,
                              OracleCertificate(certificate.delta, certificate.lipschitz, degree))

        report = certify_oracle(lowered, quadratic.value, L1BallPairSampler(quadratic.dim, 0.5, seed=12),
                                PAIRS, TOLERANCE)
        assert report.certified, (degree, report.max_violation)


def test_handles_report_lipschitz(quadratic):
    assert ExactOracle(quadratic).claimed_lipschitz(0.1) == quadratic.lipschitz
    assert NoisyGradientOracle(quadratic).claimed_lipschitz(0.1) == quadratic.lipschitz
    assert ShiftedPointOracle(quadratic).claimed_lipschitz(0.1) == quadratic.lipschitz
    holder = HolderFunction(1.0, 1.0, np.zeros(2))
    assert HolderOracle(holder, 1.0).claimed_lipschitz(0.1) == 1.0


def test_noisy_handle_without_ball_has_degree_one(quadratic):
    with pytest.raises(OracleInputError):
        NoisyGradientOracle(quadratic, 0.5)
    with pytest.raises(OracleInputError):
        NoisyGradientOracle(quadratic, 1.5, ball_radius=4.0)
