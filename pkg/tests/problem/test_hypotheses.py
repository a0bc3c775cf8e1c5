"""Tests for the sampled hypothesis checks."""

import dataclasses
import logging

import numpy as np
import pytest

from hybridfv.problem import (
    ReactionLaw,
    Region,
    check_hypotheses,
    make_custom,
    make_test1,
    make_test2,
    strong_residual,
    time_step_admissible,
)

UNIT_SQUARE = [[0.0, 1.0], [0.0, 1.0]]


def linear_problem(coefficient):
    """Custom 2D problem with identity storage and F(u) = c u."""
    return make_custom(
        {
            "domain": UNIT_SQUARE,
            "initial": "0",
            "reaction": "linear",
            "reaction_coefficient": coefficient,
        }
    )


class TestCheckHypotheses:
    """Tests for check_hypotheses."""

    def test_first_problem_passes(self) -> None:
        """Test that every check passes for the exponential problem."""
        report = check_hypotheses(make_test1())

        assert report.ok
        assert all(report.checks.values())
        eigenvalues = report.details["Lambda eigenvalues [x1<=1]"]
        assert eigenvalues == pytest.approx([1.0, 1.0, 1.0])

    def test_sqrt_storage_slope_is_local(self, caplog) -> None:
        """Test that beta = u^(1/2) only meets its slope bound on [-1, 1]."""
        with caplog.at_level(logging.WARNING):
            report = check_hypotheses(make_test2())

        assert report.checks["beta lower slope"]
        assert not report.checks["beta lower slope (global)"]
        assert len(report.warnings) == 1
        assert "only" in report.warnings[0]
        assert "only" in caplog.text

    def test_decreasing_reaction_within_rate(self) -> None:
        """Test that F(u) = -2u is checked against its declared rate."""
        report = check_hypotheses(linear_problem(-2.0))

        assert report.checks["F decrease rate"]
        assert "F nondecreasing" not in report.checks
        assert report.ok

    def test_reaction_not_zero_at_origin(self) -> None:
        """Test that F(0) != 0 is reported."""
        shifted = ReactionLaw(
            name="shifted",
            function=lambda u: np.asarray(u, dtype=float) + 1.0,
            derivative=lambda u: np.ones_like(np.asarray(u, dtype=float)),
        )
        spec = dataclasses.replace(linear_problem(0.0), reaction=shifted)

        report = check_hypotheses(spec)

        assert not report.checks["F(0)=0"]
        assert any("F(0) = 1.0" in warning for warning in report.warnings)

    def test_non_symmetric_tensor(self) -> None:
        """Test that an asymmetric diffusion tensor is reported."""
        region = Region(
            name="skew",
            contains=lambda x: np.ones(np.atleast_2d(x).shape[0], dtype=bool),
            diffusion=np.array([[1.0, 0.5], [0.0, 1.0]]),
            velocity=np.zeros(2),
        )
        spec = dataclasses.replace(linear_problem(0.0), regions=(region,))

        report = check_hypotheses(spec)

        assert not report.checks["Lambda symmetric [skew]"]
        assert not report.ok

    def test_regions_with_gap(self) -> None:
        """Test that a partition leaving part of the domain uncovered is reported."""
        region = Region(
            name="left",
            contains=lambda x: np.atleast_2d(x)[:, 0] < 0.5,
            diffusion=np.eye(2),
            velocity=np.zeros(2),
        )
        spec = dataclasses.replace(linear_problem(0.0), regions=(region,))

        report = check_hypotheses(spec)

        assert not report.checks["regions exhaustive"]
        assert "belongs to no region" in report.warnings[-1]

    def test_to_dict(self) -> None:
        """Test that the report serializes its checks and warnings."""
        data = check_hypotheses(make_test2()).to_dict()

        assert set(data) == {"checks", "warnings", "details"}
        assert len(data["warnings"]) == 1


class TestTimeStep:
    """Tests for time_step_admissible."""

    def test_monotone_reaction_has_no_limit(self) -> None:
        """Test that any step is admissible for nondecreasing F."""
        assert time_step_admissible(make_test1(), 10.0)

    def test_decreasing_reaction_limit(self) -> None:
        """Test that dt must stay below beta_ / F_ = 1/2 for F(u) = -2u."""
        spec = linear_problem(-2.0)

        assert time_step_admissible(spec, 0.4)
        assert not time_step_admissible(spec, 0.6)


class TestStrongResidual:
    """Tests for strong_residual."""

    def test_requires_exact_solution(self) -> None:
        """Test that a problem without exact solution raises ValueError."""
        with pytest.raises(ValueError, match="no exact solution"):
            strong_residual(linear_problem(0.0), np.array([[0.5, 0.5]]), 0.0)

    def test_linear_heat_solution(self) -> None:
        """Test u = x1 + x2 + t with q = 1 in two dimensions."""
        spec = make_custom(
            {
                "domain": UNIT_SQUARE,
                "initial": "x1 + x2",
                "exact": "x1 + x2 + t",
                "source": "1",
            }
        )

        residual = strong_residual(spec, np.array([[0.3, 0.4], [0.7, 0.2]]), 0.5)

        np.testing.assert_allclose(residual, 0.0, atol=1e-9)
