"""Small runtime self-check of every module without the CLI."""

from __future__ import annotations

import sys
from pathlib import Path

if __package__ is None or __package__ == "":
    sys.path.append(str(Path(__file__).resolve().parents[1]))

import numpy as np

from app.algebra.clifford_core import check_matrix_isomorphism, make_algebra
from app.algebra.gamma_repr import dirac_gammas, spin_rotate
from app.bundle.transport import bundle_gammas
from app.bundle.trivializations import random_smooth_trivialization
from app.core.logger import logger, setup_logger
from app.core.models import ExperimentConfig
from app.evolution.experiment import run_experiment
from app.geometry.frames import spin_connection_at
from app.geometry.metrics import polar_flat_2d


def run_self_check() -> int:
    setup_logger()

    alg = make_algebra(1, 3)
    rep = dirac_gammas("mostly-minus", 4)
    assert check_matrix_isomorphism(alg, rep).independent

    turn = spin_rotate(rep, (1, 2), 2.0 * np.pi)
    assert np.allclose(turn, -np.eye(4), atol=1e-10)

    conn = spin_connection_at(polar_flat_2d(), np.array([2.0, 0.3]))
    assert abs(conn.christoffel[0, 1, 1] + 2.0) < 1e-12

    l = random_smooth_trivialization(4, seed=3)
    assert bundle_gammas(rep, l, 0.7).relation_residual() < 1e-12

    result = run_experiment(
        ExperimentConfig.model_validate(
            {"lattice": {"n": 32, "dx": 0.2}, "cfg": {"dt": 0.01, "steps": 10}, "trivialization": "random_smooth:{1, 0.2}"}
        )
    )
    assert result.summary()["norm_drift"] < 1e-10
    logger.info(f"self check norm={result.norms[-1]:.6f}")

    print("Self-check passed")
    return 0


if __name__ == "__main__":
    raise SystemExit(run_self_check())
