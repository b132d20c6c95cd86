"""
Stability certification of a trained policy and Lyapunov function.

Two independent verdicts:

* risk: the certification risk (μ = 0) on fresh transitions is below a
  threshold, i.e. the learned function satisfies the Lyapunov conditions
  on the data;
* almost-Lyapunov: few sampled transitions violate the decrease
  condition and all of them lie in a small ball around the goal.
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from lyacert.buffers.transitions import TransitionBatch
from lyacert.cert.violations import violation_scan
from lyacert.core.errors import ContractViolation
from lyacert.envs.base import Environment
from lyacert.lyapunov.function import LyapunovFunction
from lyacert.lyapunov.risk import certification_risk, on_policy_risk
from lyacert.models.reports import CertificateVerdict, CertificationThresholds, ViolationReport
from lyacert.nn.policy import SquashedGaussianPolicy

logger = logging.getLogger(__name__)


def certify(
    env: Environment,
    policy: SquashedGaussianPolicy,
    lyap: LyapunovFunction,
    fresh_batch: TransitionBatch,
    thresholds: Optional[CertificationThresholds] = None,
    scan: Optional[ViolationReport] = None,
    episodes: int = 50,
    rng: Optional[np.random.Generator] = None,
) -> CertificateVerdict:
    """
    Evaluate both certification methods.

    Args:
        fresh_batch: Transitions not used for fitting the Lyapunov function
        scan: A precomputed violation scan; one over `episodes` rollouts
            drawn from `rng` is run otherwise

    Raises:
        ContractViolation: If the fresh batch is empty
    """
    if len(fresh_batch) == 0:
        raise ContractViolation("Certification needs a non-empty fresh batch")
    thresholds = thresholds or CertificationThresholds()
    if lyap.state_only:
        risk = on_policy_risk(fresh_batch, lyap, mu=0.0, with_grad=False).value
    else:
        risk = certification_risk(fresh_batch, lyap, policy).value
    if scan is None:
        rng = rng if rng is not None else np.random.default_rng(0)
        scan = violation_scan(env, policy, lyap, episodes, rng)

    max_distance: Optional[float] = None
    if scan.violating_states:
        offsets = np.asarray(scan.violating_states) - lyap.goal
        max_distance = float(np.max(np.linalg.norm(offsets, axis=1)))
    confined = max_distance is None or max_distance < thresholds.radius

    verdict = CertificateVerdict(
        certification_risk=risk,
        batch_size=len(fresh_batch),
        violation_fraction=scan.fraction,
        violation_count=scan.count,
        total_transitions=scan.total,
        max_violation_distance=max_distance,
        thresholds=thresholds,
        risk_certified=risk < thresholds.risk,
        almost_lyapunov_certified=scan.fraction < thresholds.violation_fraction and confined,
    )
    logger.info(
        f"Certification: risk {risk:.3e} ({'pass' if verdict.risk_certified else 'fail'}), "
        f"violations {100.0 * scan.fraction:.2f}% "
        f"({'pass' if verdict.almost_lyapunov_certified else 'fail'})"
    )
    return verdict
