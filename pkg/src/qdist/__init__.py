"""Simulation and verification of quantum query algorithms that tell two
classical probability distributions apart."""

from .adversary import (
    Gamma2Witness,
    LowerBoundCertificate,
    build_witness,
    lower_bound_certificate,
    optimal_weights,
    tau,
    verify_witness,
)
from .discriminators import (
    AlgoParams,
    DiscriminationInstance,
    DiscriminationOutcome,
    classical_discriminate,
    discriminate_model3,
    discriminate_model4,
    separation_bounds,
    standard_method,
)
from .distributions import DistMetrics, ProbDist, generate, metrics, mu_state, sample
from .oracles import GarbageSpec, OracleInstance, prepare_oracle, reflection_oracle, standard_oracle

__version__ = "0.1.0"
