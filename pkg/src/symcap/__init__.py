"""Capacity bounds and volume inequalities for convex bodies in R^{2n}."""

__version__ = "0.1.0"

from .exceptions import DimensionError, DomainError, NumericalError, SymcapError
from .symplectic import (WDSForm, WilliamsonForm, complex_structure,
                         ellipsoid_capacity, is_symplectic, rotate,
                         symplectic_spectrum, wds_decompose, williamson)
from .bodies import (ContactCertificate, Ellipsoid, HPolytope, InradiusResult,
                     VPolytope, barycenter, contact_certificate, difference_body,
                     gauge, inradius, is_i_invariant, linear_image,
                     minkowski_sum, support)
from .volume import (VolumeEstimate, ball_volume, sum_volume, viterbo_volume_term,
                     volume, volume_exact, volume_mc)
from .positions import (MProxy, loewner_ellipsoid, m_position_map, m_proxy,
                        verify_rbm, verify_withP)
from .pipeline import (CapacityBound, PipelineTrace, ViterboReport,
                       capacity_axioms_suite, grs_ratio, lemma_ai_bound,
                       rogers_shephard_ratio, sik_normalize, tmt_upper_bound,
                       viterbo_ratio)
from .experiments import (BodySpec, ConfigError, ExperimentConfig,
                          generate_body, run_experiment)

__all__ = [
    "__version__",
    "DimensionError",
    "DomainError",
    "NumericalError",
    "SymcapError",
    "WDSForm",
    "WilliamsonForm",
    "complex_structure",
    "ellipsoid_capacity",
    "is_symplectic",
    "rotate",
    "symplectic_spectrum",
    "wds_decompose",
    "williamson",
    "ContactCertificate",
    "Ellipsoid",
    "HPolytope",
    "InradiusResult",
    "VPolytope",
    "barycenter",
    "contact_certificate",
    "difference_body",
    "gauge",
    "inradius",
    "is_i_invariant",
    "linear_image",
    "minkowski_sum",
    "support",
    "VolumeEstimate",
    "ball_volume",
    "sum_volume",
    "viterbo_volume_term",
    "volume",
    "volume_exact",
    "volume_mc",
    "MProxy",
    "loewner_ellipsoid",
    "m_position_map",
    "m_proxy",
    "verify_rbm",
    "verify_withP",
    "CapacityBound",
    "PipelineTrace",
    "ViterboReport",
    "capacity_axioms_suite",
    "grs_ratio",
    "lemma_ai_bound",
    "rogers_shephard_ratio",
    "sik_normalize",
    "tmt_upper_bound",
    "viterbo_ratio",
    "BodySpec",
    "ConfigError",
    "ExperimentConfig",
    "generate_body",
    "run_experiment",
]
