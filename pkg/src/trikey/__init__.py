"""Three-terminal secret-key / private-key toolkit.

Builds and samples finite-alphabet joint sources, evaluates the rate
regions for simultaneous secret-key and private-key generation, runs
deterministic public-discussion protocols (including hash-binning with
maximum-likelihood reconstruction), and audits secrecy, uniformity and
recoverability exactly at small blocklengths or by Monte Carlo.
"""

from .capacity_region import (
    AbcTriple,
    HalfPlane,
    LabeledPoint,
    RatePair,
    RegionSpec,
    compute_abc,
    contains,
    exact_region,
    inner_bound,
    notable_points,
    outer_bound,
    pk_capacity,
    sk_capacity,
    vertices,
)
from .info_measures import (
    binary_entropy,
    conditional_entropy,
    conditional_mutual_information,
    entropy,
    mutual_information,
)
from .kernels import backend_name
from .protocol_engine import (
    Protocol,
    ProtocolOutcome,
    Transcript,
    binning_protocol,
    example1_pk_protocol,
    example1_sk_protocol,
    protocol_from_descriptor,
    run,
    time_share,
)
from .secrecy_audit import (
    ComplianceVerdict,
    SecrecyReport,
    achieved_rate_pair,
    check_definition,
    exact_audit,
    mc_audit,
)
from .source_model import (
    JointPmf3,
    SampleBlock,
    cascade_bsc_source,
    load_source_spec,
    make_joint_pmf,
    parse_source_spec,
    point_mass_source,
    random_pmf,
    sample_iid,
    xor_source,
)

__version__ = "0.1.0"

__all__ = [
    "AbcTriple",
    "ComplianceVerdict",
    "HalfPlane",
    "JointPmf3",
    "LabeledPoint",
    "Protocol",
    "ProtocolOutcome",
    "RatePair",
    "RegionSpec",
    "SampleBlock",
    "SecrecyReport",
    "Transcript",
    "achieved_rate_pair",
    "backend_name",
    "binary_entropy",
    "binning_protocol",
    "cascade_bsc_source",
    "check_definition",
    "compute_abc",
    "conditional_entropy",
    "conditional_mutual_information",
    "contains",
    "entropy",
    "exact_audit",
    "exact_region",
    "example1_pk_protocol",
    "example1_sk_protocol",
    "inner_bound",
    "load_source_spec",
    "make_joint_pmf",
    "mc_audit",
    "mutual_information",
    "notable_points",
    "outer_bound",
    "parse_source_spec",
    "pk_capacity",
    "point_mass_source",
    "protocol_from_descriptor",
    "random_pmf",
    "run",
    "sample_iid",
    "sk_capacity",
    "time_share",
    "vertices",
    "xor_source",
]
