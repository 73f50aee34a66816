"""Secure multibeam satellite downlink design via physical-layer security.

Power allocation and beamforming that meet per-user secrecy-SINR targets at
minimum total transmit power, under perfect, statistical and imperfect
eavesdropper CSI.
"""

__version__ = "0.1.0"

from satsec.errors import (
    DimensionError,
    DimensionInfeasible,
    Infeasible,
    NotConverged,
    SatsecError,
    TableExhausted,
    ZeroGain,
)
from satsec.channel import (
    AntennaGains,
    AttenuationProfile,
    ChannelRealization,
    CovarianceCsi,
    EstimatedCsi,
    PerfectCsi,
    build_channel,
    outer_covariance,
    sample_channel,
)
from satsec.secrecy import (
    GaussianMapping,
    TableMapping,
    required_sinr,
    secrecy_rate,
    secrecy_sinr,
    sinr_eavesdropper,
    sinr_legitimate,
    sinr_report,
)
from satsec.beamform import (
    BeamformingMatrix,
    null_space_projector,
    zf_nulling_weights,
    zf_nulling_weights_estimated,
    zfbf_weights,
)
from satsec.powerctl import (
    InterferenceCoefficients,
    PowerSolution,
    Variant,
    check_standard_conditions,
    closed_form_power,
    coefficients,
    fixed_point_solve,
    power_update,
    standard_property_probe,
)
