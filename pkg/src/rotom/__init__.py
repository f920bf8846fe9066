"""Ratio of Transmission of Motion (RoToM) for serial kinematic chains.

Quick start::

    >>> import numpy as np
    >>> from rotom import preset, centroidal_state, fictitious_force
    >>> state = centroidal_state(preset("pendulum"), [0.0])
    >>> round(fictitious_force(state, [1.0, 1.0]).rotom, 5)
    0.70711
"""
from ._backend import NAME as KERNEL_BACKEND
from .centroidal import (
    CentroidalState,
    RotomResult,
    centroidal_state,
    com_acceleration_bound_check,
    fictitious_force,
)
from .chain import (
    ChainModel,
    Configuration,
    JointSpec,
    LinkSpec,
    com_position,
    forward_kinematics,
    link_com_jacobian,
    mass_matrix,
    robot_com_jacobian,
)
from .errors import (
    DegenerateEllipsoid,
    DimensionMismatch,
    JointLimitViolation,
    NormSingularity,
    RotomError,
    SchemaError,
    SingularMassMatrix,
    ZeroForce,
)
from .reference import PendulumClosedForm, SimOracleSettings, pendulum_f, pendulum_rotom, preset, sim_com_acceleration
from .robotfile import dumps_model, load_model, loads_model, model_from_dict, model_to_dict
from .search import (
    DescentSettings,
    DescentTrace,
    StopReason,
    ZeroSearchResult,
    ZeroSearchSettings,
    find_rotom_zeros,
    minimize_rotom,
    rotom_gradient,
)
from .transmissibility import (
    TransmissibilityEllipsoid,
    ellipsoid,
    ellipsoid_from_matrix,
    ellipsoid_ray_reading,
    rotom,
    sample_ellipsoid_boundary,
    transmissibility_index,
)

__version__ = "0.1.0"
