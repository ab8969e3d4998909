"""Device-level simulator of an all-spintronic Hopfield network built from DW-MTJs."""

from .circuit import (
    CalibrationMode,
    DendriteSolution,
    SynapseBranch,
    TopologyError,
    axon_drive_current,
    calibrate_vdw,
    dendrite_power,
    dendrite_solve,
    instantaneous_power,
)
from .device import (
    BinaryState,
    DeviceParams,
    DwMtjState,
    ParameterError,
    Role,
    binary_state,
    dw_velocity,
    mobility_k,
    mtj_conductance,
    step_position,
)
from .network import (
    InputError,
    NetworkState,
    NumericFault,
    SimConfig,
    TrialReport,
    WeightMatrix,
    charge_up,
    init_all_antiparallel,
    read_states,
    release_and_converge,
    run_trial,
    set_weights_maxcut,
    train_hebbian,
)
from .oracle import OracleNet, hopfield_energy, oracle_converge, oracle_update
from .tasks import (
    Graph,
    ParseError,
    RecallStats,
    bitwise_accuracy,
    cut_value,
    distort,
    image_experiment,
    maxcut_experiment,
    parse_biqmac,
    recall_experiment,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
