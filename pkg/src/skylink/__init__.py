"""skylink: multi-operator cellular coverage and UAV connectivity simulator.

Library layers, bottom up:

- :mod:`skylink.terrain` - surface rasters and geometric line of sight
- :mod:`skylink.network` - operators, sectors, antenna patterns
- :mod:`skylink.channel` - link state, pathloss, received power, noise
- :mod:`skylink.radio_field` - power / SINR fields over a grid
- :mod:`skylink.metrics` - coverage probability, CDFs, outage zones, maps
- :mod:`skylink.mobility` - flights, handover / RLF state machines
- :mod:`skylink.cli` - the ``skylink`` scenario runner
"""

from .channel import (
    ChannelModel,
    ChannelParams,
    LinkState,
    NoiseParams,
    classify_link,
    noise_power_dbm,
    pathloss_db,
    rx_power_dbm,
)
from .metrics import (
    AssignmentMap,
    CoverageReport,
    OutageZones,
    assignment_map,
    coverage_probability,
    max_outage_zone,
    sinr_cdf,
)
from .mobility import (
    ConnectionParams,
    FlightLog,
    RunStats,
    Trajectory,
    aggregate_runs,
    combine_networks,
    gen_random_route,
    make_trajectory,
    run_flight,
    run_random_flights,
    step_connection,
)
from .network import (
    AntennaPattern,
    Deployment,
    DeploymentError,
    OperatorNetwork,
    PatternTable,
    Sector,
    antenna_gain_db,
    gen_hex_network,
    load_deployment,
    save_deployment,
    sector_bearing,
)
from .radio_field import (
    PowerField,
    SinrField,
    assign_serving,
    compute_power_field,
    compute_sinr_grid,
    multi_op_sinr,
    sinr_at,
)
from .terrain import (
    DsmRaster,
    GeoPoint,
    GridParseError,
    elevation_at,
    gen_synthetic_city,
    has_los,
    load_ascii_grid,
    save_ascii_grid,
)

__version__ = "0.1.0"
