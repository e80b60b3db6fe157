"""tiqflash: design automation and behavioral simulation for TIQ flash ADCs.

A threshold inverter quantization (TIQ) flash converter replaces the
resistor ladder and differential comparators of a classic flash ADC
with 2**n - 1 cascaded inverter pairs whose switching thresholds are
set purely by transistor width ratios.  This package sizes those width
pairs against an ideal reference ladder, builds the fat-tree encoder
that turns the thermometer code into binary, simulates the whole
converter (ideal or square-law analog comparators), measures linearity
and temperature drift, and emits SPICE decks, gate netlists and
reports.
"""

from .devices import (
    DeviceParams,
    InverterSpec,
    TransistorGeom,
    apply_temperature,
    balanced_threshold,
    beta_ratio,
    builtin_presets,
    gain_at_threshold,
    inverter,
    inverter_threshold,
    load_params,
    load_preset,
    vtc,
    vtc_crossing,
)
from .synthesis import (
    DEFAULT_GRID,
    CandidateSet,
    ComparatorBank,
    ComparatorDesign,
    LadderSpec,
    ReferenceLadder,
    WidthGrid,
    bank_report,
    centered_ladder_spec,
    compute_ladder,
    enumerate_candidates,
    size_comparators,
)
from .codes import (
    BinaryCode,
    GateNetlist,
    OneHotCode,
    ThermometerCode,
    build_fat_tree,
    eval_netlist,
    netlist_stats,
    one_hot_from_thermometer,
    rom_encoder_oracle,
)
from .simulator import (
    AnalogMode,
    IDEAL,
    RampStimulus,
    SampleStimulus,
    SineStimulus,
    analog_mode,
    quantize,
    simulate,
)
from .metrics import encoder_latency_bound, full_scale, linearity, temperature_drift
from .netlist_io import (
    SpiceEmitOptions,
    design_from_json,
    design_to_json,
    emit_spice,
    load_design,
    save_design,
)
from . import errors

__version__ = "0.1.0"
